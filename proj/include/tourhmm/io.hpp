// Copyright 2026 The tourhmm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TOURHMM_IO_HPP_
#define TOURHMM_IO_HPP_

#include <filesystem>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "tourhmm/automata.hpp"
#include "tourhmm/eval.hpp"
#include "tourhmm/gi.hpp"
#include "tourhmm/hmm.hpp"
#include "tourhmm/hmm_ops.hpp"
#include "tourhmm/ingest.hpp"
#include "tourhmm/trie.hpp"

namespace tourhmm::io {

using nlohmann::json;

inline constexpr const char* kFptSchema = "tourhmm.fpt/1";
inline constexpr const char* kAutomatonSchema = "tourhmm.automaton/1";
inline constexpr const char* kStochasticSchema = "tourhmm.stochastic/1";
inline constexpr const char* kHmmSchema = "tourhmm.hmm/1";

// Artifact has the wrong schema tag or a malformed layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plain-text sequence file: one sequence per line, items separated by
// spaces. Blank lines are skipped.
std::vector<Sequence> read_sequences(std::istream& in);
void write_sequences(std::ostream& out, const std::vector<Sequence>& sequences);

json to_json(const Fpt& fpt);
json to_json(const gi::FrequencyAutomaton& fa);
json to_json(const StochasticAutomaton& sa);
json to_json(const Hmm& hmm);
json to_json(const ingest::IngestReport& report);
json to_json(const Prediction<double>& prediction);
json summary_json(const eval::ValidationReport& report, const eval::ValidationScope& scope);
json to_json(const eval::RelaxationReport& report);
json to_json(const eval::UpdateResult& result);

// Loaders check the schema tag (SchemaError) and the model invariants
// (InvariantError).
Fpt fpt_from_json(const json& j);
gi::FrequencyAutomaton automaton_from_json(const json& j);
StochasticAutomaton stochastic_from_json(const json& j);
Hmm hmm_from_json(const json& j);

// "sequence,R,P,APE" rows.
void write_validation_csv(std::ostream& out, const eval::ValidationReport& report);
// Two columns: compact sequence label, APE.
void write_plot_data(std::ostream& out, const eval::ValidationReport& report);

json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Stable text form used for every JSON artifact.
std::string dump(const json& j);

}  // namespace tourhmm::io

#endif  // TOURHMM_IO_HPP_
