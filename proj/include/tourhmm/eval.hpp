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

#ifndef TOURHMM_EVAL_HPP_
#define TOURHMM_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tourhmm/automata.hpp"
#include "tourhmm/hmm.hpp"
#include "tourhmm/trie.hpp"
#include "tourhmm/types.hpp"

namespace tourhmm::eval {

// Absolute percent error |r - p| / r. Throws std::domain_error for r <= 0.
double ape(double empirical, double model);

// Exact occurrences of `s` over the number of sequences.
double empirical_probability(std::span<const Sequence> sequences, const Sequence& s);

// Which distinct corpus sequences a validation covers.
struct ValidationScope {
  enum class Kind { length, all, top };
  Kind kind = Kind::length;
  std::size_t value = 2;  // sequence length, or N for top-N by frequency

  static ValidationScope of_length(std::size_t len) { return {Kind::length, len}; }
  static ValidationScope all() { return {Kind::all, 0}; }
  static ValidationScope top(std::size_t n) { return {Kind::top, n}; }

  // "length:2", "all" or "top:20".
  static ValidationScope parse(const std::string& text);
  std::string to_string() const;
};

struct ValidationRow {
  Sequence sequence;
  double empirical = 0.0;  // R_s
  double model = 0.0;      // P_s, probability of s followed by the end marker
  double ape = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;  // lexicographic by sequence
  double mape = 0.0;
  double min_ape = 0.0;
  double max_ape = 0.0;
  // Sequences the model cannot produce at all.
  std::vector<Sequence> anomalies;
};

ValidationReport validate(const Hmm& hmm, std::span<const Sequence> sequences,
                          const ValidationScope& scope = {});

struct UpdateConfig {
  double mape_threshold = 0.10;
  int max_iters = 100;
  ValidationScope scope;

  void validate() const;
};

struct UpdateResult {
  Hmm model;
  std::vector<double> mape;            // before any update, then after each
  std::vector<double> log_likelihood;  // same indexing as `mape`
  int iterations = 0;
  bool converged = false;  // final MAPE below the threshold
  std::size_t excluded = 0;
};

// Alternates validation and single Baum-Welch iterations until MAPE drops
// strictly below the threshold or `max_iters` updates have run.
UpdateResult update_until(const Hmm& hmm, std::span<const Sequence> sequences,
                          const UpdateConfig& cfg);

struct RelaxationGroup {
  Item item = 0;
  std::size_t depth = 0;  // depth of the arcs' source nodes; root is 0
  std::size_t arcs = 0;
  double min_relative_frequency = 0.0;
  double max_relative_frequency = 0.0;
  double variation = 0.0;  // max - min
  bool anomaly = false;
};

struct RelaxationReport {
  std::vector<RelaxationGroup> groups;  // ordered by (depth, item)
  double bound = 0.08;
  double max_variation = 0.0;

  std::vector<RelaxationGroup> anomalies() const;
};

// Compares the relative frequencies of same-item arcs that leave nodes of
// the same depth. Nodes with less than `min_support` outgoing frequency are
// ignored.
RelaxationReport check_relaxation_validity(const Fpt& fpt, double bound = 0.08,
                                           Count min_support = 1);

// Ground-truth automaton used to sample corpora.
struct SyntheticModel {
  StochasticAutomaton automaton;
  std::uint64_t seed = 0;
};

// Five-state tour model over places 0..5.
SyntheticModel five_state_model(std::uint64_t seed = 2021);

// First-order chain: the next state depends only on the last item, so all
// same-item subtrees share their distributions.
SyntheticModel markov_chain_model(std::uint64_t seed = 7);

// Independent walks from the root. Stops at termination or after
// `max_length` items. Bit-reproducible for a given seed.
std::vector<Sequence> generate_sequences(const StochasticAutomaton& model, std::size_t n,
                                         std::uint64_t seed, std::size_t max_length = 1000);

inline std::vector<Sequence> generate_sequences(const SyntheticModel& model, std::size_t n) {
  return generate_sequences(model.automaton, n, model.seed);
}

}  // namespace tourhmm::eval

#endif  // TOURHMM_EVAL_HPP_
