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

#include "tourhmm/io.hpp"

#include <filesystem>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace tourhmm::io {
namespace {

std::vector<Sequence> sample_corpus() {
  auto corpus = eval::generate_sequences(eval::five_state_model(), 800);
  std::erase_if(corpus, [](const Sequence& s) { return s.empty(); });
  return corpus;
}

template <typename T>
void expect_invariant(const std::function<T()>& load, const std::string& name) {
  try {
    load();
    FAIL() << "expected " << name;
  } catch (const InvariantError& e) {
    EXPECT_EQ(e.invariant(), name);
  }
}

TEST(SequenceFileTest, RoundTrip) {
  const std::vector<Sequence> corpus = {{0, 5, 2}, {1}, {12, 3}};
  std::stringstream buf;
  write_sequences(buf, corpus);
  EXPECT_EQ(buf.str(), "0 5 2\n1\n12 3\n");
  EXPECT_EQ(read_sequences(buf), corpus);
}

TEST(SequenceFileTest, SkipsBlankLinesAndRejectsJunk) {
  std::istringstream ok("1 2\n\n  \n3\n");
  EXPECT_EQ(read_sequences(ok), (std::vector<Sequence>{{1, 2}, {3}}));
  std::istringstream junk("1 2\n3 x\n");
  EXPECT_THROW(read_sequences(junk), SchemaError);
  std::istringstream negative("-1\n");
  EXPECT_THROW(read_sequences(negative), SchemaError);
}

TEST(FptJsonTest, RoundTrip) {
  const Fpt fpt = build_fpt(sample_corpus());
  const json j = to_json(fpt);
  EXPECT_EQ(j.at("schema"), kFptSchema);
  EXPECT_EQ(fpt_from_json(json::parse(dump(j))), fpt);
}

TEST(FptJsonTest, RejectsWrongSchemaAndBrokenCounts) {
  const Fpt fpt = build_fpt(sample_corpus());
  json j = to_json(fpt);
  j["schema"] = kHmmSchema;
  EXPECT_THROW(fpt_from_json(j), SchemaError);
  EXPECT_THROW(fpt_from_json(json::array()), SchemaError);

  j = to_json(fpt);
  j["nodes"][1]["sequence_ends"] = j["nodes"][1]["sequence_ends"].get<Count>() + 5;
  expect_invariant<Fpt>([&] { return fpt_from_json(j); }, "flow-conservation");
}

TEST(AutomatonJsonTest, RoundTripKeepsProvenance) {
  gi::GiConfig cfg;
  cfg.alpha = 0.2;
  cfg.mode = gi::Mode::full;
  const auto fa = gi::relaxed_alergia(build_fpt(sample_corpus()), cfg);
  const auto back = automaton_from_json(json::parse(dump(to_json(fa))));
  EXPECT_EQ(static_cast<const FrequencyGraph&>(back), static_cast<const FrequencyGraph&>(fa));
  EXPECT_EQ(back.provenance.alpha, 0.2);
  EXPECT_EQ(back.provenance.mode, gi::Mode::full);
  EXPECT_EQ(back.provenance.merges, fa.provenance.merges);
}

TEST(AutomatonJsonTest, RejectsDanglingArc) {
  const auto fa = gi::relaxed_alergia(build_fpt(sample_corpus()), gi::GiConfig{});
  json j = to_json(fa);
  j["arcs"][0]["to"] = 999;
  EXPECT_THROW(automaton_from_json(j), InvariantError);
}

TEST(StochasticJsonTest, RoundTripIsExact) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sa = oracle::random_automaton(rng, 5, 4);
    const auto back = stochastic_from_json(json::parse(dump(to_json(sa))));
    ASSERT_EQ(back.size(), sa.size());
    for (NodeId s = 0; s < static_cast<NodeId>(sa.size()); ++s) {
      EXPECT_EQ(back.state(s).termination, sa.state(s).termination);
      ASSERT_EQ(back.state(s).arcs.size(), sa.state(s).arcs.size());
      for (const auto& [a, arc] : sa.state(s).arcs) {
        EXPECT_EQ(back.state(s).arcs.at(a).probability, arc.probability);
        EXPECT_EQ(back.state(s).arcs.at(a).target, arc.target);
      }
    }
  }
}

TEST(StochasticJsonTest, RejectsUnnormalizedState) {
  std::mt19937_64 rng(109);
  json j = to_json(oracle::random_automaton(rng, 3, 3));
  j["nodes"][0]["termination"] = j["nodes"][0]["termination"].get<double>() + 0.1;
  EXPECT_THROW(stochastic_from_json(j), InvariantError);
}

TEST(HmmJsonTest, RoundTripIsExact) {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 10; ++trial) {
    const Hmm hmm = to_hmm(oracle::random_automaton(rng, 5, 4));
    const json j = to_json(hmm);
    EXPECT_EQ(j.at("schema"), kHmmSchema);
    const Hmm back = hmm_from_json(json::parse(dump(j)));
    EXPECT_EQ(back.alphabet, hmm.alphabet);
    EXPECT_EQ(back.state_of, hmm.state_of);
    EXPECT_EQ(back.initial, hmm.initial);
    EXPECT_EQ(back.emission, hmm.emission);
    EXPECT_EQ(Hmm::Matrix(back.transition), Hmm::Matrix(hmm.transition));
  }
}

TEST(HmmJsonTest, ItemDictionaryIncludesEndMarker) {
  std::mt19937_64 rng(127);
  const json j = to_json(to_hmm(oracle::random_automaton(rng, 3, 2)));
  bool has_end = false;
  for (const auto& item : j.at("items")) {
    if (item.at("id") == kEndMarker) has_end = item.at("label") == "#";
  }
  EXPECT_TRUE(has_end);
}

TEST(HmmJsonTest, RejectsBrokenModels) {
  std::mt19937_64 rng(131);
  const json good = to_json(to_hmm(oracle::random_automaton(rng, 3, 2)));
  json j = good;
  j["schema"] = kFptSchema;
  EXPECT_THROW(hmm_from_json(j), SchemaError);
  j = good;
  j["initial"][0]["p"] = 5.0;
  EXPECT_THROW(hmm_from_json(j), InvariantError);
  j = good;
  j.erase("arcs");
  EXPECT_THROW(hmm_from_json(j), SchemaError);
}

TEST(ReportJsonTest, PredictionIsAnArray) {
  Prediction<double> pred;
  pred.suffixes = {{{1, kEndMarker}, 0.5}, {{2}, 0.25}};
  const json j = to_json(pred);
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j[0].at("suffix"), json::array({1, kEndMarker}));
  EXPECT_EQ(j[1].at("probability"), 0.25);
}

TEST(ReportTest, ValidationCsvAndPlot) {
  eval::ValidationReport report;
  report.rows.push_back({{0, 5}, 0.5, 0.4, 0.2});
  report.rows.push_back({{1, 12}, 0.25, 0.25, 0.0});
  std::ostringstream csv;
  write_validation_csv(csv, report);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "sequence,R,P,APE");
  std::ostringstream plot;
  write_plot_data(plot, report);
  EXPECT_NE(plot.str().find("05"), std::string::npos);
  EXPECT_NE(plot.str().find("1-12"), std::string::npos);
}

TEST(FileTest, AtomicWriteAndRead) {
  const auto dir = std::filesystem::temp_directory_path() / "tourhmm_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.json";
  write_file_atomic(path, "{\"schema\": \"x\"}\n");
  EXPECT_EQ(read_text_file(path), "{\"schema\": \"x\"}\n");
  EXPECT_EQ(read_json_file(path).at("schema"), "x");
  EXPECT_FALSE(std::filesystem::exists(dir / "model.json.tmp"));
  write_file_atomic(path, "not json");
  EXPECT_THROW(read_json_file(path), SchemaError);
  EXPECT_THROW(read_text_file(dir / "missing"), std::runtime_error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace tourhmm::io
