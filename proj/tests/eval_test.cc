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

#include "tourhmm/eval.hpp"

#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"
#include "tourhmm/hmm_ops.hpp"

namespace tourhmm::eval {
namespace {

std::vector<Sequence> non_empty(std::vector<Sequence> corpus) {
  std::erase_if(corpus, [](const Sequence& s) { return s.empty(); });
  return corpus;
}

Hmm prefix_tree_model(const std::vector<Sequence>& corpus) {
  gi::GiConfig cfg;
  cfg.force_no_merge = true;
  return to_hmm(normalize(gi::relaxed_alergia(build_fpt(corpus), cfg)));
}

TEST(ApeTest, Examples) {
  EXPECT_DOUBLE_EQ(ape(0.5, 0.4), 0.2);
  EXPECT_DOUBLE_EQ(ape(0.25, 0.5), 1.0);
  EXPECT_EQ(ape(0.1, 0.1), 0.0);
  EXPECT_EQ(ape(0.1, 0.0), 1.0);
  EXPECT_THROW(ape(0.0, 0.1), std::domain_error);
  EXPECT_THROW(ape(-0.1, 0.1), std::domain_error);
}

TEST(ApeTest, ScaleInvariant) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(1e-4, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double r = u(rng);
    const double p = u(rng);
    const double c = u(rng) * 10.0;
    EXPECT_NEAR(ape(c * r, c * p), ape(r, p), 1e-12);
  }
}

TEST(EmpiricalTest, CountsExactMatches) {
  const std::vector<Sequence> corpus = {{1, 2}, {1}, {1, 2}, {2, 1}};
  EXPECT_DOUBLE_EQ(empirical_probability(corpus, {1, 2}), 0.5);
  EXPECT_DOUBLE_EQ(empirical_probability(corpus, {1}), 0.25);
  EXPECT_EQ(empirical_probability(corpus, {3}), 0.0);
  EXPECT_EQ(empirical_probability({}, {1}), 0.0);
}

TEST(ScopeTest, ParseAndPrint) {
  EXPECT_EQ(ValidationScope::parse("length:3").to_string(), "length:3");
  EXPECT_EQ(ValidationScope::parse("all").kind, ValidationScope::Kind::all);
  EXPECT_EQ(ValidationScope::parse("top:20").value, 20u);
  EXPECT_EQ(ValidationScope{}.to_string(), "length:2");
  EXPECT_THROW(ValidationScope::parse("most"), std::invalid_argument);
  EXPECT_THROW(ValidationScope::parse("width:3"), std::invalid_argument);
}

TEST(ValidateTest, PrefixTreeModelIsExact) {
  const auto corpus = non_empty(generate_sequences(five_state_model(), 4000));
  const Hmm hmm = prefix_tree_model(corpus);
  for (const auto& scope : {ValidationScope::all(), ValidationScope::of_length(2), ValidationScope::top(10)}) {
    const auto report = validate(hmm, corpus, scope);
    EXPECT_FALSE(report.rows.empty());
    EXPECT_LT(report.mape, 1e-9);
    EXPECT_TRUE(report.anomalies.empty());
    for (const auto& row : report.rows) {
      EXPECT_DOUBLE_EQ(row.empirical, empirical_probability(corpus, row.sequence));
    }
  }
  EXPECT_EQ(validate(hmm, corpus, ValidationScope::top(10)).rows.size(), 10u);
}

TEST(ValidateTest, ScopeSelectsLengths) {
  const std::vector<Sequence> corpus = {{1}, {1, 2}, {1, 2}, {2, 1}, {1, 2, 3}};
  const Hmm hmm = prefix_tree_model(corpus);
  const auto report = validate(hmm, corpus, ValidationScope::of_length(2));
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0].sequence, (Sequence{1, 2}));
  EXPECT_DOUBLE_EQ(report.rows[0].empirical, 0.4);
  EXPECT_TRUE(validate(hmm, corpus, ValidationScope::of_length(7)).rows.empty());
}

TEST(ValidateTest, UnobservableSequencesAreAnomalies) {
  const std::vector<Sequence> train = {{1, 2}, {1}};
  const std::vector<Sequence> test = {{1, 2}, {2, 2}};
  const auto report = validate(prefix_tree_model(train), test, ValidationScope::all());
  ASSERT_EQ(report.anomalies.size(), 1u);
  EXPECT_EQ(report.anomalies[0], (Sequence{2, 2}));
  EXPECT_DOUBLE_EQ(report.max_ape, 1.0);
  EXPECT_DOUBLE_EQ(report.min_ape, 0.0);
}

TEST(UpdateTest, NoIterationsWhenAlreadyBelowThreshold) {
  const auto corpus = non_empty(generate_sequences(five_state_model(), 2000));
  const auto result = update_until(prefix_tree_model(corpus), corpus, UpdateConfig{});
  EXPECT_EQ(result.iterations, 0);
  EXPECT_TRUE(result.converged);
  EXPECT_EQ(result.mape.size(), 1u);
  EXPECT_EQ(result.log_likelihood.size(), 1u);
}

TEST(UpdateTest, TrajectoryFromMergedModel) {
  const auto corpus = non_empty(generate_sequences(five_state_model(), 5000));
  const Hmm merged = to_hmm(normalize(gi::relaxed_alergia(build_fpt(corpus), gi::GiConfig{})));
  UpdateConfig cfg;
  cfg.mape_threshold = 1e-12;
  cfg.max_iters = 5;
  cfg.scope = ValidationScope::top(20);
  const auto result = update_until(merged, corpus, cfg);
  EXPECT_EQ(result.iterations, 5);
  EXPECT_FALSE(result.converged);
  ASSERT_EQ(result.mape.size(), 6u);
  ASSERT_EQ(result.log_likelihood.size(), 6u);
  for (std::size_t i = 1; i < result.log_likelihood.size(); ++i) {
    EXPECT_GE(result.log_likelihood[i], result.log_likelihood[i - 1] - 1e-9);
  }
  EXPECT_NO_THROW(check_invariants(result.model));
  EXPECT_NEAR(result.mape.front(), validate(merged, corpus, cfg.scope).mape, 1e-15);
}

TEST(UpdateTest, RejectsBadConfig) {
  UpdateConfig cfg;
  cfg.mape_threshold = 0.0;
  const std::vector<Sequence> corpus = {{1}};
  EXPECT_THROW(update_until(prefix_tree_model(corpus), corpus, cfg), std::invalid_argument);
}

TEST(RelaxationTest, UniformCorpusHasNoVariation) {
  std::vector<Sequence> corpus;
  for (int rep = 0; rep < 10; ++rep) {
    for (Item a = 0; a < 3; ++a) {
      for (Item b = 0; b < 3; ++b) corpus.push_back({a, b});
    }
  }
  const auto report = check_relaxation_validity(build_fpt(corpus));
  EXPECT_EQ(report.max_variation, 0.0);
  EXPECT_TRUE(report.anomalies().empty());
  EXPECT_EQ(report.groups.size(), 6u);  // 3 items at depth 0, 3 at depth 1
}

TEST(RelaxationTest, PlantedSkewIsFlagged) {
  std::vector<Sequence> corpus;
  auto add = [&corpus](Sequence s, int n) {
    for (int i = 0; i < n; ++i) corpus.push_back(s);
  };
  for (Item a = 0; a < 2; ++a) {
    for (Item b = 0; b < 3; ++b) add({a, b}, 100);
  }
  add({2, 0}, 130);
  add({2, 1}, 85);
  add({2, 2}, 85);
  const auto report = check_relaxation_validity(build_fpt(corpus));
  const auto flagged = report.anomalies();
  ASSERT_EQ(flagged.size(), 1u);
  EXPECT_EQ(flagged[0].item, 0);
  EXPECT_EQ(flagged[0].depth, 1u);
  EXPECT_EQ(flagged[0].arcs, 3u);
  EXPECT_NEAR(flagged[0].variation, 130.0 / 300.0 - 1.0 / 3.0, 1e-12);
  EXPECT_TRUE(check_relaxation_validity(build_fpt(corpus), 0.2).anomalies().empty());
}

TEST(RelaxationTest, MinSupportDropsSparseNodes) {
  std::vector<Sequence> corpus(50, Sequence{0, 0});
  corpus.push_back({1, 1});
  EXPECT_EQ(check_relaxation_validity(build_fpt(corpus), 0.08, 1).groups.size(), 4u);
  EXPECT_EQ(check_relaxation_validity(build_fpt(corpus), 0.08, 10).groups.size(), 3u);
}

TEST(GeneratorTest, SameSeedSameCorpus) {
  const auto a = generate_sequences(five_state_model(), 500);
  const auto b = generate_sequences(five_state_model(), 500);
  EXPECT_EQ(a, b);
  const auto c = generate_sequences(five_state_model().automaton, 500, 2022);
  EXPECT_NE(a, c);
}

TEST(GeneratorTest, SingleItemModel) {
  StochasticAutomaton sa;
  sa.states.resize(2);
  sa.states[0].arcs[1] = {1.0, 1};
  sa.states[1].termination = 1.0;
  for (const auto& s : generate_sequences(sa, 100, 3)) EXPECT_EQ(s, (Sequence{1}));
}

TEST(GeneratorTest, LengthCap) {
  StochasticAutomaton sa;
  sa.states.resize(1);
  sa.states[0].arcs[0] = {1.0, 0};
  for (const auto& s : generate_sequences(sa, 5, 3, 17)) EXPECT_EQ(s.size(), 17u);
  EXPECT_THROW(generate_sequences(sa, 0, 3), std::invalid_argument);
}

TEST(GeneratorTest, MatchesModelFrequencies) {
  const auto model = five_state_model();
  const std::size_t n = 100000;
  const auto corpus = generate_sequences(model, n);
  // Outcomes: first item, and (first, second) pairs, each a multinomial cell.
  std::map<Sequence, double> expected;
  const auto& root = model.automaton.state(0);
  for (const auto& [a, arc] : root.arcs) {
    expected[{a}] = arc.probability;
    const auto& next = model.automaton.state(arc.target);
    expected[{a, kEndMarker}] = arc.probability * next.termination;
  }
  std::map<Sequence, double> seen;
  for (const auto& s : corpus) {
    ASSERT_FALSE(s.empty());
    seen[{s[0]}] += 1;
    if (s.size() == 1) seen[{s[0], kEndMarker}] += 1;
  }
  for (const auto& [cell, p] : expected) {
    const double sigma = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    EXPECT_NEAR(seen[cell], static_cast<double>(n) * p, 3.0 * sigma) << to_string(cell);
  }
}

}  // namespace
}  // namespace tourhmm::eval
