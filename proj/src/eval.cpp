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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "tourhmm/gi.hpp"
#include "tourhmm/hmm_ops.hpp"

namespace tourhmm::eval {

double ape(double empirical, double model) {
  if (!(empirical > 0.0)) {
    throw std::domain_error("ape: empirical probability must be positive");
  }
  return std::abs(empirical - model) / empirical;
}

double empirical_probability(std::span<const Sequence> sequences, const Sequence& s) {
  if (sequences.empty()) return 0.0;
  const auto hits = std::count(sequences.begin(), sequences.end(), s);
  return static_cast<double>(hits) / static_cast<double>(sequences.size());
}

ValidationScope ValidationScope::parse(const std::string& text) {
  if (text == "all") return all();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const std::size_t value = std::stoul(text.substr(colon + 1));
    if (kind == "length") return of_length(value);
    if (kind == "top") return top(value);
  }
  throw std::invalid_argument("bad validation scope '" + text +
                              "' (expected all, length:N or top:N)");
}

std::string ValidationScope::to_string() const {
  switch (kind) {
    case Kind::all:
      return "all";
    case Kind::top:
      return "top:" + std::to_string(value);
    case Kind::length:
      break;
  }
  return "length:" + std::to_string(value);
}

ValidationReport validate(const Hmm& hmm, std::span<const Sequence> sequences,
                          const ValidationScope& scope) {
  auto distinct = count_distinct(sequences);
  if (scope.kind == ValidationScope::Kind::length) {
    std::erase_if(distinct, [&](const auto& e) { return e.first.size() != scope.value; });
  } else if (scope.kind == ValidationScope::Kind::top && distinct.size() > scope.value) {
    std::stable_sort(distinct.begin(), distinct.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    distinct.resize(scope.value);
    std::sort(distinct.begin(), distinct.end());
  }

  ValidationReport report;
  const auto total = static_cast<double>(sequences.size());
  double sum = 0.0;
  for (const auto& [seq, count] : distinct) {
    ValidationRow row;
    row.sequence = seq;
    row.empirical = static_cast<double>(count) / total;
    row.model = forward(hmm, std::span<const Item>(seq));
    row.ape = ape(row.empirical, row.model);
    if (!(row.model > 0.0)) report.anomalies.push_back(seq);
    sum += row.ape;
    report.rows.push_back(std::move(row));
  }
  if (!report.rows.empty()) {
    report.mape = sum / static_cast<double>(report.rows.size());
    auto [lo, hi] = std::minmax_element(
        report.rows.begin(), report.rows.end(),
        [](const ValidationRow& a, const ValidationRow& b) { return a.ape < b.ape; });
    report.min_ape = lo->ape;
    report.max_ape = hi->ape;
  }
  return report;
}

void UpdateConfig::validate() const {
  if (!(mape_threshold > 0.0)) throw std::invalid_argument("mape_threshold must be > 0");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
}

namespace {

// Log-likelihood over the observable sequences, as Baum-Welch reports it.
double corpus_log_likelihood(const Hmm& hmm, std::span<const Sequence> sequences) {
  double total = 0.0;
  for (const auto& [seq, count] : count_distinct(sequences)) {
    const double lp = forward_log(hmm, std::span<const Item>(seq)).log_probability;
    if (std::isfinite(lp)) total += static_cast<double>(count) * lp;
  }
  return total;
}

}  // namespace

UpdateResult update_until(const Hmm& hmm, std::span<const Sequence> sequences,
                          const UpdateConfig& cfg) {
  cfg.validate();
  UpdateResult result;
  result.model = hmm;
  double mape = validate(result.model, sequences, cfg.scope).mape;
  result.mape.push_back(mape);
  result.log_likelihood.push_back(corpus_log_likelihood(result.model, sequences));
  while (!(mape < cfg.mape_threshold) && result.iterations < cfg.max_iters) {
    auto step = baum_welch_update(result.model, sequences, 1);
    result.log_likelihood.push_back(step.log_likelihood.back());
    result.excluded = step.excluded;
    result.model = std::move(step.model);
    ++result.iterations;
    mape = validate(result.model, sequences, cfg.scope).mape;
    result.mape.push_back(mape);
  }
  result.converged = mape < cfg.mape_threshold;
  return result;
}

std::vector<RelaxationGroup> RelaxationReport::anomalies() const {
  std::vector<RelaxationGroup> out;
  std::copy_if(groups.begin(), groups.end(), std::back_inserter(out),
               [](const RelaxationGroup& g) { return g.anomaly; });
  return out;
}

RelaxationReport check_relaxation_validity(const Fpt& fpt, double bound, Count min_support) {
  const auto depth = node_depths(fpt);
  std::map<std::pair<std::size_t, Item>, RelaxationGroup> groups;
  for (std::size_t id = 0; id < fpt.size(); ++id) {
    const auto& node = fpt.nodes[id];
    const Count out = node.out_mass();
    if (out == 0 || out < min_support) continue;
    for (const auto& [item, arc] : node.arcs) {
      const double rf = static_cast<double>(arc.frequency) / static_cast<double>(out);
      auto [it, fresh] = groups.try_emplace({depth[id], item});
      auto& g = it->second;
      if (fresh) {
        g.item = item;
        g.depth = depth[id];
        g.min_relative_frequency = g.max_relative_frequency = rf;
      }
      ++g.arcs;
      g.min_relative_frequency = std::min(g.min_relative_frequency, rf);
      g.max_relative_frequency = std::max(g.max_relative_frequency, rf);
    }
  }
  RelaxationReport report;
  report.bound = bound;
  for (auto& [key, g] : groups) {
    g.variation = g.max_relative_frequency - g.min_relative_frequency;
    g.anomaly = g.variation > bound;
    report.max_variation = std::max(report.max_variation, g.variation);
    report.groups.push_back(g);
  }
  return report;
}

namespace {

StochasticAutomaton automaton_from(
    const std::vector<std::pair<double, std::vector<std::tuple<Item, double, NodeId>>>>& states) {
  StochasticAutomaton sa;
  for (const auto& [term, arcs] : states) {
    StochasticState state;
    state.termination = term;
    for (const auto& [item, p, to] : arcs) state.arcs[item] = {p, to};
    sa.states.push_back(std::move(state));
  }
  check_invariants(sa);
  return sa;
}

}  // namespace

SyntheticModel five_state_model(std::uint64_t seed) {
  return {automaton_from({
              {0.00, {{0, 0.30, 1}, {1, 0.25, 2}, {2, 0.25, 3}, {5, 0.20, 4}}},
              {0.30, {{2, 0.30, 3}, {5, 0.40, 4}}},
              {0.35, {{2, 0.35, 3}, {3, 0.30, 4}}},
              {0.40, {{4, 0.25, 2}, {5, 0.35, 4}}},
              {0.50, {{0, 0.25, 1}, {1, 0.25, 2}}},
          }),
          seed};
}

SyntheticModel markov_chain_model(std::uint64_t seed) {
  // State k + 1 is "last item was k".
  return {automaton_from({
              {0.00, {{0, 0.5, 1}, {1, 0.3, 2}, {2, 0.2, 3}}},
              {0.30, {{1, 0.5, 2}, {2, 0.2, 3}}},
              {0.40, {{0, 0.4, 1}, {2, 0.2, 3}}},
              {0.60, {{0, 0.2, 1}, {1, 0.2, 2}}},
          }),
          seed};
}

std::vector<Sequence> generate_sequences(const StochasticAutomaton& model, std::size_t n,
                                         std::uint64_t seed, std::size_t max_length) {
  if (n < 1) throw std::invalid_argument("generate_sequences: n must be >= 1");
  check_invariants(model);
  std::mt19937_64 rng(seed);
  // 53 random bits; the standard distributions are not portable bit-for-bit.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<Sequence> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Sequence seq;
    NodeId state = model.root;
    while (seq.size() < max_length) {
      const auto& st = model.state(state);
      double u = uniform();
      if (u < st.termination) break;
      u -= st.termination;
      const std::pair<const Item, StochasticArc>* chosen = nullptr;
      for (const auto& entry : st.arcs) {
        chosen = &entry;
        if (u < entry.second.probability) break;
        u -= entry.second.probability;
      }
      if (chosen == nullptr) break;
      seq.push_back(chosen->first);
      state = chosen->second.target;
    }
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace tourhmm::eval
