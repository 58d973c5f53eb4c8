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

#include "tourhmm/automata.hpp"

#include <cmath>
#include <set>
#include <string>

namespace tourhmm {

void check_invariants(const StochasticAutomaton& sa, double tol) {
  const auto n = static_cast<NodeId>(sa.size());
  if (sa.root < 0 || sa.root >= n) throw InvariantError("rooted", "root id out of range");
  for (NodeId id = 0; id < n; ++id) {
    const auto& s = sa.state(id);
    double total = s.termination;
    if (s.termination < 0.0 || s.termination > 1.0 + tol) {
      throw InvariantError("probability-range", "termination of state " + std::to_string(id));
    }
    for (const auto& [item, arc] : s.arcs) {
      if (arc.target < 0 || arc.target >= n || item < 0) {
        throw InvariantError("dangling-arc", "state " + std::to_string(id));
      }
      if (arc.probability < 0.0 || arc.probability > 1.0 + tol) {
        throw InvariantError("probability-range", "arc of state " + std::to_string(id));
      }
      total += arc.probability;
    }
    if (std::abs(total - 1.0) > tol) {
      throw InvariantError("stochastic-normalization",
                           "state " + std::to_string(id) + " sums to " + std::to_string(total));
    }
  }
}

StochasticAutomaton normalize(const FrequencyGraph& fa) {
  StochasticAutomaton sa;
  sa.root = fa.root;
  sa.states.resize(fa.size());
  for (std::size_t id = 0; id < fa.size(); ++id) {
    const auto& node = fa.nodes[id];
    const Count mass = node.total_mass();
    if (mass <= 0) {
      throw InvariantError("zero-mass", "node " + std::to_string(id) +
                                            " has no terminations and no outgoing arcs");
    }
    const auto denom = static_cast<double>(mass);
    auto& state = sa.states[id];
    state.termination = static_cast<double>(node.sequence_ends) / denom;
    for (const auto& [item, arc] : node.arcs) {
      state.arcs[item] = {static_cast<double>(arc.frequency) / denom, arc.target};
    }
  }
  return sa;
}

FrequencyGraph denormalize(const StochasticAutomaton& sa,
                           const std::vector<Count>& node_mass,
                           Count total_sequences) {
  if (node_mass.size() != sa.size()) {
    throw std::invalid_argument("denormalize: one mass per state required");
  }
  FrequencyGraph out;
  out.root = sa.root;
  out.total_sequences = total_sequences;
  out.nodes.resize(sa.size());
  for (std::size_t id = 0; id < sa.size(); ++id) {
    const auto mass = static_cast<double>(node_mass[id]);
    out.nodes[id].sequence_ends = std::llround(sa.states[id].termination * mass);
    for (const auto& [item, arc] : sa.states[id].arcs) {
      out.nodes[id].arcs[item] = {std::llround(arc.probability * mass), arc.target};
    }
  }
  return out;
}

double string_probability(const StochasticAutomaton& sa, const Sequence& w) {
  NodeId current = sa.root;
  double p = 1.0;
  for (Item item : w) {
    const auto& arcs = sa.state(current).arcs;
    auto it = arcs.find(item);
    if (it == arcs.end()) return 0.0;
    p *= it->second.probability;
    current = it->second.target;
  }
  return p * sa.state(current).termination;
}

Hmm to_hmm(const StochasticAutomaton& sa) {
  check_invariants(sa);
  const std::size_t n_states = sa.size();

  std::set<Item> items;
  std::vector<std::set<Item>> incoming(n_states);
  for (const auto& state : sa.states) {
    for (const auto& [item, arc] : state.arcs) {
      items.insert(item);
      incoming[static_cast<std::size_t>(arc.target)].insert(item);
    }
  }

  Hmm hmm;
  hmm.alphabet.assign(items.begin(), items.end());

  // Node layout: per state, its item nodes in item order, then its end node.
  std::vector<std::map<Item, Eigen::Index>> item_node(n_states);
  std::vector<Eigen::Index> end_node(n_states, -1);
  std::vector<std::optional<Item>> emits;
  for (std::size_t q = 0; q < n_states; ++q) {
    for (Item item : incoming[q]) {
      item_node[q][item] = static_cast<Eigen::Index>(emits.size());
      emits.emplace_back(item);
      hmm.state_of.push_back(static_cast<NodeId>(q));
    }
    if (sa.states[q].termination > 0.0) {
      end_node[q] = static_cast<Eigen::Index>(emits.size());
      emits.emplace_back(std::nullopt);
      hmm.state_of.push_back(static_cast<NodeId>(q));
    }
  }
  const auto n = static_cast<Eigen::Index>(emits.size());

  hmm.emission = Hmm::Matrix::Zero(n, hmm.end_column() + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = emits[static_cast<std::size_t>(i)];
    hmm.emission(i, e ? *hmm.column_of(*e) : hmm.end_column()) = 1.0;
  }

  // Jumps out of anything projected on state q.
  auto jumps_from = [&](std::size_t q) {
    std::vector<std::pair<Eigen::Index, double>> out;
    for (const auto& [item, arc] : sa.states[q].arcs) {
      if (arc.probability > 0.0) {
        out.emplace_back(item_node[static_cast<std::size_t>(arc.target)].at(item),
                         arc.probability);
      }
    }
    if (end_node[q] >= 0) out.emplace_back(end_node[q], sa.states[q].termination);
    return out;
  };

  hmm.initial = Hmm::Vector::Zero(n);
  for (const auto& [j, p] : jumps_from(static_cast<std::size_t>(sa.root))) {
    hmm.initial(j) += p;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!emits[static_cast<std::size_t>(i)]) continue;  // absorbing end node
    const auto q = static_cast<std::size_t>(hmm.state_of[static_cast<std::size_t>(i)]);
    for (const auto& [j, p] : jumps_from(q)) triplets.emplace_back(i, j, p);
  }
  hmm.transition.resize(n, n);
  hmm.transition.setFromTriplets(triplets.begin(), triplets.end());
  hmm.transition.makeCompressed();
  return hmm;
}

}  // namespace tourhmm
