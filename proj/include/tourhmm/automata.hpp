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

#ifndef TOURHMM_AUTOMATA_HPP_
#define TOURHMM_AUTOMATA_HPP_

#include <map>
#include <vector>

#include "tourhmm/gi.hpp"
#include "tourhmm/hmm.hpp"
#include "tourhmm/types.hpp"

namespace tourhmm {

struct StochasticArc {
  double probability = 0.0;
  NodeId target = 0;
};

struct StochasticState {
  double termination = 0.0;
  std::map<Item, StochasticArc> arcs;
};

// Deterministic probabilistic automaton: per state, outgoing arc
// probabilities plus the termination probability sum to one.
struct StochasticAutomaton {
  std::vector<StochasticState> states;
  NodeId root = 0;

  std::size_t size() const { return states.size(); }
  const StochasticState& state(NodeId id) const { return states.at(static_cast<std::size_t>(id)); }
  StochasticState& state(NodeId id) { return states.at(static_cast<std::size_t>(id)); }
};

// Throws InvariantError("stochastic-normalization" / "probability-range" /
// "dangling-arc") on a malformed automaton.
void check_invariants(const StochasticAutomaton& sa, double tol = 1e-9);

// Divides every count by the node's ends + outgoing frequency. Throws
// InvariantError("zero-mass") naming a node with no mass at all.
StochasticAutomaton normalize(const FrequencyGraph& fa);

// Multiplies probabilities back by the given per-node masses.
FrequencyGraph denormalize(const StochasticAutomaton& sa,
                           const std::vector<Count>& node_mass,
                           Count total_sequences);

// Probability that the automaton generates exactly `w` and then stops.
double string_probability(const StochasticAutomaton& sa, const Sequence& w);

// Transition-splitting realisation of the automaton as an HMM: one node per
// (state, incoming item) emitting that item, plus one absorbing end node per
// state that can stop. Preserves Pr(w then end) for every string w.
Hmm to_hmm(const StochasticAutomaton& sa);

}  // namespace tourhmm

#endif  // TOURHMM_AUTOMATA_HPP_
