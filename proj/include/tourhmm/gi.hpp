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

#ifndef TOURHMM_GI_HPP_
#define TOURHMM_GI_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "tourhmm/trie.hpp"
#include "tourhmm/types.hpp"

namespace tourhmm::gi {

enum class Mode { relaxed, full };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct GiConfig {
  // Hoeffding confidence parameter, 0 < alpha < 1.
  double alpha = 0.05;
  Mode mode = Mode::relaxed;
  // Also compare termination ratios, and use ends + out as the ratio
  // denominator. Off means the literal outgoing-only denominator and no
  // termination test.
  bool include_termination = true;
  // Promote every BLUE node; the output is the input tree.
  bool force_no_merge = false;

  void validate() const;
};

struct Provenance {
  double alpha = 0.05;
  Mode mode = Mode::relaxed;
  bool include_termination = true;
  bool force_no_merge = false;
  std::size_t merges = 0;
  std::size_t promotions = 0;
};

// Output of state merging. May contain cycles.
struct FrequencyAutomaton : FrequencyGraph {
  Provenance provenance;
};

// Arc frequency over the sum of the node's outgoing frequencies; 0 for an
// absent item. Throws std::domain_error when the node has neither outgoing
// arcs nor terminations.
double relative_frequency_arc(const FrequencyGraph& graph, NodeId node, Item item);

struct NodeRatio {
  double value = 0.0;
  bool zero_denominator = false;
};

// sequence_ends over ingoing frequency (outgoing frequency for the root).
NodeRatio relative_frequency_node(const FrequencyGraph& graph, NodeId node);

// Width of the Hoeffding acceptance region for two ratios.
double hoeffding_bound(Count n1, Count n2, double alpha);

// |f1/n1 - f2/n2| <= sqrt(ln(2/alpha) / 2) * (1/sqrt(n1) + 1/sqrt(n2)).
bool hoeffding_compatible(Count f1, Count n1, Count f2, Count n2, double alpha);

// Statistical compatibility of two nodes: one level in relaxed mode,
// recursively over shared items in full mode.
bool compatible(const FrequencyGraph& graph, NodeId red, NodeId blue,
                const GiConfig& cfg);

// Redirects the arc `parent --item--> blue` to `red`, adds blue's ends to
// red's and folds blue's children into red's. Nodes absorbed by the fold are
// left unreachable; canonicalize() drops them.
void merge(FrequencyGraph& graph, NodeId parent, Item item, NodeId red, NodeId blue);

// Recursively adds blue's outgoing arcs into red's: matching items add
// frequencies and fold the children (including their end counts), missing
// items are attached unchanged.
void fold(FrequencyGraph& graph, NodeId red, NodeId blue);

// RED/BLUE state merging over a prefix tree.
FrequencyAutomaton relaxed_alergia(const Fpt& fpt, const GiConfig& cfg);

}  // namespace tourhmm::gi

#endif  // TOURHMM_GI_HPP_
