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

#ifndef TOURHMM_TRIE_HPP_
#define TOURHMM_TRIE_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "tourhmm/types.hpp"

namespace tourhmm {

struct FrequencyArc {
  Count frequency = 0;
  NodeId target = 0;

  friend bool operator==(const FrequencyArc&, const FrequencyArc&) = default;
};

// A node carries the number of sequences ending on it and at most one
// outgoing arc per item.
struct FrequencyNode {
  Count sequence_ends = 0;
  std::map<Item, FrequencyArc> arcs;

  Count out_mass() const;
  // Terminations plus outgoing frequency; the denominator used when turning
  // counts into a distribution.
  Count total_mass() const { return sequence_ends + out_mass(); }

  friend bool operator==(const FrequencyNode&, const FrequencyNode&) = default;
};

// Rooted, deterministic graph with integer frequencies. A prefix tree is the
// acyclic special case; state merging produces cycles.
struct FrequencyGraph {
  std::vector<FrequencyNode> nodes;
  NodeId root = 0;
  Count total_sequences = 0;

  std::size_t size() const { return nodes.size(); }
  const FrequencyNode& node(NodeId id) const { return nodes.at(static_cast<std::size_t>(id)); }
  FrequencyNode& node(NodeId id) { return nodes.at(static_cast<std::size_t>(id)); }

  // Sum of frequencies of arcs entering each node.
  std::vector<Count> in_mass() const;

  friend bool operator==(const FrequencyGraph&, const FrequencyGraph&) = default;
};

// Throws InvariantError("flow-conservation") when some node violates
// in (+ total at root) == ends + out, or "determinism"/"dangling-arc" for
// malformed arcs.
void check_conservation(const FrequencyGraph& graph);

// Renumbers reachable nodes breadth-first from the root, visiting arcs in
// item order, and drops unreachable ones. Two isomorphic graphs have equal
// canonical forms.
FrequencyGraph canonicalize(const FrequencyGraph& graph);

// Rooted isomorphism preserving items, frequencies and end counts.
bool isomorphic(const FrequencyGraph& a, const FrequencyGraph& b);

// Frequency prefix tree.
struct Fpt : FrequencyGraph {};

// Inserts every sequence; node ids are breadth-first. Throws
// std::invalid_argument naming the index of any empty sequence.
Fpt build_fpt(std::span<const Sequence> sequences);

struct FptStats {
  std::size_t node_count = 0;
  std::size_t non_null_count = 0;  // nodes with sequence_ends > 0
  std::size_t depth = 0;
  std::size_t alphabet_size = 0;
};

FptStats fpt_stats(const Fpt& fpt);

// Depth of every node from the root; valid for trees.
std::vector<std::size_t> node_depths(const FrequencyGraph& tree);

}  // namespace tourhmm

#endif  // TOURHMM_TRIE_HPP_
