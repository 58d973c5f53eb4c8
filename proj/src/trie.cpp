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

#include "tourhmm/trie.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

namespace tourhmm {

Count FrequencyNode::out_mass() const {
  Count total = 0;
  for (const auto& [item, arc] : arcs) total += arc.frequency;
  return total;
}

std::vector<Count> FrequencyGraph::in_mass() const {
  std::vector<Count> in(nodes.size(), 0);
  for (const auto& n : nodes) {
    for (const auto& [item, arc] : n.arcs) in[static_cast<std::size_t>(arc.target)] += arc.frequency;
  }
  return in;
}

void check_conservation(const FrequencyGraph& graph) {
  const auto n = static_cast<NodeId>(graph.size());
  if (graph.root < 0 || graph.root >= n) {
    throw InvariantError("rooted", "root id out of range");
  }
  for (NodeId id = 0; id < n; ++id) {
    for (const auto& [item, arc] : graph.node(id).arcs) {
      if (arc.target < 0 || arc.target >= n) {
        throw InvariantError("dangling-arc", "node " + std::to_string(id) +
                                                 " item " + std::to_string(item));
      }
      if (arc.frequency <= 0 || item < 0) {
        throw InvariantError("positive-frequency", "node " + std::to_string(id));
      }
    }
  }
  const auto in = graph.in_mass();
  for (NodeId id = 0; id < n; ++id) {
    Count incoming = in[static_cast<std::size_t>(id)];
    if (id == graph.root) incoming += graph.total_sequences;
    const auto& node = graph.node(id);
    if (node.sequence_ends < 0 || incoming != node.total_mass()) {
      throw InvariantError("flow-conservation",
                           "node " + std::to_string(id) + ": in " +
                               std::to_string(incoming) + " != ends + out " +
                               std::to_string(node.total_mass()));
    }
  }
}

FrequencyGraph canonicalize(const FrequencyGraph& graph) {
  std::vector<NodeId> new_id(graph.size(), -1);
  std::vector<NodeId> order;
  std::deque<NodeId> queue{graph.root};
  new_id[static_cast<std::size_t>(graph.root)] = 0;
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    order.push_back(id);
    for (const auto& [item, arc] : graph.node(id).arcs) {
      auto& slot = new_id[static_cast<std::size_t>(arc.target)];
      if (slot < 0) {
        slot = static_cast<NodeId>(order.size() + queue.size());
        queue.push_back(arc.target);
      }
    }
  }
  FrequencyGraph out;
  out.root = 0;
  out.total_sequences = graph.total_sequences;
  out.nodes.reserve(order.size());
  for (NodeId old : order) {
    FrequencyNode node;
    node.sequence_ends = graph.node(old).sequence_ends;
    for (const auto& [item, arc] : graph.node(old).arcs) {
      node.arcs[item] = {arc.frequency, new_id[static_cast<std::size_t>(arc.target)]};
    }
    out.nodes.push_back(std::move(node));
  }
  return out;
}

bool isomorphic(const FrequencyGraph& a, const FrequencyGraph& b) {
  // Deterministic rooted graphs: the item-labelled BFS fixes the bijection.
  return canonicalize(a) == canonicalize(b);
}

Fpt build_fpt(std::span<const Sequence> sequences) {
  FrequencyGraph tree;
  tree.nodes.emplace_back();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const auto& seq = sequences[i];
    if (seq.empty()) {
      throw std::invalid_argument("empty sequence at index " + std::to_string(i));
    }
    NodeId current = tree.root;
    for (Item item : seq) {
      if (item < 0) {
        throw std::invalid_argument("negative item in sequence " + std::to_string(i));
      }
      auto& arcs = tree.node(current).arcs;
      auto it = arcs.find(item);
      if (it == arcs.end()) {
        const auto child = static_cast<NodeId>(tree.nodes.size());
        arcs.emplace(item, FrequencyArc{1, child});
        tree.nodes.emplace_back();  // invalidates `arcs`
        current = child;
      } else {
        ++it->second.frequency;
        current = it->second.target;
      }
    }
    ++tree.node(current).sequence_ends;
    ++tree.total_sequences;
  }
  Fpt fpt;
  static_cast<FrequencyGraph&>(fpt) = canonicalize(tree);
  return fpt;
}

std::vector<std::size_t> node_depths(const FrequencyGraph& tree) {
  std::vector<std::size_t> depth(tree.size(), 0);
  std::vector<bool> seen(tree.size(), false);
  std::deque<NodeId> queue{tree.root};
  seen[static_cast<std::size_t>(tree.root)] = true;
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    for (const auto& [item, arc] : tree.node(id).arcs) {
      const auto t = static_cast<std::size_t>(arc.target);
      if (seen[t]) continue;
      seen[t] = true;
      depth[t] = depth[static_cast<std::size_t>(id)] + 1;
      queue.push_back(arc.target);
    }
  }
  return depth;
}

FptStats fpt_stats(const Fpt& fpt) {
  FptStats stats;
  stats.node_count = fpt.size();
  std::set<Item> alphabet;
  for (const auto& node : fpt.nodes) {
    if (node.sequence_ends > 0) ++stats.non_null_count;
    for (const auto& [item, arc] : node.arcs) alphabet.insert(item);
  }
  stats.alphabet_size = alphabet.size();
  const auto depth = node_depths(fpt);
  stats.depth = depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
  return stats;
}

}  // namespace tourhmm
