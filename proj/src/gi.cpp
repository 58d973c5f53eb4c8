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

#include "tourhmm/gi.hpp"

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace tourhmm::gi {

std::string to_string(Mode mode) {
  return mode == Mode::relaxed ? "relaxed" : "full";
}

Mode parse_mode(const std::string& text) {
  if (text == "relaxed") return Mode::relaxed;
  if (text == "full") return Mode::full;
  throw std::invalid_argument("unknown mode '" + text + "' (expected relaxed|full)");
}

void GiConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
}

double relative_frequency_arc(const FrequencyGraph& graph, NodeId node, Item item) {
  const auto& n = graph.node(node);
  const Count out = n.out_mass();
  if (out == 0) {
    if (n.sequence_ends == 0) {
      throw std::domain_error("node " + std::to_string(node) +
                              " has no outgoing arcs and no terminations");
    }
    return 0.0;
  }
  auto it = n.arcs.find(item);
  if (it == n.arcs.end()) return 0.0;
  return static_cast<double>(it->second.frequency) / static_cast<double>(out);
}

NodeRatio relative_frequency_node(const FrequencyGraph& graph, NodeId node) {
  Count denominator = 0;
  if (node == graph.root) {
    denominator = graph.node(node).out_mass();
  } else {
    denominator = graph.in_mass()[static_cast<std::size_t>(node)];
  }
  if (denominator == 0) return {0.0, true};
  return {static_cast<double>(graph.node(node).sequence_ends) /
              static_cast<double>(denominator),
          false};
}

double hoeffding_bound(Count n1, Count n2, double alpha) {
  return std::sqrt(0.5 * std::log(2.0 / alpha)) *
         (1.0 / std::sqrt(static_cast<double>(n1)) +
          1.0 / std::sqrt(static_cast<double>(n2)));
}

bool hoeffding_compatible(Count f1, Count n1, Count f2, Count n2, double alpha) {
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("hoeffding: n must be positive");
  const double diff = std::abs(static_cast<double>(f1) / static_cast<double>(n1) -
                               static_cast<double>(f2) / static_cast<double>(n2));
  return diff <= hoeffding_bound(n1, n2, alpha);
}

namespace {

bool locally_compatible(const FrequencyGraph& graph, NodeId red, NodeId blue,
                        const GiConfig& cfg) {
  const auto& r = graph.node(red);
  const auto& b = graph.node(blue);
  const Count nr = cfg.include_termination ? r.total_mass() : r.out_mass();
  const Count nb = cfg.include_termination ? b.total_mass() : b.out_mass();
  // Nothing to compare against: no evidence of a difference.
  if (nr == 0 || nb == 0) return true;

  if (cfg.include_termination &&
      !hoeffding_compatible(r.sequence_ends, nr, b.sequence_ends, nb, cfg.alpha)) {
    return false;
  }
  auto ri = r.arcs.begin();
  auto bi = b.arcs.begin();
  while (ri != r.arcs.end() || bi != b.arcs.end()) {
    Count fr = 0;
    Count fb = 0;
    if (bi == b.arcs.end() || (ri != r.arcs.end() && ri->first < bi->first)) {
      fr = (ri++)->second.frequency;
    } else if (ri == r.arcs.end() || bi->first < ri->first) {
      fb = (bi++)->second.frequency;
    } else {
      fr = (ri++)->second.frequency;
      fb = (bi++)->second.frequency;
    }
    if (!hoeffding_compatible(fr, nr, fb, nb, cfg.alpha)) return false;
  }
  return true;
}

bool fully_compatible(const FrequencyGraph& graph, NodeId red, NodeId blue,
                      const GiConfig& cfg) {
  if (!locally_compatible(graph, red, blue, cfg)) return false;
  const auto& r = graph.node(red);
  for (const auto& [item, arc] : graph.node(blue).arcs) {
    auto it = r.arcs.find(item);
    if (it == r.arcs.end()) continue;
    // The blue side is a finite tree, so the recursion ends even when the
    // red side loops.
    if (!fully_compatible(graph, it->second.target, arc.target, cfg)) return false;
  }
  return true;
}

}  // namespace

bool compatible(const FrequencyGraph& graph, NodeId red, NodeId blue,
                const GiConfig& cfg) {
  return cfg.mode == Mode::relaxed ? locally_compatible(graph, red, blue, cfg)
                                   : fully_compatible(graph, red, blue, cfg);
}

void fold(FrequencyGraph& graph, NodeId red, NodeId blue) {
  if (red == blue) throw std::invalid_argument("fold: red and blue coincide");
  const auto blue_arcs = graph.node(blue).arcs;
  for (const auto& [item, arc] : blue_arcs) {
    auto& red_arcs = graph.node(red).arcs;
    auto it = red_arcs.find(item);
    if (it == red_arcs.end()) {
      red_arcs.emplace(item, arc);
      continue;
    }
    it->second.frequency += arc.frequency;
    const NodeId red_child = it->second.target;
    graph.node(red_child).sequence_ends += graph.node(arc.target).sequence_ends;
    fold(graph, red_child, arc.target);
  }
}

void merge(FrequencyGraph& graph, NodeId parent, Item item, NodeId red, NodeId blue) {
  if (red == blue) throw std::invalid_argument("merge: red and blue coincide");
  auto& arcs = graph.node(parent).arcs;
  auto it = arcs.find(item);
  if (it == arcs.end() || it->second.target != blue) {
    throw std::invalid_argument("merge: no arc from parent to blue with that item");
  }
  it->second.target = red;
  graph.node(red).sequence_ends += graph.node(blue).sequence_ends;
  fold(graph, red, blue);
}

namespace {

struct BlueEntry {
  NodeId parent;
  Item item;
};

class StateMerger {
 public:
  StateMerger(const Fpt& fpt, const GiConfig& cfg)
      : graph_(fpt), cfg_(cfg), depth_(node_depths(fpt)), red_(fpt.size(), false) {}

  FrequencyAutomaton run() {
    promote(graph_.root);
    while (!blue_.empty()) {
      const NodeId blue = next_blue();
      const BlueEntry entry = blue_.at(blue);
      bool merged = false;
      if (!cfg_.force_no_merge) {
        for (NodeId red : red_order_) {
          if (compatible(graph_, red, blue, cfg_)) {
            merge(graph_, entry.parent, entry.item, red, blue);
            ++merges_;
            rebuild_blue();
            merged = true;
            break;
          }
        }
      }
      if (!merged) promote(blue);
    }
    FrequencyAutomaton out;
    static_cast<FrequencyGraph&>(out) = canonicalize(graph_);
    out.provenance = {cfg_.alpha, cfg_.mode, cfg_.include_termination,
                      cfg_.force_no_merge, merges_, red_order_.size()};
    return out;
  }

 private:
  // Shallowest first, then heaviest ingoing arc, then lowest id.
  NodeId next_blue() const {
    using Key = std::tuple<std::size_t, Count, NodeId>;
    Key best{};
    bool have = false;
    for (const auto& [id, entry] : blue_) {
      const Count freq = graph_.node(entry.parent).arcs.at(entry.item).frequency;
      Key key{depth_[static_cast<std::size_t>(id)], -freq, id};
      if (!have || key < best) {
        best = key;
        have = true;
      }
    }
    return std::get<2>(best);
  }

  void promote(NodeId id) {
    red_[static_cast<std::size_t>(id)] = true;
    red_order_.insert(id);
    blue_.erase(id);
    for (const auto& [item, arc] : graph_.node(id).arcs) {
      if (!red_[static_cast<std::size_t>(arc.target)]) blue_[arc.target] = {id, item};
    }
  }

  void rebuild_blue() {
    blue_.clear();
    for (NodeId id : red_order_) {
      for (const auto& [item, arc] : graph_.node(id).arcs) {
        if (!red_[static_cast<std::size_t>(arc.target)]) blue_[arc.target] = {id, item};
      }
    }
  }

  FrequencyGraph graph_;
  GiConfig cfg_;
  std::vector<std::size_t> depth_;
  std::vector<bool> red_;
  std::set<NodeId> red_order_;
  std::map<NodeId, BlueEntry> blue_;
  std::size_t merges_ = 0;
};

}  // namespace

FrequencyAutomaton relaxed_alergia(const Fpt& fpt, const GiConfig& cfg) {
  cfg.validate();
  check_conservation(fpt);
  return StateMerger(fpt, cfg).run();
}

}  // namespace tourhmm::gi
