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

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace tourhmm::io {

namespace {

void expect_schema(const json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema") || j.at("schema") != schema) {
    std::string found = "none";
    if (j.is_object() && j.contains("schema") && j.at("schema").is_string()) {
      found = j.at("schema").get<std::string>();
    }
    throw SchemaError(std::string("expected schema ") + schema + ", found " + found);
  }
}

template <typename T>
T field(const json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field '") + key + "': " + e.what());
  }
}

const json& array_field(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj.at(key).is_array()) {
    throw SchemaError(std::string("missing array '") + key + "'");
  }
  return obj.at(key);
}

json graph_json(const FrequencyGraph& g, const char* schema) {
  json nodes = json::array();
  json arcs = json::array();
  for (std::size_t id = 0; id < g.size(); ++id) {
    nodes.push_back({{"id", id}, {"sequence_ends", g.nodes[id].sequence_ends}});
    for (const auto& [item, arc] : g.nodes[id].arcs) {
      arcs.push_back({{"from", id}, {"item", item}, {"frequency", arc.frequency}, {"to", arc.target}});
    }
  }
  return {{"schema", schema},
          {"root", g.root},
          {"total_sequences", g.total_sequences},
          {"nodes", std::move(nodes)},
          {"arcs", std::move(arcs)}};
}

FrequencyGraph graph_from_json(const json& j) {
  FrequencyGraph g;
  g.root = field<NodeId>(j, "root");
  g.total_sequences = field<Count>(j, "total_sequences");
  const auto& nodes = array_field(j, "nodes");
  g.nodes.resize(nodes.size());
  for (const auto& n : nodes) {
    const auto id = field<std::size_t>(n, "id");
    if (id >= g.size()) throw SchemaError("node id out of range");
    g.nodes[id].sequence_ends = field<Count>(n, "sequence_ends");
  }
  for (const auto& a : array_field(j, "arcs")) {
    const auto from = field<std::size_t>(a, "from");
    if (from >= g.size()) throw SchemaError("arc source out of range");
    const auto item = field<Item>(a, "item");
    auto [it, fresh] = g.nodes[from].arcs.try_emplace(
        item, FrequencyArc{field<Count>(a, "frequency"), field<NodeId>(a, "to")});
    if (!fresh) {
      throw InvariantError("determinism", "node " + std::to_string(from) +
                                              " has two arcs for item " + std::to_string(item));
    }
  }
  check_conservation(g);
  return g;
}

}  // namespace

std::vector<Sequence> read_sequences(std::istream& in) {
  std::vector<Sequence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    Sequence seq;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      long value = -1;
      try {
        value = std::stol(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size() || value < 0) {
        throw SchemaError("line " + std::to_string(lineno) + ": bad item '" + token + "'");
      }
      seq.push_back(static_cast<Item>(value));
    }
    if (!seq.empty()) out.push_back(std::move(seq));
  }
  return out;
}

void write_sequences(std::ostream& out, const std::vector<Sequence>& sequences) {
  for (const auto& seq : sequences) out << to_string(seq) << '\n';
}

json to_json(const Fpt& fpt) { return graph_json(fpt, kFptSchema); }

json to_json(const gi::FrequencyAutomaton& fa) {
  json j = graph_json(fa, kAutomatonSchema);
  j["cycles_allowed"] = true;
  const auto& p = fa.provenance;
  j["provenance"] = {{"alpha", p.alpha},
                     {"mode", gi::to_string(p.mode)},
                     {"include_termination", p.include_termination},
                     {"force_no_merge", p.force_no_merge},
                     {"merges", p.merges},
                     {"promotions", p.promotions}};
  return j;
}

json to_json(const StochasticAutomaton& sa) {
  json nodes = json::array();
  json arcs = json::array();
  for (std::size_t id = 0; id < sa.size(); ++id) {
    nodes.push_back({{"id", id}, {"termination", sa.states[id].termination}});
    for (const auto& [item, arc] : sa.states[id].arcs) {
      arcs.push_back({{"from", id}, {"item", item}, {"p", arc.probability}, {"to", arc.target}});
    }
  }
  return {{"schema", kStochasticSchema}, {"root", sa.root}, {"nodes", nodes}, {"arcs", arcs}};
}

json to_json(const Hmm& hmm) {
  json nodes = json::array();
  json arcs = json::array();
  json initial = json::array();
  for (Eigen::Index i = 0; i < hmm.size(); ++i) {
    json emissions = json::array();
    for (Eigen::Index k = 0; k < hmm.emission.cols(); ++k) {
      if (hmm.emission(i, k) > 0.0) {
        emissions.push_back({{"item", hmm.item_at(k)}, {"p", hmm.emission(i, k)}});
      }
    }
    json node = {{"id", i}, {"emissions", std::move(emissions)}};
    if (static_cast<std::size_t>(i) < hmm.state_of.size()) {
      node["state"] = hmm.state_of[static_cast<std::size_t>(i)];
    }
    nodes.push_back(std::move(node));
    for (Hmm::Transitions::InnerIterator it(hmm.transition, i); it; ++it) {
      arcs.push_back({{"from", i}, {"to", it.col()}, {"p", it.value()}});
    }
    if (hmm.initial(i) > 0.0) initial.push_back({{"node", i}, {"p", hmm.initial(i)}});
  }
  json items = json::array();
  for (Item item : hmm.alphabet) items.push_back({{"id", item}, {"label", item_label(item)}});
  items.push_back({{"id", kEndMarker}, {"label", item_label(kEndMarker)}});
  return {{"schema", kHmmSchema}, {"nodes", nodes}, {"arcs", arcs},
          {"initial", initial},   {"items", items}};
}

json to_json(const ingest::IngestReport& r) {
  json errors = json::array();
  for (const auto& e : r.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  return {{"schema", "tourhmm.ingest-report/1"},
          {"reviews_read", r.reviews_read},
          {"reviews_skipped", r.reviews_skipped},
          {"users", r.users},
          {"stays", r.stays},
          {"merges", r.merges},
          {"sequences_kept", r.sequences_kept},
          {"sequences_dropped", r.sequences_dropped},
          {"errors", std::move(errors)}};
}

json to_json(const Prediction<double>& prediction) {
  json out = json::array();
  for (const auto& s : prediction.suffixes) {
    out.push_back({{"suffix", s.items}, {"probability", s.probability}});
  }
  return out;
}

json summary_json(const eval::ValidationReport& report, const eval::ValidationScope& scope) {
  json anomalies = json::array();
  for (const auto& s : report.anomalies) anomalies.push_back(s);
  return {{"schema", "tourhmm.validation/1"},
          {"scope", scope.to_string()},
          {"sequences", report.rows.size()},
          {"mape", report.mape},
          {"min_ape", report.min_ape},
          {"max_ape", report.max_ape},
          {"unobservable", std::move(anomalies)}};
}

json to_json(const eval::RelaxationReport& report) {
  json groups = json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"item", g.item},
                      {"depth", g.depth},
                      {"arcs", g.arcs},
                      {"min", g.min_relative_frequency},
                      {"max", g.max_relative_frequency},
                      {"variation", g.variation},
                      {"anomaly", g.anomaly}});
  }
  return {{"bound", report.bound}, {"max_variation", report.max_variation}, {"groups", groups}};
}

json to_json(const eval::UpdateResult& r) {
  return {{"schema", "tourhmm.update/1"},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"excluded", r.excluded},
          {"mape", r.mape},
          {"log_likelihood", r.log_likelihood}};
}

Fpt fpt_from_json(const json& j) {
  expect_schema(j, kFptSchema);
  Fpt fpt;
  static_cast<FrequencyGraph&>(fpt) = graph_from_json(j);
  for (std::size_t id = 0; id < fpt.size(); ++id) {
    for (const auto& [item, arc] : fpt.nodes[id].arcs) {
      if (static_cast<std::size_t>(arc.target) <= id) {
        throw InvariantError("tree", "arc " + std::to_string(id) + " -> " +
                                         std::to_string(arc.target) + " is not breadth-first");
      }
    }
  }
  return fpt;
}

gi::FrequencyAutomaton automaton_from_json(const json& j) {
  expect_schema(j, kAutomatonSchema);
  gi::FrequencyAutomaton fa;
  static_cast<FrequencyGraph&>(fa) = graph_from_json(j);
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    fa.provenance.alpha = field<double>(p, "alpha");
    fa.provenance.mode = gi::parse_mode(field<std::string>(p, "mode"));
    fa.provenance.include_termination = field<bool>(p, "include_termination");
    fa.provenance.force_no_merge = field<bool>(p, "force_no_merge");
    fa.provenance.merges = field<std::size_t>(p, "merges");
    fa.provenance.promotions = field<std::size_t>(p, "promotions");
  }
  return fa;
}

StochasticAutomaton stochastic_from_json(const json& j) {
  expect_schema(j, kStochasticSchema);
  StochasticAutomaton sa;
  sa.root = field<NodeId>(j, "root");
  const auto& nodes = array_field(j, "nodes");
  sa.states.resize(nodes.size());
  for (const auto& n : nodes) {
    const auto id = field<std::size_t>(n, "id");
    if (id >= sa.size()) throw SchemaError("node id out of range");
    sa.states[id].termination = field<double>(n, "termination");
  }
  for (const auto& a : array_field(j, "arcs")) {
    const auto from = field<std::size_t>(a, "from");
    if (from >= sa.size()) throw SchemaError("arc source out of range");
    sa.states[from].arcs[field<Item>(a, "item")] = {field<double>(a, "p"), field<NodeId>(a, "to")};
  }
  check_invariants(sa);
  return sa;
}

Hmm hmm_from_json(const json& j) {
  expect_schema(j, kHmmSchema);
  Hmm hmm;
  std::set<Item> items;
  for (const auto& it : array_field(j, "items")) {
    const auto id = field<Item>(it, "id");
    if (id != kEndMarker) items.insert(id);
  }
  hmm.alphabet.assign(items.begin(), items.end());

  const auto& nodes = array_field(j, "nodes");
  const auto n = static_cast<Eigen::Index>(nodes.size());
  hmm.initial = Hmm::Vector::Zero(n);
  hmm.emission = Hmm::Matrix::Zero(n, hmm.end_column() + 1);
  hmm.state_of.assign(nodes.size(), -1);
  for (const auto& node : nodes) {
    const auto id = field<Eigen::Index>(node, "id");
    if (id < 0 || id >= n) throw SchemaError("node id out of range");
    if (node.contains("state")) {
      hmm.state_of[static_cast<std::size_t>(id)] = field<NodeId>(node, "state");
    }
    for (const auto& e : array_field(node, "emissions")) {
      const auto col = hmm.column_of(field<Item>(e, "item"));
      if (!col) throw SchemaError("emission of an item missing from the dictionary");
      hmm.emission(id, *col) = field<double>(e, "p");
    }
  }
  if (std::all_of(hmm.state_of.begin(), hmm.state_of.end(), [](NodeId s) { return s < 0; })) {
    hmm.state_of.clear();
  }
  for (const auto& init : array_field(j, "initial")) {
    const auto id = field<Eigen::Index>(init, "node");
    if (id < 0 || id >= n) throw SchemaError("initial node out of range");
    hmm.initial(id) = field<double>(init, "p");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& a : array_field(j, "arcs")) {
    const auto from = field<Eigen::Index>(a, "from");
    const auto to = field<Eigen::Index>(a, "to");
    if (from < 0 || from >= n || to < 0 || to >= n) throw SchemaError("arc out of range");
    triplets.emplace_back(from, to, field<double>(a, "p"));
  }
  hmm.transition.resize(n, n);
  hmm.transition.setFromTriplets(triplets.begin(), triplets.end());
  hmm.transition.makeCompressed();
  check_invariants(hmm);
  return hmm;
}

void write_validation_csv(std::ostream& out, const eval::ValidationReport& report) {
  out << "sequence,R,P,APE\n";
  out.precision(17);
  for (const auto& row : report.rows) {
    out << to_string(row.sequence) << ',' << row.empirical << ',' << row.model << ','
        << row.ape << '\n';
  }
}

void write_plot_data(std::ostream& out, const eval::ValidationReport& report) {
  out << "# sequence APE\n";
  out.precision(17);
  for (const auto& row : report.rows) out << compact_label(row.sequence) << ' ' << row.ape << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError(path.string() + ": not valid JSON");
  return j;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace tourhmm::io
