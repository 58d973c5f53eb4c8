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

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "tourhmm/automata.hpp"
#include "tourhmm/eval.hpp"
#include "tourhmm/gi.hpp"
#include "tourhmm/hmm_ops.hpp"
#include "tourhmm/ingest.hpp"
#include "tourhmm/io.hpp"
#include "tourhmm/trie.hpp"

namespace tourhmm::cli {

namespace {

// Bad user input or a missing file; maps to kExitInputError.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string output;
  std::uint64_t seed = 2021;
  bool stats = false;

  // ingest
  std::string report;
  std::string users;
  int break_days = 7;
  std::size_t min_length = 2;
  bool keep_same_day = false;

  // infer
  double alpha = 0.05;
  std::string mode = "relaxed";
  bool no_merge = false;
  bool no_termination_test = false;

  // convert
  std::string stochastic;

  // predict
  std::string prefix;
  int length = 1;
  std::optional<std::size_t> top_k;
  bool no_end_marker = false;
  bool partial = false;

  // update / validate
  std::string sequences;
  double mape_threshold = 0.10;
  int max_iters = 100;
  std::string scope = "length:2";
  std::string trajectory;
  std::string summary;
  std::string plot;
  std::string fpt;
  double anomaly_bound = 0.08;

  // generate
  std::string model = "five-state";
  std::size_t count = 10000;
};

std::vector<Sequence> load_sequences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return io::read_sequences(in);
}

Sequence parse_prefix(const std::string& text) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream fields(cleaned);
  auto parsed = io::read_sequences(fields);
  return parsed.empty() ? Sequence{} : parsed.front();
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string("missing required option ") + flag);
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::write_file_atomic(path, contents);
  }
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.input, "--input");
  require(o.output, "--output");
  ingest::IngestConfig cfg;
  cfg.break_threshold_days = o.break_days;
  cfg.min_sequence_length = o.min_length;
  cfg.dedupe_same_day = !o.keep_same_day;
  if (!o.users.empty()) {
    std::ifstream users(o.users);
    if (!users) throw InputError("cannot open " + o.users);
    for (std::string u; users >> u;) cfg.user_allow_list.insert(u);
  }
  cfg.validate();

  std::ifstream in(o.input);
  if (!in) throw InputError("cannot open " + o.input);
  const auto parsed = ingest::parse_reviews_jsonl(in, cfg);
  for (const auto& e : parsed.errors) {
    err << o.input << ':' << e.line << ": warning: " << e.message << " (skipped)\n";
  }
  const auto result = ingest::run_ingest(parsed, cfg);

  std::ostringstream seqs;
  io::write_sequences(seqs, result.sequences);
  io::write_file_atomic(o.output, seqs.str());
  const std::string report = io::dump(io::to_json(result.report));
  if (!o.report.empty()) io::write_file_atomic(o.report, report);
  if (o.stats) out << report;
  return kExitOk;
}

int cmd_build(const Options& o, std::ostream& out, std::ostream&) {
  require(o.input, "--input");
  require(o.output, "--output");
  const auto sequences = load_sequences(o.input);
  Fpt fpt;
  try {
    fpt = build_fpt(sequences);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  io::write_file_atomic(o.output, io::dump(io::to_json(fpt)));
  if (o.stats) {
    const auto s = fpt_stats(fpt);
    out << "sequences " << fpt.total_sequences << "\nnodes " << s.node_count << "\nnon_null "
        << s.non_null_count << "\ndepth " << s.depth << "\nalphabet " << s.alphabet_size << '\n';
  }
  return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream&) {
  require(o.input, "--input");
  require(o.output, "--output");
  gi::GiConfig cfg;
  cfg.alpha = o.alpha;
  cfg.mode = gi::parse_mode(o.mode);
  cfg.force_no_merge = o.no_merge;
  cfg.include_termination = !o.no_termination_test;
  cfg.validate();
  const Fpt fpt = io::fpt_from_json(io::read_json_file(o.input));
  const auto fa = gi::relaxed_alergia(fpt, cfg);
  io::write_file_atomic(o.output, io::dump(io::to_json(fa)));
  if (o.stats) {
    std::size_t ends = 0;
    for (const auto& n : fa.nodes) ends += n.sequence_ends > 0 ? 1 : 0;
    out << "fpt_nodes " << fpt.size() << "\nnodes " << fa.size() << "\nend_nodes " << ends
        << "\nmerges " << fa.provenance.merges << '\n';
  }
  return kExitOk;
}

int cmd_convert(const Options& o, std::ostream& out, std::ostream&) {
  require(o.input, "--input");
  require(o.output, "--output");
  const auto j = io::read_json_file(o.input);
  const std::string schema = j.is_object() && j.contains("schema") && j["schema"].is_string()
                                 ? j["schema"].get<std::string>()
                                 : "";
  StochasticAutomaton sa;
  if (schema == io::kAutomatonSchema) {
    sa = normalize(io::automaton_from_json(j));
  } else if (schema == io::kFptSchema) {
    sa = normalize(io::fpt_from_json(j));
  } else if (schema == io::kStochasticSchema) {
    sa = io::stochastic_from_json(j);
  } else {
    throw io::SchemaError("convert expects an automaton, FPT or stochastic automaton, found '" +
                          schema + "'");
  }
  const Hmm hmm = to_hmm(sa);
  if (!o.stochastic.empty()) io::write_file_atomic(o.stochastic, io::dump(io::to_json(sa)));
  io::write_file_atomic(o.output, io::dump(io::to_json(hmm)));
  if (o.stats) {
    out << "states " << sa.size() << "\nhmm_nodes " << hmm.size() << "\njumps "
        << hmm.transition.nonZeros() << "\nalphabet " << hmm.alphabet.size() << '\n';
  }
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.input, "--input");
  const Hmm hmm = io::hmm_from_json(io::read_json_file(o.input));
  PredictConfig cfg;
  cfg.length = o.length;
  cfg.top_k = o.top_k;
  cfg.include_end_marker = !o.no_end_marker;
  cfg.partial_suffixes = o.partial;
  const Sequence prefix = parse_prefix(o.prefix);
  const auto prediction = predict_suffixes(hmm, std::span<const Item>(prefix), cfg);
  if (prediction.fell_back) {
    err << "warning: prefix '" << to_string(prefix)
        << "' is not observable; predicting from the initial distribution\n";
  }
  emit(o.output, io::dump(io::to_json(prediction)), out);
  if (o.stats) {
    err << "anchor " << (prediction.anchor ? std::to_string(*prediction.anchor) : "start")
        << "\nsuffixes " << prediction.suffixes.size() << '\n';
  }
  return kExitOk;
}

int cmd_update(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.input, "--input");
  require(o.sequences, "--sequences");
  require(o.output, "--output");
  const Hmm hmm = io::hmm_from_json(io::read_json_file(o.input));
  const auto sequences = load_sequences(o.sequences);
  if (sequences.empty()) throw InputError("empty sequence set");
  eval::UpdateConfig cfg;
  cfg.mape_threshold = o.mape_threshold;
  cfg.max_iters = o.max_iters;
  cfg.scope = eval::ValidationScope::parse(o.scope);
  cfg.validate();
  const auto result = eval::update_until(hmm, sequences, cfg);
  check_invariants(result.model);
  io::write_file_atomic(o.output, io::dump(io::to_json(result.model)));
  if (!o.trajectory.empty()) io::write_file_atomic(o.trajectory, io::dump(io::to_json(result)));
  if (!result.converged) {
    err << "warning: MAPE " << result.mape.back() << " still >= " << cfg.mape_threshold
        << " after " << result.iterations << " iterations\n";
  }
  if (result.excluded > 0) {
    err << "warning: " << result.excluded << " sequences have zero probability and were skipped\n";
  }
  if (o.stats) {
    out << "iterations " << result.iterations << "\nmape_initial " << result.mape.front()
        << "\nmape_final " << result.mape.back() << '\n';
  }
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream&) {
  require(o.input, "--input");
  require(o.sequences, "--sequences");
  const Hmm hmm = io::hmm_from_json(io::read_json_file(o.input));
  const auto sequences = load_sequences(o.sequences);
  const auto scope = eval::ValidationScope::parse(o.scope);
  const auto report = eval::validate(hmm, sequences, scope);

  std::ostringstream csv;
  io::write_validation_csv(csv, report);
  emit(o.output, csv.str(), out);

  auto summary = io::summary_json(report, scope);
  if (!o.fpt.empty()) {
    const Fpt fpt = io::fpt_from_json(io::read_json_file(o.fpt));
    summary["relaxation"] = io::to_json(eval::check_relaxation_validity(fpt, o.anomaly_bound));
  }
  if (!o.summary.empty()) io::write_file_atomic(o.summary, io::dump(summary));
  if (!o.plot.empty()) {
    std::ostringstream plot;
    io::write_plot_data(plot, report);
    io::write_file_atomic(o.plot, plot.str());
  }
  if (o.stats) {
    out << "sequences " << report.rows.size() << "\nmape " << report.mape << "\nmin_ape "
        << report.min_ape << "\nmax_ape " << report.max_ape << '\n';
  }
  return kExitOk;
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream&) {
  require(o.output, "--output");
  StochasticAutomaton model;
  if (o.model == "five-state") {
    model = eval::five_state_model().automaton;
  } else if (o.model == "markov") {
    model = eval::markov_chain_model().automaton;
  } else {
    model = io::stochastic_from_json(io::read_json_file(o.model));
  }
  auto sequences = eval::generate_sequences(model, o.count, o.seed);
  std::erase_if(sequences, [](const Sequence& s) { return s.empty(); });
  std::ostringstream text;
  io::write_sequences(text, sequences);
  io::write_file_atomic(o.output, text.str());
  if (o.stats) out << "sequences " << sequences.size() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn, query and update next-place HMMs from visit sequences", "tourhmm"};
  app.set_config("--config", "", "TOML config file with option defaults");
  app.require_subcommand(1, 1);

  Options o;
  app.add_option("--seed", o.seed, "Seed for every random draw");
  app.add_flag("--stats", o.stats, "Print stage statistics");

  auto io_options = [&o](CLI::App* sub, const char* input_help, const char* output_help) {
    sub->add_option("--input,-i", o.input, input_help);
    sub->add_option("--output,-o", o.output, output_help);
  };

  auto* ingest = app.add_subcommand("ingest", "Reviews JSONL -> sequence file");
  io_options(ingest, "Reviews, one JSON object per line", "Sequence file");
  ingest->add_option("--report", o.report, "JSON report with ingest counts");
  ingest->add_option("--users", o.users, "Allow-list file of user ids");
  ingest->add_option("--break-days", o.break_days, "Largest gap in days inside one stay")
      ->check(CLI::PositiveNumber);
  ingest->add_option("--min-length", o.min_length, "Shortest sequence kept");
  ingest->add_flag("--keep-same-day", o.keep_same_day,
                   "Keep repeated same-day reviews of one area");

  auto* build = app.add_subcommand("build", "Sequence file -> frequency prefix tree");
  io_options(build, "Sequence file", "FPT JSON");

  auto* infer = app.add_subcommand("infer", "FPT -> frequency automaton by state merging");
  io_options(infer, "FPT JSON", "Automaton JSON");
  infer->add_option("--alpha", o.alpha, "Hoeffding confidence parameter");
  infer->add_option("--mode", o.mode, "relaxed|full")->check(CLI::IsMember({"relaxed", "full"}));
  infer->add_flag("--no-merge", o.no_merge, "Keep the tree as is");
  infer->add_flag("--no-termination-test", o.no_termination_test,
                  "Compare outgoing arcs only");

  auto* convert = app.add_subcommand("convert", "Automaton -> HMM");
  io_options(convert, "Automaton, FPT or stochastic automaton JSON", "HMM JSON");
  convert->add_option("--stochastic", o.stochastic, "Also write the stochastic automaton");

  auto* predict = app.add_subcommand("predict", "Rank suffixes after a prefix");
  io_options(predict, "HMM JSON", "Prediction JSON (default stdout)");
  predict->add_option("--prefix", o.prefix, "Visited items, e.g. \"0 5\"");
  predict->add_option("--length,-L", o.length, "Suffix length")->check(CLI::NonNegativeNumber);
  predict->add_option("--top-k", o.top_k, "Keep the k most probable suffixes");
  predict->add_flag("--no-end-marker", o.no_end_marker, "Drop suffixes ending in #");
  predict->add_flag("--partial", o.partial, "Also list shorter continuations");

  auto* update = app.add_subcommand("update", "Baum-Welch until MAPE < threshold");
  io_options(update, "HMM JSON", "Updated HMM JSON");
  update->add_option("--sequences", o.sequences, "Sequence file");
  update->add_option("--mape-threshold", o.mape_threshold, "Stop below this MAPE");
  update->add_option("--max-iters", o.max_iters, "Iteration cap");
  update->add_option("--scope", o.scope, "Validation scope: all, length:N, top:N");
  update->add_option("--trajectory", o.trajectory, "JSON with MAPE and log-likelihood per step");

  auto* validate = app.add_subcommand("validate", "APE per sequence and MAPE");
  io_options(validate, "HMM JSON", "CSV report (default stdout)");
  validate->add_option("--sequences", o.sequences, "Sequence file");
  validate->add_option("--scope", o.scope, "Validation scope: all, length:N, top:N");
  validate->add_option("--summary", o.summary, "JSON summary");
  validate->add_option("--plot", o.plot, "Plot data file (label, APE)");
  validate->add_option("--fpt", o.fpt, "FPT JSON for the relaxation check");
  validate->add_option("--anomaly-bound", o.anomaly_bound, "Variation bound for anomalies");

  auto* generate = app.add_subcommand("generate", "Sample sequences from a known automaton");
  generate->add_option("--output,-o", o.output, "Sequence file");
  generate->add_option("--model", o.model, "five-state, markov or a stochastic automaton JSON");
  generate->add_option("--count,-n", o.count, "Number of samples")->check(CLI::PositiveNumber);

  const std::map<CLI::App*, std::function<int(const Options&, std::ostream&, std::ostream&)>>
      commands = {{ingest, cmd_ingest},   {build, cmd_build},       {infer, cmd_infer},
                  {convert, cmd_convert}, {predict, cmd_predict},   {update, cmd_update},
                  {validate, cmd_validate}, {generate, cmd_generate}};

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) return fn(o, out, err);
    }
  } catch (const InvariantError& e) {
    err << "error: invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace tourhmm::cli
