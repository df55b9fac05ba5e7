// Copyright 2026 The HLP Authors
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

// The `hlp` command line. Exit codes: 0 success, 1 usage error, 2 data or
// validation error. Files are written atomically; output bytes never depend
// on --threads.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hlp/error.hpp"
#include "hlp/labelset.hpp"
#include "hlp/metrics.hpp"
#include "hlp/ontology.hpp"
#include "hlp/propagation.hpp"
#include "hlp/stats.hpp"
#include "hlp/synthlab.hpp"
#include "hlp/text.hpp"

namespace hlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

namespace detail {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a file and parses it, prefixing any parse error with the file name.
template <typename Parse>
auto load(const std::string& path, Parse&& parse) {
  std::string bytes = text::read_file(path);
  try {
    return parse(std::string_view(bytes));
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

inline unsigned default_threads() {
  const char* env = std::getenv("HLP_THREADS");
  if (!env || !*env) return 1;
  auto n = text::parse_number<unsigned>(env);
  if (!n || *n == 0) throw UsageError("HLP_THREADS must be a positive integer");
  return *n;
}

inline void emit(const std::string& out_path, const std::string& bytes, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    out << bytes;
  } else {
    text::write_file_atomic(out_path, bytes);
  }
}

inline LabelMatrix load_labels(const std::string& path, const ClassVocabulary& vocab, bool lenient,
                               std::ostream& err) {
  DroppedLabels dropped;
  auto labels = load(path, [&](std::string_view raw) {
    return parse_segments_csv(raw, vocab, SegmentsParseOptions{lenient}, &dropped);
  });
  if (dropped.total > 0) {
    err << path << ": dropped " << dropped.total << " unknown label(s)\n";
    for (const auto& [mid, count] : dropped.by_mid) err << "  " << mid << ": " << count << "\n";
  }
  return labels;
}

inline void print_warnings(const OntologyGraph& graph, const std::string& path, std::ostream& err) {
  for (const auto& w : graph.warnings()) err << path << ": warning: " << w << "\n";
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical label propagation for multi-label datasets and model outputs", "hlp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  unsigned threads = 1;
  try {
    threads = detail::default_threads();
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::vector<std::string> policies{"through-all", "labelable-only"};

  // validate
  std::string v_ontology, v_format = "text";
  auto* validate = app.add_subcommand("validate", "Check an ontology file and print a summary");
  validate->add_option("--ontology", v_ontology, "Ontology JSON")->required();
  validate->add_option("--format", v_format, "text or json")->check(CLI::IsMember({"text", "json"}));

  // propagate-labels
  std::string pl_ontology, pl_index, pl_in, pl_out, pl_policy = "through-all";
  bool pl_lenient = false;
  auto* prop_labels = app.add_subcommand("propagate-labels", "Propagate positive labels up the ontology");
  prop_labels->add_option("--ontology", pl_ontology, "Ontology JSON")->required();
  prop_labels->add_option("--class-index", pl_index, "Class index CSV")->required();
  prop_labels->add_option("--in", pl_in, "Input segments CSV")->required();
  prop_labels->add_option("--out", pl_out, "Output segments CSV")->required();
  prop_labels->add_option("--policy", pl_policy, "through-all or labelable-only")->check(CLI::IsMember(policies));
  prop_labels->add_flag("--lenient", pl_lenient, "Drop (and count) labels missing from the class index");
  prop_labels->add_option("--threads", threads, "Worker threads (default: $HLP_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  // propagate-scores
  std::string ps_ontology, ps_in, ps_out, ps_index, ps_policy = "through-all", ps_out_format = "auto";
  auto* prop_scores = app.add_subcommand("propagate-scores", "Max-propagate model scores up the ontology");
  prop_scores->add_option("--ontology", ps_ontology, "Ontology JSON")->required();
  prop_scores->add_option("--in", ps_in, "Input scores (CSV or HLPS)")->required();
  prop_scores->add_option("--out", ps_out, "Output scores")->required();
  prop_scores->add_option("--out-format", ps_out_format, "csv, hlps or auto (by extension)")
      ->check(CLI::IsMember({"auto", "csv", "hlps"}));
  prop_scores->add_option("--class-index", ps_index, "Labelable classes for --policy labelable-only");
  prop_scores->add_option("--policy", ps_policy, "through-all or labelable-only")->check(CLI::IsMember(policies));
  prop_scores->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  // stats
  std::string st_before, st_after, st_index, st_format = "text", st_out;
  bool st_lenient = false;
  auto* stats = app.add_subcommand("stats", "Summarize label changes between two segment files");
  stats->add_option("--before", st_before, "Segments CSV before propagation")->required();
  stats->add_option("--after", st_after, "Segments CSV after propagation")->required();
  stats->add_option("--class-index", st_index, "Class index CSV")->required();
  stats->add_option("--format", st_format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
  stats->add_option("--out", st_out, "Output file (default: stdout)");
  stats->add_flag("--lenient", st_lenient, "Drop (and count) labels missing from the class index");

  // eval
  std::string ev_scores, ev_labels, ev_index, ev_subset, ev_format = "text", ev_out;
  bool ev_lenient = false;
  auto* eval = app.add_subcommand("eval", "Class-wise AP and mAP of scores against labels");
  eval->add_option("--scores", ev_scores, "Scores (CSV or HLPS)")->required();
  eval->add_option("--labels", ev_labels, "Segments CSV")->required();
  eval->add_option("--class-index", ev_index, "Class index CSV of the labels")->required();
  eval->add_option("--subset-class-index", ev_subset, "Evaluate only these classes");
  eval->add_option("--format", ev_format, "text or json")->check(CLI::IsMember({"text", "json"}));
  eval->add_option("--out", ev_out, "Output file (default: stdout)");
  eval->add_flag("--lenient", ev_lenient, "Drop (and count) labels missing from the class index");
  eval->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  // shared-classes
  std::string sc_a, sc_b, sc_out;
  auto* shared = app.add_subcommand("shared-classes", "Intersect two class index files");
  shared->add_option("--a", sc_a, "Class index CSV (defines the order)")->required();
  shared->add_option("--b", sc_b, "Class index CSV")->required();
  shared->add_option("--out", sc_out, "Output class index CSV")->required();

  // synth
  synth::SynthConfig cfg;
  std::string sy_out;
  bool sy_no_scores = false;
  auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic fixture");
  synth_cmd->add_option("--seed", cfg.seed, "PRNG seed");
  synth_cmd->add_option("--nodes", cfg.n_nodes, "Ontology nodes")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--clips", cfg.n_clips, "Clips")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--max-children", cfg.max_children, "Maximum children per node")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--multi-parent-prob", cfg.multi_parent_prob, "Probability of a second parent")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--density", cfg.label_density, "Expected positives per clip")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--abstract-prob", cfg.abstract_prob, "Probability that a node is abstract")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_flag("--no-scores", sy_no_scores, "Skip the score matrix");
  synth_cmd->add_option("--out", sy_out, "Output directory")->required();
  synth_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kExitUsage;
  }

  try {
    if (validate->parsed()) {
      auto graph = detail::load(v_ontology, [](std::string_view raw) { return parse_ontology(raw); });
      auto report = validate_ontology(graph);
      out << (v_format == "json" ? render_validation_json(report) : render_validation_text(report));
    } else if (prop_labels->parsed()) {
      auto graph = detail::load(pl_ontology, [](std::string_view raw) { return parse_ontology(raw); });
      detail::print_warnings(graph, pl_ontology, err);
      auto vocab = detail::load(pl_index, [](std::string_view raw) { return parse_class_index_csv(raw); });
      auto labels = detail::load_labels(pl_in, vocab, pl_lenient, err);
      auto pmap = build_propagation_map(graph, *parse_policy(pl_policy), &vocab);
      auto propagated = propagate_labels(labels, pmap, vocab, threads);
      text::write_file_atomic(pl_out, write_segments_csv(propagated, threads));
    } else if (prop_scores->parsed()) {
      auto policy = *parse_policy(ps_policy);
      auto graph = detail::load(ps_ontology, [](std::string_view raw) { return parse_ontology(raw); });
      detail::print_warnings(graph, ps_ontology, err);
      auto scores = detail::load(ps_in, [](std::string_view raw) { return read_scores(raw); });
      ClassVocabulary labelable = scores.vocab();
      if (!ps_index.empty()) {
        labelable = detail::load(ps_index, [](std::string_view raw) { return parse_class_index_csv(raw); });
      }
      auto pmap = build_propagation_map(graph, policy, &labelable);
      auto result = propagate_scores(scores, pmap, scores.vocab(), threads);
      bool csv = ps_out_format == "csv" ||
                 (ps_out_format == "auto" && std::filesystem::path(ps_out).extension() == ".csv");
      text::write_file_atomic(ps_out, write_scores(result, csv ? ScoreFormat::kCsv : ScoreFormat::kBinary, threads));
    } else if (stats->parsed()) {
      auto vocab = detail::load(st_index, [](std::string_view raw) { return parse_class_index_csv(raw); });
      auto before = detail::load_labels(st_before, vocab, st_lenient, err);
      auto after = detail::load_labels(st_after, vocab, st_lenient, err);
      auto report = diff_label_matrices(before, after);
      detail::emit(st_out, render_report(report, *parse_report_format(st_format)), out);
    } else if (eval->parsed()) {
      auto vocab = detail::load(ev_index, [](std::string_view raw) { return parse_class_index_csv(raw); });
      auto scores = detail::load(ev_scores, [](std::string_view raw) { return read_scores(raw); });
      auto labels = detail::load_labels(ev_labels, vocab, ev_lenient, err);
      std::optional<ClassVocabulary> subset;
      if (!ev_subset.empty()) {
        subset = detail::load(ev_subset, [](std::string_view raw) { return parse_class_index_csv(raw); });
      }
      auto report = mean_average_precision(scores, labels, subset ? &*subset : nullptr, threads);
      detail::emit(ev_out, ev_format == "json" ? render_eval_json(report) : render_eval_text(report), out);
    } else if (shared->parsed()) {
      auto a = detail::load(sc_a, [](std::string_view raw) { return parse_class_index_csv(raw); });
      auto b = detail::load(sc_b, [](std::string_view raw) { return parse_class_index_csv(raw); });
      auto common = restrict_to_shared_vocab(a, b);
      text::write_file_atomic(sc_out, write_class_index_csv(common));
      out << common.size() << " shared classes\n";
    } else if (synth_cmd->parsed()) {
      auto paths = synth::write_fixture(cfg, sy_out, !sy_no_scores, threads);
      out << paths.ontology.string() << "\n" << paths.class_index.string() << "\n" << paths.segments.string() << "\n";
      if (!sy_no_scores) out << paths.scores.string() << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("hlp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hlp::cli
