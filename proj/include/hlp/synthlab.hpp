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

// Seeded synthetic ontologies, label and score matrices, and a naive
// reference implementation of label propagation used as a test oracle.
//
// All randomness comes from SplitMix64 (Steele, Lea & Flood 2014):
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Seed 1234567 yields 6457827717110365317, 3203168211198807973,
// 9817491932198370423, 4593380528125082431, 16408922859458223821.
//
// Each generator owns one stream, seeded with `seed XOR tag`:
//   ontology  tag 0
//   labels    tag 0x6C6162656C73 ("labels")
//   times     tag 0x74696D6573   ("times")
//   scores    tag 0x73636F726573 ("scores")
// A double in [0, 1) is (next() >> 11) * 2^-53, a float score is
// (next() >> 40) * 2^-24, and an integer below n is floor(double * n).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hlp/error.hpp"
#include "hlp/labelset.hpp"
#include "hlp/ontology.hpp"
#include "hlp/text.hpp"
#include "hlp/vocabulary.hpp"

namespace hlp::synth {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  float uniform_float() { return static_cast<float>(next() >> 40) * 0x1.0p-24f; }

  std::uint64_t below(std::uint64_t n) {
    auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return std::min(v, n - 1);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kLabelsStream = 0x6C6162656C73ULL;
inline constexpr std::uint64_t kTimesStream = 0x74696D6573ULL;
inline constexpr std::uint64_t kScoresStream = 0x73636F726573ULL;

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_nodes = 50;
  std::size_t max_children = 4;
  double multi_parent_prob = 0.2;
  std::size_t n_clips = 100;
  // Expected positives per clip.
  double label_density = 2.0;
  // Probability that a node is marked abstract (not labelable).
  double abstract_prob = 0.0;

  void validate() const {
    if (n_nodes < 1 || max_children < 1 || n_clips < 1) {
      throw Error(Errc::kInvalidConfig, "node, child and clip counts must be at least 1");
    }
    if (!(multi_parent_prob >= 0.0 && multi_parent_prob <= 1.0) || !(abstract_prob >= 0.0 && abstract_prob <= 1.0)) {
      throw Error(Errc::kInvalidConfig, "probabilities must lie in [0, 1]");
    }
    if (!(label_density >= 0.0) || !std::isfinite(label_density)) {
      throw Error(Errc::kInvalidConfig, "label density must be a finite non-negative number");
    }
  }
};

// Nodes are created in order; each non-first node picks its parent among the
// earlier nodes that still have room for a child (it becomes a root when none
// has), and with probability multi_parent_prob picks a second one.
inline OntologyGraph gen_ontology(const SynthConfig& cfg) {
  cfg.validate();
  SplitMix64 rng(cfg.seed);
  std::vector<OntologyNode> nodes(cfg.n_nodes);
  std::vector<std::size_t> open;  // nodes that can take another child
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    auto& node = nodes[i];
    node.mid = "/s/" + std::to_string(i);
    node.display_name = "Node " + std::to_string(i);
    node.is_abstract = rng.bernoulli(cfg.abstract_prob);

    auto adopt = [&](std::size_t slot) {
      std::size_t parent = open[slot];
      nodes[parent].child_mids.push_back(node.mid);
      if (nodes[parent].child_mids.size() >= cfg.max_children) {
        open[slot] = open.back();
        open.pop_back();
      }
      return parent;
    };

    if (!open.empty()) {
      std::size_t first = adopt(rng.below(open.size()));
      if (rng.bernoulli(cfg.multi_parent_prob)) {
        std::vector<std::size_t> candidates;
        for (std::size_t s = 0; s < open.size(); ++s) {
          if (open[s] != first) candidates.push_back(s);
        }
        if (!candidates.empty()) adopt(candidates[rng.below(candidates.size())]);
      }
    }
    open.push_back(i);
  }
  return OntologyGraph(std::move(nodes));
}

// Non-abstract nodes, in graph order.
inline ClassVocabulary labelable_vocabulary(const OntologyGraph& graph) {
  std::vector<ClassEntry> entries;
  for (const auto& n : graph.nodes()) {
    if (!n.is_abstract) entries.push_back({n.mid, n.display_name});
  }
  return ClassVocabulary(std::move(entries));
}

inline std::string clip_name(std::size_t i) {
  std::string digits = std::to_string(i);
  return "Y" + std::string(digits.size() < 8 ? 8 - digits.size() : 0, '0') + digits;
}

// Each (clip, class) cell is positive independently with probability
// label_density / |classes|. Positives are drawn by geometric skipping over
// the row-major cell sequence, which has the same distribution as one
// Bernoulli draw per cell.
inline LabelMatrix gen_labels(const SynthConfig& cfg, const OntologyGraph& graph) {
  cfg.validate();
  auto vocab = labelable_vocabulary(graph);
  const std::size_t classes = vocab.size();
  const std::size_t cells = cfg.n_clips * classes;
  const double rate = classes == 0 ? 0.0 : std::min(1.0, cfg.label_density / static_cast<double>(classes));

  std::vector<std::string> clip_ids;
  std::vector<std::size_t> offsets{0};
  std::vector<ClassIndex> labels;
  std::vector<SegmentTime> times;
  clip_ids.reserve(cfg.n_clips);
  offsets.reserve(cfg.n_clips + 1);
  times.reserve(cfg.n_clips);
  labels.reserve(static_cast<std::size_t>(static_cast<double>(cells) * rate * 1.1) + 16);

  SplitMix64 rng(cfg.seed ^ kLabelsStream);
  SplitMix64 time_rng(cfg.seed ^ kTimesStream);
  const double log_miss = rate < 1.0 ? std::log1p(-rate) : 0.0;
  std::size_t next_hit = cells;
  auto draw_next = [&](std::size_t from) -> std::size_t {
    if (rate <= 0.0) return cells;
    if (rate >= 1.0) return from;
    double gap = std::floor(std::log1p(-rng.uniform()) / log_miss);
    if (gap >= static_cast<double>(cells - from)) return cells;
    return from + static_cast<std::size_t>(gap);
  };
  next_hit = draw_next(0);

  for (std::size_t r = 0; r < cfg.n_clips; ++r) {
    const std::size_t row_end = (r + 1) * classes;
    while (next_hit < row_end) {
      labels.push_back(static_cast<ClassIndex>(next_hit - r * classes));
      next_hit = draw_next(next_hit + 1);
    }
    clip_ids.push_back(clip_name(r));
    offsets.push_back(labels.size());
    double start = 10.0 * static_cast<double>(time_rng.below(30));
    times.push_back({start, start + 10.0});
  }
  return LabelMatrix(std::move(vocab), std::move(clip_ids), std::move(offsets), std::move(labels), std::move(times));
}

// Uniform [0, 1) scores over the labelable vocabulary.
inline ScoreMatrix gen_scores(const SynthConfig& cfg, const OntologyGraph& graph) {
  cfg.validate();
  auto vocab = labelable_vocabulary(graph);
  SplitMix64 rng(cfg.seed ^ kScoresStream);
  std::vector<float> values(cfg.n_clips * vocab.size());
  for (auto& v : values) v = rng.uniform_float();
  std::vector<std::string> clip_ids;
  clip_ids.reserve(cfg.n_clips);
  for (std::size_t r = 0; r < cfg.n_clips; ++r) clip_ids.push_back(clip_name(r));
  return ScoreMatrix(std::move(vocab), std::move(clip_ids), std::move(values));
}

// Reference propagation: keep adding the unique parent of any positive until
// a full pass adds nothing, then keep only classes of the label vocabulary.
// Parents are found by scanning every node's child list (memoized per mid);
// the graph's own parent links are not used.
inline LabelMatrix oracle_propagate(const LabelMatrix& labels, const OntologyGraph& graph,
                                    TraversalPolicy policy = TraversalPolicy::kThroughAll) {
  const auto& vocab = labels.vocab();
  LabelMatrix out(vocab, labels.has_times());
  std::map<std::string, std::vector<std::string>> scanned;
  auto parents_of = [&](const std::string& mid) -> const std::vector<std::string>& {
    auto it = scanned.find(mid);
    if (it != scanned.end()) return it->second;
    std::vector<std::string> parents;
    for (const auto& node : graph.nodes()) {
      for (const auto& child : node.child_mids) {
        if (child == mid) parents.push_back(node.mid);
      }
    }
    return scanned.emplace(mid, std::move(parents)).first->second;
  };
  for (std::size_t r = 0; r < labels.clip_count(); ++r) {
    std::set<std::string> positives;
    for (ClassIndex c : labels.row(r)) positives.insert(vocab.mid(c));
    bool added = true;
    while (added) {
      added = false;
      const std::vector<std::string> snapshot(positives.begin(), positives.end());
      for (const auto& mid : snapshot) {
        const auto& parents = parents_of(mid);
        if (parents.size() != 1) continue;
        const auto& parent = parents.front();
        if (policy == TraversalPolicy::kLabelableOnly && !vocab.contains(parent)) continue;
        if (positives.insert(parent).second) added = true;
      }
    }
    std::vector<ClassIndex> row;
    for (const auto& mid : positives) {
      if (auto idx = vocab.find(mid)) row.push_back(*idx);
    }
    out.append(labels.clip_id(r), std::span<const ClassIndex>(row), labels.time(r));
  }
  return out;
}

struct FixturePaths {
  std::filesystem::path ontology;
  std::filesystem::path class_index;
  std::filesystem::path segments;
  std::filesystem::path scores;
};

// Writes ontology.json, class_labels_indices.csv, segments.csv and
// scores.hlps into `dir` (created if missing).
inline FixturePaths write_fixture(const SynthConfig& cfg, const std::filesystem::path& dir, bool with_scores = true,
                                  unsigned threads = 1) {
  std::filesystem::create_directories(dir);
  FixturePaths paths{dir / "ontology.json", dir / "class_labels_indices.csv", dir / "segments.csv",
                     dir / "scores.hlps"};
  auto graph = gen_ontology(cfg);
  text::write_file_atomic(paths.ontology, write_ontology_json(graph));
  text::write_file_atomic(paths.class_index, write_class_index_csv(labelable_vocabulary(graph)));
  text::write_file_atomic(paths.segments, write_segments_csv(gen_labels(cfg, graph), threads));
  if (with_scores) text::write_file_atomic(paths.scores, write_scores_binary(gen_scores(cfg, graph)));
  return paths;
}

}  // namespace hlp::synth
