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

// Class-wise average precision and macro mAP for multi-label tagging.
//
// AP of one class: rank clips by descending score (ties keep the original clip
// order), then average precision@k over the ranks k that hold a positive.
// Classes without positives have no AP and are left out of the mean.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlp/error.hpp"
#include "hlp/labelset.hpp"
#include "hlp/parallel.hpp"
#include "hlp/text.hpp"
#include "hlp/vocabulary.hpp"

namespace hlp {

template <std::floating_point T>
std::optional<double> average_precision(std::span<const T> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::kLengthMismatch,
                std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(Errc::kNonFiniteValue, "score #" + std::to_string(i) + " is not finite");
  }
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return scores[a] > scores[b]; });

  std::size_t hits = 0;
  double precision_sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (labels[order[k]]) {
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return precision_sum / static_cast<double>(hits);
}

template <std::floating_point T>
std::optional<double> average_precision(const std::vector<T>& scores, const std::vector<std::uint8_t>& labels) {
  return average_precision(std::span<const T>(scores), std::span<const std::uint8_t>(labels));
}

// Classes of `a` that also occur in `b`, in `a`'s order, reindexed from 0.
inline ClassVocabulary restrict_to_shared_vocab(const ClassVocabulary& a, const ClassVocabulary& b) {
  std::vector<ClassEntry> shared;
  for (const auto& e : a.entries()) {
    if (b.contains(e.mid)) shared.push_back(e);
  }
  return ClassVocabulary(std::move(shared));
}

struct ClassAp {
  std::string mid;
  std::string display_name;
  std::optional<double> ap;
  std::size_t positives = 0;

  bool operator==(const ClassAp&) const = default;
};

struct EvalReport {
  std::vector<ClassAp> per_class;
  // Mean of the defined APs; empty when no class has a positive.
  std::optional<double> map;
  std::size_t classes_evaluated = 0;
  std::size_t classes_skipped = 0;

  bool operator==(const EvalReport&) const = default;
};

// `class_subset` defaults to the classes shared by both matrices (in the
// label vocabulary's order).
inline EvalReport mean_average_precision(const ScoreMatrix& scores, const LabelMatrix& labels,
                                         const ClassVocabulary* class_subset = nullptr, unsigned threads = 1) {
  if (scores.clip_ids() != labels.clip_ids()) {
    throw Error(Errc::kClipMismatch, "score and label files list different clips (or a different order)");
  }
  ClassVocabulary subset = class_subset ? *class_subset : restrict_to_shared_vocab(labels.vocab(), scores.vocab());
  if (subset.empty()) throw Error(Errc::kEmptySubset, "no classes to evaluate");

  std::vector<ClassIndex> score_col(subset.size()), label_col(subset.size());
  std::vector<std::size_t> slot_of_label_class(labels.vocab().size(), SIZE_MAX);
  for (ClassIndex i = 0; i < subset.size(); ++i) {
    const auto& mid = subset.mid(i);
    auto s = scores.vocab().find(mid);
    auto l = labels.vocab().find(mid);
    if (!s || !l) throw Error(Errc::kUnknownMid, "evaluation class " + mid + " is missing from the scores or labels", {mid});
    score_col[i] = *s;
    label_col[i] = *l;
    slot_of_label_class[*l] = i;
  }

  // Positive clips per evaluated class.
  std::vector<std::vector<std::uint32_t>> positive_rows(subset.size());
  for (std::size_t r = 0; r < labels.clip_count(); ++r) {
    for (ClassIndex c : labels.row(r)) {
      if (slot_of_label_class[c] != SIZE_MAX) positive_rows[slot_of_label_class[c]].push_back(static_cast<std::uint32_t>(r));
    }
  }

  EvalReport report;
  report.per_class.resize(subset.size());
  const std::size_t clips = scores.clip_count();
  parallel_chunks(subset.size(), threads, [&](const Chunk& chunk) {
    std::vector<float> column(clips);
    std::vector<std::uint8_t> truth(clips);
    for (std::size_t i = chunk.begin; i < chunk.end; ++i) {
      const auto& values = scores.values();
      const std::size_t width = scores.class_count();
      for (std::size_t r = 0; r < clips; ++r) column[r] = values[r * width + score_col[i]];
      std::fill(truth.begin(), truth.end(), 0);
      for (auto r : positive_rows[i]) truth[r] = 1;
      auto& entry = report.per_class[i];
      entry.mid = subset.mid(static_cast<ClassIndex>(i));
      entry.display_name = subset.display_name(static_cast<ClassIndex>(i));
      if (entry.display_name.empty()) entry.display_name = labels.vocab().display_name(label_col[i]);
      entry.positives = positive_rows[i].size();
      entry.ap = average_precision(std::span<const float>(column), std::span<const std::uint8_t>(truth));
    }
  });

  double sum = 0.0;
  for (const auto& c : report.per_class) {
    if (c.ap) {
      sum += *c.ap;
      ++report.classes_evaluated;
    } else {
      ++report.classes_skipped;
    }
  }
  if (report.classes_evaluated > 0) report.map = sum / static_cast<double>(report.classes_evaluated);
  return report;
}

inline EvalReport mean_average_precision(const ScoreMatrix& scores, const LabelMatrix& labels,
                                         const ClassVocabulary& class_subset, unsigned threads = 1) {
  return mean_average_precision(scores, labels, &class_subset, threads);
}

inline std::string render_eval_text(const EvalReport& report) {
  std::string out = "mAP: " + (report.map ? text::format_fixed(*report.map, 6) : std::string("undefined")) + "\n";
  out += "Classes evaluated: " + std::to_string(report.classes_evaluated) + "\n";
  out += "Classes skipped (no positives): " + std::to_string(report.classes_skipped) + "\n";
  out += "\nmid\tpositives\tAP\tname\n";
  for (const auto& c : report.per_class) {
    out += c.mid + "\t" + std::to_string(c.positives) + "\t" + (c.ap ? text::format_fixed(*c.ap, 6) : "-") + "\t" +
           c.display_name + "\n";
  }
  return out;
}

inline std::string render_eval_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["map"] = report.map ? nlohmann::ordered_json(*report.map) : nlohmann::ordered_json();
  j["classes_evaluated"] = report.classes_evaluated;
  j["classes_skipped"] = report.classes_skipped;
  auto per_class = nlohmann::ordered_json::array();
  for (const auto& c : report.per_class) {
    nlohmann::ordered_json e;
    e["mid"] = c.mid;
    e["name"] = c.display_name;
    e["ap"] = c.ap ? nlohmann::ordered_json(*c.ap) : nlohmann::ordered_json();
    e["positives"] = c.positives;
    per_class.push_back(std::move(e));
  }
  j["per_class"] = std::move(per_class);
  return j.dump(2) + "\n";
}

}  // namespace hlp
