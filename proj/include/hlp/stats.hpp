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

// Label-distribution accounting between two revisions of a label matrix
// (typically the raw labels and their propagated counterpart).

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlp/error.hpp"
#include "hlp/labelset.hpp"
#include "hlp/text.hpp"

namespace hlp {

struct ClassChange {
  std::string mid;
  std::string display_name;
  std::uint64_t count_before = 0;
  std::uint64_t count_after = 0;
  // count_after / count_before; empty when count_before is 0.
  std::optional<double> ratio;

  bool operator==(const ClassChange&) const = default;
};

struct HlpReport {
  std::uint64_t clip_count = 0;
  std::uint64_t total_before = 0;
  std::uint64_t total_after = 0;
  double avg_before = 0.0;
  double avg_after = 0.0;
  std::uint64_t affected_classes = 0;
  std::uint64_t affected_clips = 0;
  // Sorted by descending ratio, then mid; undefined ratios last.
  std::vector<ClassChange> per_class;

  // Relative change of the label total, in percent.
  double growth_percent() const {
    if (total_before == 0) return 0.0;
    return 100.0 * (static_cast<double>(total_after) - static_cast<double>(total_before)) /
           static_cast<double>(total_before);
  }

  const ClassChange* find(std::string_view mid) const {
    for (const auto& c : per_class) {
      if (c.mid == mid) return &c;
    }
    return nullptr;
  }

  bool operator==(const HlpReport&) const = default;
};

namespace detail {

inline void sort_changes(std::vector<ClassChange>& changes) {
  std::sort(changes.begin(), changes.end(), [](const ClassChange& a, const ClassChange& b) {
    if (a.ratio.has_value() != b.ratio.has_value()) return a.ratio.has_value();
    if (a.ratio && *a.ratio != *b.ratio) return *a.ratio > *b.ratio;
    return a.mid < b.mid;
  });
}

}  // namespace detail

// Counts clips whose label set changed in either direction, so arbitrary
// label revisions can be compared, not only propagated ones.
inline HlpReport diff_label_matrices(const LabelMatrix& before, const LabelMatrix& after) {
  if (before.clip_ids() != after.clip_ids()) {
    throw Error(Errc::kClipMismatch, "before/after label files list different clips (or a different order)");
  }
  if (before.vocab().mids() != after.vocab().mids()) {
    throw Error(Errc::kVocabMismatch, "before/after label files use different class vocabularies");
  }
  const auto& vocab = before.vocab();
  std::vector<std::uint64_t> count_before(vocab.size(), 0), count_after(vocab.size(), 0);
  for (ClassIndex c : before.flat_labels()) ++count_before[c];
  for (ClassIndex c : after.flat_labels()) ++count_after[c];

  HlpReport report;
  report.clip_count = before.clip_count();
  report.total_before = before.label_count();
  report.total_after = after.label_count();
  if (report.clip_count > 0) {
    report.avg_before = static_cast<double>(report.total_before) / static_cast<double>(report.clip_count);
    report.avg_after = static_cast<double>(report.total_after) / static_cast<double>(report.clip_count);
  }
  for (std::size_t r = 0; r < before.clip_count(); ++r) {
    auto a = before.row(r);
    auto b = after.row(r);
    if (!std::equal(a.begin(), a.end(), b.begin(), b.end())) ++report.affected_clips;
  }
  report.per_class.reserve(vocab.size());
  for (ClassIndex c = 0; c < vocab.size(); ++c) {
    ClassChange change{vocab.mid(c), vocab.display_name(c), count_before[c], count_after[c], std::nullopt};
    if (change.count_before > 0) {
      change.ratio = static_cast<double>(change.count_after) / static_cast<double>(change.count_before);
    }
    if (change.count_before != change.count_after) ++report.affected_classes;
    report.per_class.push_back(std::move(change));
  }
  detail::sort_changes(report.per_class);
  return report;
}

// 3849976 -> "3.85M"
inline std::string format_millions(std::uint64_t n) {
  return text::format_fixed(static_cast<double>(n) / 1e6, 2) + "M";
}

enum class ReportFormat { kText, kJson, kCsv };

inline std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  return std::nullopt;
}

inline std::string render_report_text(const HlpReport& r) {
  const std::string growth = (r.growth_percent() >= 0 ? "+" : "") + text::format_fixed(r.growth_percent(), 1) + "%";
  std::string out;
  out += "Clips: " + text::with_thousands(r.clip_count) + "\n";
  out += "Affected classes: " + text::with_thousands(r.affected_classes) + "\n";
  out += "Affected audios: " + text::with_thousands(r.affected_clips) + "\n";
  out += "Total labels: " + format_millions(r.total_before) + " -> " + format_millions(r.total_after) + " (" +
         text::with_thousands(r.total_before) + " -> " + text::with_thousands(r.total_after) + ", " + growth + ")\n";
  out += "Avg. labels / clip: " + text::format_fixed(r.avg_before, 2) + " -> " + text::format_fixed(r.avg_after, 2) +
         "\n";
  out += "\nmid\tbefore\tafter\tratio\tname\n";
  for (const auto& c : r.per_class) {
    out += c.mid + "\t" + std::to_string(c.count_before) + "\t" + std::to_string(c.count_after) + "\t" +
           (c.ratio ? "x" + text::format_fixed(*c.ratio, 2) : std::string("n/a")) + "\t" + c.display_name + "\n";
  }
  return out;
}

inline std::string render_report_json(const HlpReport& r) {
  nlohmann::ordered_json j;
  auto& s = j["summary"];
  s["total_before"] = r.total_before;
  s["total_after"] = r.total_after;
  s["avg_before"] = r.avg_before;
  s["avg_after"] = r.avg_after;
  s["affected_classes"] = r.affected_classes;
  s["affected_clips"] = r.affected_clips;
  s["clip_count"] = r.clip_count;
  auto per_class = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class) {
    nlohmann::ordered_json e;
    e["mid"] = c.mid;
    e["name"] = c.display_name;
    e["before"] = c.count_before;
    e["after"] = c.count_after;
    e["ratio"] = c.ratio ? nlohmann::ordered_json(*c.ratio) : nlohmann::ordered_json();
    per_class.push_back(std::move(e));
  }
  j["per_class"] = std::move(per_class);
  return j.dump(2) + "\n";
}

// Summary as leading `# key=value` lines, then one row per class.
inline std::string render_report_csv(const HlpReport& r) {
  std::string out;
  out += "# clip_count=" + std::to_string(r.clip_count) + "\n";
  out += "# total_before=" + std::to_string(r.total_before) + "\n";
  out += "# total_after=" + std::to_string(r.total_after) + "\n";
  out += "# avg_before=" + text::format_double(r.avg_before) + "\n";
  out += "# avg_after=" + text::format_double(r.avg_after) + "\n";
  out += "# affected_classes=" + std::to_string(r.affected_classes) + "\n";
  out += "# affected_clips=" + std::to_string(r.affected_clips) + "\n";
  out += "mid,name,before,after,ratio\n";
  for (const auto& c : r.per_class) {
    out += c.mid + "," + text::csv_quote(c.display_name) + "," + std::to_string(c.count_before) + "," +
           std::to_string(c.count_after) + "," + (c.ratio ? text::format_double(*c.ratio) : std::string()) + "\n";
  }
  return out;
}

inline std::string render_report(const HlpReport& r, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return render_report_json(r);
    case ReportFormat::kCsv: return render_report_csv(r);
    case ReportFormat::kText: break;
  }
  return render_report_text(r);
}

inline HlpReport report_from_json(std::string_view raw) {
  HlpReport r;
  try {
    auto j = nlohmann::json::parse(raw.begin(), raw.end());
    const auto& s = j.at("summary");
    r.total_before = s.at("total_before").get<std::uint64_t>();
    r.total_after = s.at("total_after").get<std::uint64_t>();
    r.avg_before = s.at("avg_before").get<double>();
    r.avg_after = s.at("avg_after").get<double>();
    r.affected_classes = s.at("affected_classes").get<std::uint64_t>();
    r.affected_clips = s.at("affected_clips").get<std::uint64_t>();
    r.clip_count = s.at("clip_count").get<std::uint64_t>();
    for (const auto& e : j.at("per_class")) {
      ClassChange c;
      c.mid = e.at("mid").get<std::string>();
      c.display_name = e.at("name").get<std::string>();
      c.count_before = e.at("before").get<std::uint64_t>();
      c.count_after = e.at("after").get<std::uint64_t>();
      if (!e.at("ratio").is_null()) c.ratio = e.at("ratio").get<double>();
      r.per_class.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kMalformedJson, e.what());
  }
  return r;
}

inline HlpReport report_from_csv(std::string_view raw) {
  HlpReport r;
  text::LineReader lines(raw);
  std::string_view line;
  bool header_seen = false;
  auto bad = [&](const std::string& why) {
    return Error(Errc::kMalformedRow, "line " + std::to_string(lines.line_number()) + ": " + why);
  };
  while (lines.next(line)) {
    if (line.starts_with("# ")) {
      auto kv = line.substr(2);
      auto eq = kv.find('=');
      if (eq == std::string_view::npos) throw bad("expected key=value");
      auto key = kv.substr(0, eq);
      auto value = kv.substr(eq + 1);
      auto as_u64 = [&] {
        auto v = text::parse_number<std::uint64_t>(value);
        if (!v) throw bad("bad integer");
        return *v;
      };
      auto as_double = [&] {
        auto v = text::parse_number<double>(value);
        if (!v) throw bad("bad number");
        return *v;
      };
      if (key == "clip_count") r.clip_count = as_u64();
      else if (key == "total_before") r.total_before = as_u64();
      else if (key == "total_after") r.total_after = as_u64();
      else if (key == "avg_before") r.avg_before = as_double();
      else if (key == "avg_after") r.avg_after = as_double();
      else if (key == "affected_classes") r.affected_classes = as_u64();
      else if (key == "affected_clips") r.affected_clips = as_u64();
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != 5) throw bad("expected 5 fields");
    ClassChange c;
    c.mid = (*fields)[0];
    c.display_name = (*fields)[1];
    auto before = text::parse_number<std::uint64_t>((*fields)[2]);
    auto after = text::parse_number<std::uint64_t>((*fields)[3]);
    if (!before || !after) throw bad("bad count");
    c.count_before = *before;
    c.count_after = *after;
    if (!(*fields)[4].empty()) {
      auto ratio = text::parse_number<double>((*fields)[4]);
      if (!ratio) throw bad("bad ratio");
      c.ratio = *ratio;
    }
    r.per_class.push_back(std::move(c));
  }
  return r;
}

}  // namespace hlp
