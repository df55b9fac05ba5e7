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

// Dataset metadata: class-index CSV, AudioSet segment CSVs (sparse binary
// labels) and dense score matrices in CSV or HLPS binary form.
//
// HLPS layout, all integers little-endian:
//
//   "HLPSCOR1"                       8 bytes
//   clip count N                     u32
//   class count C                    u32
//   C x (u16 length, UTF-8 mid)
//   N x (u16 length, UTF-8 clip id)
//   N*C float32, row-major

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hlp/error.hpp"
#include "hlp/parallel.hpp"
#include "hlp/text.hpp"
#include "hlp/vocabulary.hpp"

namespace hlp {

// ---------------------------------------------------------------------------
// Class index

inline ClassVocabulary parse_class_index_csv(std::string_view raw) {
  text::LineReader lines(raw);
  std::string_view line;
  if (!lines.next(line)) throw Error(Errc::kMissingHeader, "empty class index file");
  if (line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
  auto header = text::split_csv(line);
  if (!header || header->size() != 3 || text::trim((*header)[0]) != "index" || text::trim((*header)[1]) != "mid" ||
      text::trim((*header)[2]) != "display_name") {
    throw Error(Errc::kMissingHeader, "expected header 'index,mid,display_name'");
  }

  std::vector<ClassEntry> entries;
  while (lines.next(line)) {
    if (text::trim(line).empty()) continue;
    const auto where = "line " + std::to_string(lines.line_number());
    auto fields = text::split_csv(line);
    if (!fields || fields->size() != 3) {
      throw Error(Errc::kMalformedRow, where + ": expected 3 fields", {std::to_string(lines.line_number())});
    }
    auto index = text::parse_number<std::uint64_t>(text::trim((*fields)[0]));
    if (!index) throw Error(Errc::kMalformedRow, where + ": bad index", {std::to_string(lines.line_number())});
    if (*index != entries.size()) {
      throw Error(Errc::kNonContiguousIndices,
                  where + ": index " + std::to_string(*index) + " where " + std::to_string(entries.size()) +
                      " was expected",
                  {std::to_string(*index)});
    }
    entries.push_back({std::string(text::trim((*fields)[1])), std::move((*fields)[2])});
  }
  return ClassVocabulary(std::move(entries));
}

inline std::string write_class_index_csv(const ClassVocabulary& vocab) {
  std::string out = "index,mid,display_name\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += std::to_string(i) + "," + vocab.mid(static_cast<ClassIndex>(i)) + "," +
           text::csv_quote(vocab.display_name(static_cast<ClassIndex>(i))) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label matrix

struct SegmentTime {
  double start = 0.0;
  double end = 10.0;

  bool operator==(const SegmentTime&) const = default;
};

// Sparse clip x class binary positives, stored row-compressed. Rows are
// sorted and duplicate-free.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  explicit LabelMatrix(ClassVocabulary vocab, bool with_times = false)
      : vocab_(std::move(vocab)), with_times_(with_times) {}

  // Bulk constructor; validates every invariant.
  LabelMatrix(ClassVocabulary vocab, std::vector<std::string> clip_ids, std::vector<std::size_t> offsets,
              std::vector<ClassIndex> labels, std::vector<SegmentTime> times)
      : vocab_(std::move(vocab)),
        clip_ids_(std::move(clip_ids)),
        offsets_(std::move(offsets)),
        labels_(std::move(labels)),
        times_(std::move(times)),
        with_times_(!times_.empty()) {
    if (offsets_.size() != clip_ids_.size() + 1 || offsets_.front() != 0 || offsets_.back() != labels_.size()) {
      throw Error(Errc::kDimensionMismatch, "row offsets do not match clip count");
    }
    if (with_times_ && times_.size() != clip_ids_.size()) {
      throw Error(Errc::kDimensionMismatch, "segment times do not match clip count");
    }
    for (const auto& id : clip_ids_) require_identifier(id, "clip id");
    for (std::size_t r = 0; r < clip_ids_.size(); ++r) {
      if (offsets_[r] > offsets_[r + 1]) throw Error(Errc::kDimensionMismatch, "row offsets are not monotone");
      for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
        if (labels_[k] >= vocab_.size()) throw Error(Errc::kDimensionMismatch, "class index out of range");
        if (k > offsets_[r] && labels_[k] <= labels_[k - 1]) {
          throw Error(Errc::kDimensionMismatch, "row " + clip_ids_[r] + " is not sorted and duplicate-free");
        }
      }
    }
  }

  // Appends a clip; `labels` may be in any order and contain duplicates.
  void append(std::string clip_id, std::span<const ClassIndex> labels, SegmentTime time = {}) {
    require_identifier(clip_id, "clip id");
    std::size_t begin = labels_.size();
    for (ClassIndex c : labels) {
      if (c >= vocab_.size()) throw Error(Errc::kDimensionMismatch, "class index out of range");
      labels_.push_back(c);
    }
    std::sort(labels_.begin() + static_cast<std::ptrdiff_t>(begin), labels_.end());
    labels_.erase(std::unique(labels_.begin() + static_cast<std::ptrdiff_t>(begin), labels_.end()), labels_.end());
    clip_ids_.push_back(std::move(clip_id));
    offsets_.push_back(labels_.size());
    if (with_times_) times_.push_back(time);
  }

  void append(std::string clip_id, std::initializer_list<ClassIndex> labels, SegmentTime time = {}) {
    append(std::move(clip_id), std::span<const ClassIndex>(labels.begin(), labels.size()), time);
  }

  const ClassVocabulary& vocab() const { return vocab_; }
  std::size_t clip_count() const { return clip_ids_.size(); }
  std::size_t label_count() const { return labels_.size(); }
  const std::vector<std::string>& clip_ids() const { return clip_ids_; }
  const std::string& clip_id(std::size_t row) const { return clip_ids_[row]; }

  std::span<const ClassIndex> row(std::size_t r) const {
    return std::span<const ClassIndex>(labels_).subspan(offsets_[r], offsets_[r + 1] - offsets_[r]);
  }

  bool contains(std::size_t r, ClassIndex c) const {
    auto row_labels = row(r);
    return std::binary_search(row_labels.begin(), row_labels.end(), c);
  }

  bool has_times() const { return with_times_; }
  const std::vector<SegmentTime>& times() const { return times_; }
  SegmentTime time(std::size_t r) const { return with_times_ ? times_[r] : SegmentTime{}; }

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<ClassIndex>& flat_labels() const { return labels_; }

  bool operator==(const LabelMatrix& other) const {
    return vocab_ == other.vocab_ && clip_ids_ == other.clip_ids_ && offsets_ == other.offsets_ &&
           labels_ == other.labels_ && times_ == other.times_ &&
           (clip_ids_.empty() || with_times_ == other.with_times_);
  }

 private:
  ClassVocabulary vocab_;
  std::vector<std::string> clip_ids_;
  std::vector<std::size_t> offsets_{0};
  std::vector<ClassIndex> labels_;
  std::vector<SegmentTime> times_;
  bool with_times_ = false;
};

// ---------------------------------------------------------------------------
// Segment CSV

struct SegmentsParseOptions {
  // Drop (and count) mids missing from the vocabulary instead of failing.
  bool lenient = false;
};

struct DroppedLabels {
  std::size_t total = 0;
  std::map<std::string, std::size_t> by_mid;
};

namespace detail {

inline Error malformed_row(std::size_t line, const std::string& why) {
  return Error(Errc::kMalformedRow, "line " + std::to_string(line) + ": " + why, {std::to_string(line)});
}

// Reads "field," (up to the next comma) and advances past the comma.
inline std::optional<std::string_view> take_field(std::string_view& rest) {
  auto comma = rest.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  auto field = text::trim(rest.substr(0, comma));
  rest.remove_prefix(comma + 1);
  return field;
}

}  // namespace detail

// Rows look like `YTID, start_seconds, end_seconds, "mid1,mid2,..."`; lines
// starting with '#' and blank lines are skipped.
inline LabelMatrix parse_segments_csv(std::string_view raw, const ClassVocabulary& vocab,
                                      const SegmentsParseOptions& options = {}, DroppedLabels* dropped = nullptr) {
  std::vector<std::string> clip_ids;
  std::vector<std::size_t> offsets{0};
  std::vector<ClassIndex> labels;
  std::vector<SegmentTime> times;
  clip_ids.reserve(raw.size() / 48);
  offsets.reserve(raw.size() / 48);
  times.reserve(raw.size() / 48);

  text::LineReader lines(raw);
  std::string_view line;
  while (lines.next(line)) {
    const std::size_t ln = lines.line_number();
    auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    std::string_view rest = trimmed;
    auto ytid = detail::take_field(rest);
    auto start = ytid ? detail::take_field(rest) : std::nullopt;
    auto end = start ? detail::take_field(rest) : std::nullopt;
    if (!end) throw detail::malformed_row(ln, "expected 'YTID, start, end, \"labels\"'");
    if (!is_valid_identifier(*ytid)) throw detail::malformed_row(ln, "bad clip id");
    auto start_s = text::parse_number<double>(*start);
    auto end_s = text::parse_number<double>(*end);
    if (!start_s || !end_s || !std::isfinite(*start_s) || !std::isfinite(*end_s)) {
      throw detail::malformed_row(ln, "bad segment time");
    }

    std::string_view label_list = text::trim(rest);
    if (!label_list.empty() && label_list.front() == '"') {
      if (label_list.size() < 2 || label_list.back() != '"') throw detail::malformed_row(ln, "unterminated label list");
      label_list = label_list.substr(1, label_list.size() - 2);
      if (label_list.find('"') != std::string_view::npos) throw detail::malformed_row(ln, "stray quote");
    } else if (label_list.find('"') != std::string_view::npos) {
      throw detail::malformed_row(ln, "stray quote");
    }

    const std::size_t row_begin = labels.size();
    while (!label_list.empty()) {
      auto comma = label_list.find(',');
      auto mid = text::trim(label_list.substr(0, comma));
      label_list = comma == std::string_view::npos ? std::string_view{} : label_list.substr(comma + 1);
      if (mid.empty()) {
        if (comma == std::string_view::npos && label_list.empty()) break;
        throw detail::malformed_row(ln, "empty label");
      }
      auto idx = vocab.find(mid);
      if (!idx) {
        if (!options.lenient) {
          throw Error(Errc::kUnknownMid,
                      "line " + std::to_string(ln) + ": clip " + std::string(*ytid) + " has unknown mid " +
                          std::string(mid),
                      {std::string(*ytid), std::string(mid)});
        }
        if (dropped) {
          ++dropped->total;
          ++dropped->by_mid[std::string(mid)];
        }
        continue;
      }
      labels.push_back(*idx);
    }
    auto row_start = labels.begin() + static_cast<std::ptrdiff_t>(row_begin);
    std::sort(row_start, labels.end());
    labels.erase(std::unique(row_start, labels.end()), labels.end());

    clip_ids.emplace_back(*ytid);
    offsets.push_back(labels.size());
    times.push_back({*start_s, *end_s});
  }
  return LabelMatrix(vocab, std::move(clip_ids), std::move(offsets), std::move(labels), std::move(times));
}

namespace detail {

inline void append_segment_rows(const LabelMatrix& labels, std::size_t begin, std::size_t end, std::string& out) {
  const auto& vocab = labels.vocab();
  for (std::size_t r = begin; r < end; ++r) {
    SegmentTime t = labels.time(r);
    out += labels.clip_id(r);
    out += ", ";
    out += text::format_seconds(t.start);
    out += ", ";
    out += text::format_seconds(t.end);
    out += ", \"";
    bool first = true;
    for (ClassIndex c : labels.row(r)) {
      if (!first) out.push_back(',');
      out += vocab.mid(c);
      first = false;
    }
    out += "\"\n";
  }
}

}  // namespace detail

// Emits the dialect parse_segments_csv reads. Rows without stored times are
// written as `0.000, 10.000`. Output bytes do not depend on `threads`.
inline std::string write_segments_csv(const LabelMatrix& labels, unsigned threads = 1) {
  std::size_t distinct = 0;
  {
    std::vector<char> seen(labels.vocab().size(), 0);
    for (ClassIndex c : labels.flat_labels()) {
      if (!seen[c]) {
        seen[c] = 1;
        ++distinct;
      }
    }
  }
  std::string out = "# num_ytids=" + std::to_string(labels.clip_count()) +
                    ", num_segs=" + std::to_string(labels.clip_count()) +
                    ", num_unique_labels=" + std::to_string(distinct) +
                    ", num_positive_labels=" + std::to_string(labels.label_count()) + "\n";
  out += "# YTID, start_seconds, end_seconds, positive_labels\n";

  auto chunks = split_range(labels.clip_count(), std::max(1u, threads));
  std::vector<std::string> parts(chunks.size());
  parallel_chunks(labels.clip_count(), threads, [&](const Chunk& chunk) {
    parts[chunk.index].reserve((chunk.end - chunk.begin) * 48);
    detail::append_segment_rows(labels, chunk.begin, chunk.end, parts[chunk.index]);
  });
  std::size_t total = out.size();
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (const auto& p : parts) out += p;
  return out;
}

// ---------------------------------------------------------------------------
// Score matrix

// Dense clip x class real scores, row-major, all finite.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;

  ScoreMatrix(ClassVocabulary vocab, std::vector<std::string> clip_ids, std::vector<float> values)
      : vocab_(std::move(vocab)), clip_ids_(std::move(clip_ids)), values_(std::move(values)) {
    if (values_.size() != clip_ids_.size() * vocab_.size()) {
      throw Error(Errc::kDimensionMismatch, "score count " + std::to_string(values_.size()) + " != " +
                                                std::to_string(clip_ids_.size()) + " clips x " +
                                                std::to_string(vocab_.size()) + " classes");
    }
    for (const auto& id : clip_ids_) require_identifier(id, "clip id");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) throw non_finite(i);
    }
  }

  const ClassVocabulary& vocab() const { return vocab_; }
  std::size_t clip_count() const { return clip_ids_.size(); }
  std::size_t class_count() const { return vocab_.size(); }
  const std::vector<std::string>& clip_ids() const { return clip_ids_; }
  const std::string& clip_id(std::size_t r) const { return clip_ids_[r]; }

  float at(std::size_t r, ClassIndex c) const { return values_[r * vocab_.size() + c]; }
  std::span<const float> row(std::size_t r) const {
    return std::span<const float>(values_).subspan(r * vocab_.size(), vocab_.size());
  }
  const std::vector<float>& values() const { return values_; }

  bool operator==(const ScoreMatrix& other) const {
    return vocab_ == other.vocab_ && clip_ids_ == other.clip_ids_ && values_ == other.values_;
  }

 private:
  Error non_finite(std::size_t flat) const {
    const auto& clip = clip_ids_[flat / vocab_.size()];
    const auto& mid = vocab_.mid(static_cast<ClassIndex>(flat % vocab_.size()));
    return Error(Errc::kNonFiniteValue, "non-finite score for clip " + clip + ", class " + mid, {clip, mid});
  }

  ClassVocabulary vocab_;
  std::vector<std::string> clip_ids_;
  std::vector<float> values_;
};

enum class ScoreFormat { kCsv, kBinary };

inline constexpr std::string_view kHlpsMagic = "HLPSCOR1";

// Header `clip_id,<mid1>,...`, then one row of decimal values per clip.
inline std::string write_scores_csv(const ScoreMatrix& scores, unsigned threads = 1) {
  std::string out = "clip_id";
  for (const auto& e : scores.vocab().entries()) out += "," + e.mid;
  out += "\n";
  auto chunks = split_range(scores.clip_count(), std::max(1u, threads));
  std::vector<std::string> parts(chunks.size());
  parallel_chunks(scores.clip_count(), threads, [&](const Chunk& chunk) {
    auto& part = parts[chunk.index];
    char buf[32];
    for (std::size_t r = chunk.begin; r < chunk.end; ++r) {
      part += scores.clip_id(r);
      for (float v : scores.row(r)) {
        part.push_back(',');
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        part.append(buf, ptr);
      }
      part.push_back('\n');
    }
  });
  for (const auto& p : parts) out += p;
  return out;
}

inline ScoreMatrix read_scores_csv(std::string_view raw) {
  text::LineReader lines(raw);
  std::string_view line;
  if (!lines.next(line)) throw Error(Errc::kMissingHeader, "empty score file");
  auto header = text::split_csv(line);
  if (!header || header->empty() || text::trim((*header)[0]) != "clip_id") {
    throw Error(Errc::kMissingHeader, "expected header 'clip_id,<mid1>,<mid2>,...'");
  }
  std::vector<std::string> mids;
  for (std::size_t i = 1; i < header->size(); ++i) mids.emplace_back(text::trim((*header)[i]));
  auto vocab = ClassVocabulary::from_mids(mids);
  const std::size_t classes = vocab.size();

  std::vector<std::string> clip_ids;
  std::vector<float> values;
  while (lines.next(line)) {
    const std::size_t ln = lines.line_number();
    if (text::trim(line).empty()) continue;
    std::string_view rest = line;
    auto comma = rest.find(',');
    std::string clip(text::trim(rest.substr(0, comma)));
    if (!is_valid_identifier(clip)) throw detail::malformed_row(ln, "bad clip id");
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    std::size_t count = 0;
    bool more = comma != std::string_view::npos;
    bool extra = false;
    while (more) {
      if (count >= classes) {
        extra = true;
        break;
      }
      comma = rest.find(',');
      auto field = text::trim(rest.substr(0, comma));
      more = comma != std::string_view::npos;
      rest = more ? rest.substr(comma + 1) : std::string_view{};
      auto v = text::parse_number<float>(field);
      if (!v) throw detail::malformed_row(ln, "bad score '" + std::string(field) + "'");
      if (!std::isfinite(*v)) {
        const auto& mid = vocab.mid(static_cast<ClassIndex>(count));
        throw Error(Errc::kNonFiniteValue,
                    "line " + std::to_string(ln) + ": non-finite score for clip " + clip + ", class " + mid,
                    {clip, mid});
      }
      values.push_back(*v);
      ++count;
    }
    if (count != classes || extra) {
      throw Error(Errc::kDimensionMismatch,
                  "line " + std::to_string(ln) + ": expected " + std::to_string(classes) + " scores",
                  {std::to_string(ln)});
    }
    clip_ids.push_back(std::move(clip));
  }
  return ScoreMatrix(std::move(vocab), std::move(clip_ids), std::move(values));
}

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_string16(std::string& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw Error(Errc::kInvalidIdentifier, "identifier longer than 65535 bytes", {s});
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint16_t u16() {
    auto b = take(2);
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[0]) | (static_cast<unsigned char>(b[1]) << 8));
  }
  std::string string16() { return std::string(take(u16())); }

  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) throw Error(Errc::kDimensionMismatch, "HLPS file is truncated");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string write_scores_binary(const ScoreMatrix& scores) {
  std::string out(kHlpsMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(scores.clip_count()));
  detail::put_u32(out, static_cast<std::uint32_t>(scores.class_count()));
  for (const auto& e : scores.vocab().entries()) detail::put_string16(out, e.mid);
  for (const auto& id : scores.clip_ids()) detail::put_string16(out, id);
  const auto& values = scores.values();
  const std::size_t payload_at = out.size();
  out.resize(payload_at + values.size() * 4);
  char* dst = out.data() + payload_at;
  for (float v : values) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) *dst++ = static_cast<char>((bits >> (8 * i)) & 0xFF);
  }
  return out;
}

inline ScoreMatrix read_scores_binary(std::string_view raw) {
  if (raw.size() < kHlpsMagic.size() || raw.substr(0, kHlpsMagic.size()) != kHlpsMagic) {
    throw Error(Errc::kBadMagic, "not an HLPS score file");
  }
  detail::ByteReader in(raw.substr(kHlpsMagic.size()));
  const std::uint32_t clips = in.u32();
  const std::uint32_t classes = in.u32();
  std::vector<std::string> mids;
  mids.reserve(classes);
  for (std::uint32_t i = 0; i < classes; ++i) mids.push_back(in.string16());
  std::vector<std::string> clip_ids;
  clip_ids.reserve(clips);
  for (std::uint32_t i = 0; i < clips; ++i) clip_ids.push_back(in.string16());
  const std::size_t expected = static_cast<std::size_t>(clips) * classes * 4;
  if (in.remaining() != expected) {
    throw Error(Errc::kDimensionMismatch, "payload holds " + std::to_string(in.remaining()) + " bytes, expected " +
                                              std::to_string(expected));
  }
  auto payload = in.take(expected);
  std::vector<float> values(static_cast<std::size_t>(clips) * classes);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(payload[i * 4 + static_cast<std::size_t>(b)]);
    values[i] = std::bit_cast<float>(bits);
  }
  return ScoreMatrix(ClassVocabulary::from_mids(mids), std::move(clip_ids), std::move(values));
}

inline std::string write_scores(const ScoreMatrix& scores, ScoreFormat format, unsigned threads = 1) {
  return format == ScoreFormat::kBinary ? write_scores_binary(scores) : write_scores_csv(scores, threads);
}

// Picks the format from the leading magic bytes.
inline ScoreMatrix read_scores(std::string_view raw) {
  if (raw.starts_with(kHlpsMagic)) return read_scores_binary(raw);
  return read_scores_csv(raw);
}

inline ScoreMatrix read_scores(std::string_view raw, ScoreFormat format) {
  return format == ScoreFormat::kBinary ? read_scores_binary(raw) : read_scores_csv(raw);
}

}  // namespace hlp
