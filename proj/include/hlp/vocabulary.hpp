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

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hlp/error.hpp"

namespace hlp {

using ClassIndex = std::uint32_t;

// Identifiers (mids, clip ids) are embedded unquoted in the CSV dialects, so
// they must be non-empty and free of separators, quotes, line breaks and
// surrounding blanks.
inline bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 0xFFFF) return false;
  if (id.front() == ' ' || id.back() == ' ' || id.front() == '\t' || id.back() == '\t') return false;
  return id.find_first_of(",\"\r\n") == std::string_view::npos;
}

inline void require_identifier(std::string_view id, std::string_view what) {
  if (!is_valid_identifier(id)) {
    throw Error(Errc::kInvalidIdentifier, "invalid " + std::string(what) + " '" + std::string(id) + "'",
                {std::string(id)});
  }
}

struct ClassEntry {
  std::string mid;
  std::string display_name;

  bool operator==(const ClassEntry&) const = default;
};

// Ordered class list; the index of a class is its position.
class ClassVocabulary {
 public:
  ClassVocabulary() = default;

  explicit ClassVocabulary(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      require_identifier(entries_[i].mid, "mid");
      auto [it, inserted] = index_.emplace(entries_[i].mid, static_cast<ClassIndex>(i));
      if (!inserted) {
        throw Error(Errc::kDuplicateMid, "duplicate mid " + entries_[i].mid, {entries_[i].mid});
      }
    }
  }

  static ClassVocabulary from_mids(const std::vector<std::string>& mids) {
    std::vector<ClassEntry> entries;
    entries.reserve(mids.size());
    for (const auto& m : mids) entries.push_back({m, ""});
    return ClassVocabulary(std::move(entries));
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ClassEntry>& entries() const { return entries_; }
  const ClassEntry& operator[](ClassIndex i) const { return entries_[i]; }
  const std::string& mid(ClassIndex i) const { return entries_[i].mid; }
  const std::string& display_name(ClassIndex i) const { return entries_[i].display_name; }

  std::optional<ClassIndex> find(std::string_view mid) const {
    auto it = index_.find(mid);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view mid) const { return index_.find(mid) != index_.end(); }

  std::vector<std::string> mids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.mid);
    return out;
  }

  bool operator==(const ClassVocabulary& other) const { return entries_ == other.entries_; }

 private:
  std::vector<ClassEntry> entries_;
  std::map<std::string, ClassIndex, std::less<>> index_;
};

}  // namespace hlp
