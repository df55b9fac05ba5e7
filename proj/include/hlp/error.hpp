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

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hlp {

enum class Errc {
  kMalformedJson,
  kDuplicateMid,
  kUnknownChild,
  kCycleDetected,
  kUnknownVocabMid,
  kMissingHeader,
  kNonContiguousIndices,
  kUnknownMid,
  kMalformedRow,
  kBadMagic,
  kDimensionMismatch,
  kNonFiniteValue,
  kLengthMismatch,
  kClipMismatch,
  kVocabMismatch,
  kEmptySubset,
  kInvalidIdentifier,
  kInvalidConfig,
  kIo,
};

inline constexpr std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kMalformedJson: return "MalformedJson";
    case Errc::kDuplicateMid: return "DuplicateMid";
    case Errc::kUnknownChild: return "UnknownChild";
    case Errc::kCycleDetected: return "CycleDetected";
    case Errc::kUnknownVocabMid: return "UnknownVocabMid";
    case Errc::kMissingHeader: return "MissingHeader";
    case Errc::kNonContiguousIndices: return "NonContiguousIndices";
    case Errc::kUnknownMid: return "UnknownMid";
    case Errc::kMalformedRow: return "MalformedRow";
    case Errc::kBadMagic: return "BadMagic";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kNonFiniteValue: return "NonFiniteValue";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kClipMismatch: return "ClipMismatch";
    case Errc::kVocabMismatch: return "VocabMismatch";
    case Errc::kEmptySubset: return "EmptySubset";
    case Errc::kInvalidIdentifier: return "InvalidIdentifier";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

// Every data/validation failure raised by the library. `detail()` carries the
// structured payload of the error kind (offending mids, the witness cycle of
// CycleDetected, the clip id and class of NonFiniteValue, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::vector<std::string> detail = {})
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const std::vector<std::string>& detail() const noexcept { return detail_; }

  // Same error, with `context` (usually a file name) prefixed to the message.
  Error with_context(std::string_view context) const {
    std::string msg = what();
    auto colon = msg.find(": ");
    std::string body = colon == std::string::npos ? msg : msg.substr(colon + 2);
    return Error(code_, std::string(context) + ": " + body, detail_);
  }

 private:
  Errc code_;
  std::vector<std::string> detail_;
};

}  // namespace hlp
