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

#include <atomic>
#include <random>
#include <stdexcept>

#include "gtest/gtest.h"
#include "hlp/error.hpp"
#include "hlp/parallel.hpp"
#include "hlp/text.hpp"

namespace hlp {
namespace {

TEST(ErrorTest, CarriesCodeAndDetail) {
  Error e(Errc::kUnknownChild, "node /a lists unknown child /b", {"/a", "/b"});
  EXPECT_EQ(e.code(), Errc::kUnknownChild);
  EXPECT_STREQ(e.what(), "UnknownChild: node /a lists unknown child /b");
  ASSERT_EQ(e.detail().size(), 2u);

  Error ctx = e.with_context("ontology.json");
  EXPECT_EQ(ctx.code(), Errc::kUnknownChild);
  EXPECT_STREQ(ctx.what(), "UnknownChild: ontology.json: node /a lists unknown child /b");
  EXPECT_EQ(ctx.detail(), e.detail());
}

TEST(TextTest, FloatFormattingIsShortestRoundTrip) {
  EXPECT_EQ(text::format_float(0.5f), "0.5");
  EXPECT_EQ(text::format_float(-1.25f), "-1.25");
  EXPECT_EQ(text::format_float(0.1f), "0.1");

  std::mt19937 rng(5);
  std::uniform_real_distribution<float> dist(-1e6f, 1e6f);
  for (int i = 0; i < 2000; ++i) {
    float v = dist(rng);
    std::string s = text::format_float(v);
    auto back = text::parse_number<float>(s);
    ASSERT_TRUE(back.has_value()) << s;
    EXPECT_EQ(*back, v);
    std::size_t digits = 0;
    for (char c : s) digits += (c >= '0' && c <= '9');
    EXPECT_LE(digits, 9u + 2u) << s;  // at most 9 significant digits (plus exponent digits)
  }
}

TEST(TextTest, SecondsPreferThreeDecimals) {
  EXPECT_EQ(text::format_seconds(0.0), "0.000");
  EXPECT_EQ(text::format_seconds(30.0), "30.000");
  EXPECT_EQ(text::format_seconds(12.5), "12.500");
  // Not representable with three decimals: falls back to the shortest form.
  EXPECT_EQ(text::format_seconds(0.1234567), "0.1234567");
  EXPECT_EQ(*text::parse_number<double>(text::format_seconds(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(TextTest, ParseNumberRejectsJunk) {
  EXPECT_FALSE(text::parse_number<double>("").has_value());
  EXPECT_FALSE(text::parse_number<double>("1.0x").has_value());
  EXPECT_FALSE(text::parse_number<unsigned>("-1").has_value());
  EXPECT_EQ(text::parse_number<double>("+2.5"), 2.5);
}

TEST(TextTest, ThousandsSeparators) {
  EXPECT_EQ(text::with_thousands(0), "0");
  EXPECT_EQ(text::with_thousands(999), "999");
  EXPECT_EQ(text::with_thousands(1000), "1,000");
  EXPECT_EQ(text::with_thousands(513773), "513,773");
  EXPECT_EQ(text::with_thousands(1921982), "1,921,982");
}

TEST(TextTest, SplitCsvHandlesQuotes) {
  auto f = text::split_csv(R"(0,/m/09x0r,"Speech, loud ""ish""")");
  ASSERT_TRUE(f.has_value());
  ASSERT_EQ(f->size(), 3u);
  EXPECT_EQ((*f)[2], "Speech, loud \"ish\"");

  auto empty_fields = text::split_csv("a,,");
  ASSERT_TRUE(empty_fields.has_value());
  EXPECT_EQ(empty_fields->size(), 3u);

  EXPECT_FALSE(text::split_csv(R"(a,"unterminated)").has_value());
  EXPECT_FALSE(text::split_csv(R"(a,"x"y)").has_value());
}

TEST(TextTest, LineReaderStripsCarriageReturns) {
  text::LineReader lines("a\r\nb\n\nc");
  std::string_view line;
  std::vector<std::string> got;
  while (lines.next(line)) got.emplace_back(line);
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(lines.line_number(), 4u);
}

TEST(ParallelTest, SplitRangeCoversEverythingOnce) {
  for (std::size_t n : {0u, 1u, 7u, 100u}) {
    for (std::size_t parts : {1u, 3u, 4u, 16u}) {
      auto chunks = split_range(n, parts);
      std::size_t expect = 0;
      for (std::size_t i = 0; i < chunks.size(); ++i) {
        EXPECT_EQ(chunks[i].index, i);
        EXPECT_EQ(chunks[i].begin, expect);
        expect = chunks[i].end;
      }
      EXPECT_EQ(expect, n);
    }
  }
}

TEST(ParallelTest, RunsEveryChunkAndRethrows) {
  std::atomic<std::size_t> sum{0};
  parallel_chunks(1000, 4, [&](const Chunk& c) {
    for (std::size_t i = c.begin; i < c.end; ++i) sum += i;
  });
  EXPECT_EQ(sum.load(), 999u * 1000u / 2u);

  EXPECT_THROW(parallel_chunks(10, 4,
                               [](const Chunk& c) {
                                 if (c.index == 2) throw std::runtime_error("boom");
                               }),
               std::runtime_error);
}

}  // namespace
}  // namespace hlp
