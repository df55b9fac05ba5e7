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

#include "hlp/propagation.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace hlp {
namespace {

using testing::golden_graph;
using testing::golden_vocab;
using testing::graph_from_edges;
using testing::row_mids;

ScoreMatrix indicator_scores(const LabelMatrix& labels) {
  const std::size_t width = labels.vocab().size();
  std::vector<float> values(labels.clip_count() * width, 0.0f);
  for (std::size_t r = 0; r < labels.clip_count(); ++r) {
    for (ClassIndex c : labels.row(r)) values[r * width + c] = 1.0f;
  }
  return ScoreMatrix(labels.vocab(), labels.clip_ids(), std::move(values));
}

// Drops each positive of `m` with probability 1/2.
LabelMatrix thin_out(const LabelMatrix& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LabelMatrix out(m.vocab(), m.has_times());
  for (std::size_t r = 0; r < m.clip_count(); ++r) {
    std::vector<ClassIndex> kept;
    for (ClassIndex c : m.row(r)) {
      if (rng() & 1) kept.push_back(c);
    }
    out.append(m.clip_id(r), std::span<const ClassIndex>(kept), m.time(r));
  }
  return out;
}

TEST(PropagateLabelsTest, Golden) {
  auto g = golden_graph();
  auto vocab = golden_vocab();
  LabelMatrix labels(vocab);
  labels.append("clip", {*vocab.find(testing::kDomestic), *vocab.find(testing::kGrowling)});
  auto out = propagate_labels(labels, build_propagation_map(g, TraversalPolicy::kThroughAll), vocab);
  EXPECT_EQ(row_mids(out, 0),
            (std::set<std::string>{testing::kAnimal, testing::kDomestic, testing::kGrowling}));
  EXPECT_FALSE(out.contains(0, *vocab.find(testing::kCat)));
  EXPECT_FALSE(out.contains(0, *vocab.find(testing::kDog)));
  // The input is untouched.
  EXPECT_EQ(labels.row(0).size(), 2u);
}

TEST(PropagateLabelsTest, RootsAndEmptyRowsAreUnchanged) {
  auto g = golden_graph();
  auto vocab = golden_vocab();
  LabelMatrix labels(vocab, true);
  labels.append("root_only", {*vocab.find(testing::kAnimal)}, {30.0, 40.0});
  labels.append("empty", {}, {0.0, 10.0});
  auto out = propagate_labels(labels, build_propagation_map(g, TraversalPolicy::kThroughAll));
  EXPECT_EQ(out, labels);
}

TEST(PropagateLabelsTest, OutputVocabularyRestrictsEmission) {
  // a -> x -> c, x abstract: through-all still reaches a, but never emits x.
  auto g = graph_from_edges({"a", "x", "c"}, {{"a", "x"}, {"x", "c"}});
  auto vocab = ClassVocabulary::from_mids({"a", "c"});
  LabelMatrix labels(vocab);
  labels.append("k", {1});
  auto through = propagate_labels(labels, build_propagation_map(g, TraversalPolicy::kThroughAll, vocab));
  EXPECT_EQ(row_mids(through, 0), (std::set<std::string>{"a", "c"}));
  auto labelable = propagate_labels(labels, build_propagation_map(g, TraversalPolicy::kLabelableOnly, vocab));
  EXPECT_EQ(row_mids(labelable, 0), std::set<std::string>{"c"});

  // A smaller output vocabulary drops input classes too.
  auto only_a = ClassVocabulary::from_mids({"a"});
  auto narrowed = propagate_labels(labels, build_propagation_map(g, TraversalPolicy::kThroughAll), only_a);
  EXPECT_EQ(narrowed.vocab(), only_a);
  EXPECT_EQ(row_mids(narrowed, 0), std::set<std::string>{"a"});
}

TEST(PropagateLabelsTest, UnknownMids) {
  auto g = golden_graph();
  auto pmap = build_propagation_map(g, TraversalPolicy::kThroughAll);
  LabelMatrix labels(ClassVocabulary::from_mids({"/m/missing"}));
  labels.append("x", {0});
  try {
    propagate_labels(labels, pmap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownMid);
  }
  LabelMatrix ok(golden_vocab());
  EXPECT_THROW(propagate_labels(ok, pmap, ClassVocabulary::from_mids({"/m/missing"})), Error);
}

TEST(PropagateLabelsTest, MatchesOracleOn200Instances) {
  std::size_t changed_rows = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto cfg = testing::random_config(seed);
    auto g = synth::gen_ontology(cfg);
    auto labels = synth::gen_labels(cfg, g);
    for (auto policy : {TraversalPolicy::kThroughAll, TraversalPolicy::kLabelableOnly}) {
      auto fast = propagate_labels(labels, build_propagation_map(g, policy, labels.vocab()));
      auto oracle = synth::oracle_propagate(labels, g, policy);
      ASSERT_EQ(fast, oracle) << "seed " << seed << " policy " << policy_name(policy);
      if (policy == TraversalPolicy::kThroughAll) {
        for (std::size_t r = 0; r < labels.clip_count(); ++r) changed_rows += fast.row(r).size() != labels.row(r).size();
      }
    }
  }
  EXPECT_GT(changed_rows, 1000u);  // the instances actually exercise propagation
}

TEST(PropagateLabelsTest, OutputIsIndependentOfThreadCount) {
  auto cfg = testing::random_config(77, 200, 500);
  cfg.n_clips = 3001;
  auto g = synth::gen_ontology(cfg);
  auto labels = synth::gen_labels(cfg, g);
  auto pmap = build_propagation_map(g, TraversalPolicy::kThroughAll);
  auto one = propagate_labels(labels, pmap, 1);
  for (unsigned t : {2u, 4u, 7u}) EXPECT_EQ(propagate_labels(labels, pmap, t), one);
}

// Properties over random instances.
class LabelPropertyTest : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(LabelPropertyTest, MonotoneIdempotentAndOrderPreserving) {
  auto cfg = testing::random_config(1000 + GetParam(), 120, 80);
  auto g = synth::gen_ontology(cfg);
  auto labels = synth::gen_labels(cfg, g);
  for (auto policy : {TraversalPolicy::kThroughAll, TraversalPolicy::kLabelableOnly}) {
    auto pmap = build_propagation_map(g, policy, labels.vocab());
    auto once = propagate_labels(labels, pmap);
    EXPECT_TRUE(testing::rows_subset(labels, once));
    EXPECT_EQ(propagate_labels(once, pmap), once);
    EXPECT_EQ(once.clip_ids(), labels.clip_ids());
    EXPECT_EQ(once.times(), labels.times());

    auto smaller = thin_out(labels, GetParam());
    ASSERT_TRUE(testing::rows_subset(smaller, labels));
    EXPECT_TRUE(testing::rows_subset(propagate_labels(smaller, pmap), once));
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, LabelPropertyTest, ::testing::Range<std::uint64_t>(0, 100));

// ---------------------------------------------------------------------------

TEST(PropagateScoresTest, SingleParentTakesTheMax) {
  auto g = graph_from_edges({"p", "c"}, {{"p", "c"}});
  auto vocab = ClassVocabulary::from_mids({"c", "p"});
  ScoreMatrix s(vocab, {"k"}, {0.9f, 0.2f});
  auto out = propagate_scores(s, g, vocab);
  EXPECT_EQ(out.at(0, 0), 0.9f);
  EXPECT_EQ(out.at(0, 1), 0.9f);

  // A parent that already scores higher keeps its score.
  ScoreMatrix higher(vocab, {"k"}, {0.3f, 0.7f});
  EXPECT_EQ(propagate_scores(higher, g, vocab), higher);
}

TEST(PropagateScoresTest, MultiParentChildDoesNotPropagate) {
  auto g = golden_graph();
  auto vocab = golden_vocab();
  // Animal, Domestic, Cat, Dog, Growling
  ScoreMatrix s(vocab, {"k"}, {0.0f, 0.3f, 0.1f, 0.2f, 0.99f});
  auto out = propagate_scores(s, g, vocab);
  EXPECT_EQ(out.at(0, *vocab.find(testing::kCat)), 0.1f);
  EXPECT_EQ(out.at(0, *vocab.find(testing::kDog)), 0.2f);
  EXPECT_EQ(out.at(0, *vocab.find(testing::kGrowling)), 0.99f);
  EXPECT_EQ(out.at(0, *vocab.find(testing::kDomestic)), 0.3f);
  EXPECT_EQ(out.at(0, *vocab.find(testing::kAnimal)), 0.3f);
}

TEST(PropagateScoresTest, TransitiveInOnePass) {
  // a is the leaf: a's parent is b, b's parent is c.
  auto g = graph_from_edges({"c", "b", "a"}, {{"c", "b"}, {"b", "a"}});
  auto vocab = ClassVocabulary::from_mids({"a", "b", "c"});
  ScoreMatrix s(vocab, {"k"}, {0.9f, 0.1f, 0.0f});
  auto out = propagate_scores(s, g, vocab);
  EXPECT_EQ(out.at(0, 2), 0.9f);
  EXPECT_EQ(out.at(0, 1), 0.9f);

  auto fixed = testing::iterate_max_to_fixed_point(g, {{"a", 0.9f}, {"b", 0.1f}, {"c", 0.0f}});
  EXPECT_EQ(fixed["c"], out.at(0, 2));
}

TEST(PropagateScoresTest, ClassesMissingFromScoresRelayButDoNotContribute) {
  // c -> x -> a, x has no score column.
  auto g = graph_from_edges({"a", "x", "c"}, {{"a", "x"}, {"x", "c"}});
  auto vocab = ClassVocabulary::from_mids({"a", "c"});
  ScoreMatrix s(vocab, {"k1", "k2"}, {-5.0f, -1.0f, 2.0f, -3.0f});
  auto out = propagate_scores(s, g, vocab);
  EXPECT_EQ(out.at(0, 0), -1.0f);
  EXPECT_EQ(out.at(1, 0), 2.0f);

  // Under labelable-only, x blocks the walk.
  auto blocked = propagate_scores(s, build_propagation_map(g, TraversalPolicy::kLabelableOnly, vocab), vocab);
  EXPECT_EQ(blocked, s);
}

TEST(PropagateScoresTest, OutputVocabularyMustHaveScores) {
  auto g = graph_from_edges({"a", "x", "c"}, {{"a", "x"}, {"x", "c"}});
  ScoreMatrix s(ClassVocabulary::from_mids({"a", "c"}), {"k"}, {0.0f, 1.0f});
  try {
    propagate_scores(s, g, ClassVocabulary::from_mids({"a", "x"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kUnknownMid);
    EXPECT_EQ(e.detail(), std::vector<std::string>{"x"});
  }
  ScoreMatrix stray(ClassVocabulary::from_mids({"zzz"}), {"k"}, {0.0f});
  EXPECT_THROW(propagate_scores(stray, g, stray.vocab()), Error);

  auto narrowed = propagate_scores(s, g, ClassVocabulary::from_mids({"a"}));
  EXPECT_EQ(narrowed.class_count(), 1u);
  EXPECT_EQ(narrowed.at(0, 0), 1.0f);
}

class ScorePropertyTest : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(ScorePropertyTest, Invariants) {
  auto cfg = testing::random_config(5000 + GetParam(), 120, 40);
  auto g = synth::gen_ontology(cfg);
  auto scores = synth::gen_scores(cfg, g);
  const auto& vocab = scores.vocab();
  for (auto policy : {TraversalPolicy::kThroughAll, TraversalPolicy::kLabelableOnly}) {
    auto pmap = build_propagation_map(g, policy, vocab);
    auto out = propagate_scores(scores, pmap);

    // Never decreases; idempotent.
    for (std::size_t i = 0; i < out.values().size(); ++i) ASSERT_GE(out.values()[i], scores.values()[i]);
    EXPECT_EQ(propagate_scores(out, pmap), out);

    // Dominance on every single-parent edge with both ends in the output.
    for (NodeId c = 0; c < g.size(); ++c) {
      NodeId p = pmap.step_parent(c);
      if (p == kNoNode) continue;
      auto ci = vocab.find(g.mid(c));
      auto pi = vocab.find(g.mid(p));
      if (!ci || !pi) continue;
      for (std::size_t r = 0; r < out.clip_count(); ++r) ASSERT_GE(out.at(r, *pi), out.at(r, *ci));
    }

    // Commutes with a monotone map (sigmoid of a shifted logit).
    auto g_map = [](float x) { return 1.0f / (1.0f + std::exp(-(8.0f * x - 4.0f))); };
    std::vector<float> mapped(scores.values().size());
    std::transform(scores.values().begin(), scores.values().end(), mapped.begin(), g_map);
    auto lhs = propagate_scores(ScoreMatrix(vocab, scores.clip_ids(), mapped), pmap);
    std::vector<float> rhs(out.values().size());
    std::transform(out.values().begin(), out.values().end(), rhs.begin(), g_map);
    EXPECT_EQ(lhs.values(), rhs);
  }

  // Single pass equals iterating to a fixed point (through-all).
  auto out = propagate_scores(scores, g, vocab);
  for (std::size_t r = 0; r < std::min<std::size_t>(scores.clip_count(), 5); ++r) {
    std::map<std::string, float> start;
    for (ClassIndex c = 0; c < vocab.size(); ++c) start[vocab.mid(c)] = scores.at(r, c);
    auto fixed = testing::iterate_max_to_fixed_point(g, start);
    for (ClassIndex c = 0; c < vocab.size(); ++c) ASSERT_EQ(out.at(r, c), fixed[vocab.mid(c)]);
  }
}

TEST_P(ScorePropertyTest, BinaryScoresAgreeWithLabelPropagation) {
  auto cfg = testing::random_config(9000 + GetParam(), 120, 60);
  auto g = synth::gen_ontology(cfg);
  auto labels = synth::gen_labels(cfg, g);
  for (auto policy : {TraversalPolicy::kThroughAll, TraversalPolicy::kLabelableOnly}) {
    auto pmap = build_propagation_map(g, policy, labels.vocab());
    auto scored = propagate_scores(indicator_scores(labels), pmap);
    auto expected = indicator_scores(propagate_labels(labels, pmap));
    for (std::size_t i = 0; i < scored.values().size(); ++i) {
      ASSERT_EQ(scored.values()[i] > 0.5f, expected.values()[i] > 0.5f);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ScorePropertyTest, ::testing::Range<std::uint64_t>(0, 60));

TEST(PropagateScoresTest, OutputIsIndependentOfThreadCount) {
  auto cfg = testing::random_config(31, 200, 10);
  cfg.n_clips = 999;
  auto g = synth::gen_ontology(cfg);
  auto scores = synth::gen_scores(cfg, g);
  auto pmap = build_propagation_map(g, TraversalPolicy::kThroughAll);
  auto one = propagate_scores(scores, pmap, 1);
  EXPECT_EQ(propagate_scores(scores, pmap, 4), one);
}

}  // namespace
}  // namespace hlp
