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

// Hierarchical label propagation.
//
// Labels: a positive class makes every ancestor on its single-parent chain
// positive. A node with several parents stops the walk, so siblings that
// might explain it (Cat / Dog for Growling) stay negative.
//
// Scores: each node with a single parent pushes its score up,
// s_parent = max(s_parent, s_child). Visiting nodes children-first reaches
// the fixed point in one pass.
//
// Both are pure functions, row-parallel, with output independent of the
// worker count.

#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hlp/error.hpp"
#include "hlp/labelset.hpp"
#include "hlp/ontology.hpp"
#include "hlp/parallel.hpp"
#include "hlp/vocabulary.hpp"

namespace hlp {

namespace detail {

inline NodeId require_node(const PropagationMap& pmap, const std::string& mid, std::string_view role) {
  auto id = pmap.find(mid);
  if (!id) {
    throw Error(Errc::kUnknownMid, std::string(role) + " mid " + mid + " is not in the ontology", {mid});
  }
  return *id;
}

}  // namespace detail

// Each output row is the input row plus the chains of its positives, keeping
// only classes in `output_vocab`. Clip ids and segment times are carried over.
inline LabelMatrix propagate_labels(const LabelMatrix& labels, const PropagationMap& pmap,
                                    const ClassVocabulary& output_vocab, unsigned threads = 1) {
  for (const auto& e : output_vocab.entries()) detail::require_node(pmap, e.mid, "output vocabulary");

  // Emission targets (output indices) of each input class: itself plus its
  // chain, restricted to the output vocabulary.
  const auto& in_vocab = labels.vocab();
  std::vector<std::vector<ClassIndex>> emits(in_vocab.size());
  for (ClassIndex c = 0; c < in_vocab.size(); ++c) {
    NodeId node = detail::require_node(pmap, in_vocab.mid(c), "label");
    auto& targets = emits[c];
    if (auto self = output_vocab.find(in_vocab.mid(c))) targets.push_back(*self);
    for (NodeId ancestor : pmap.chain(node)) {
      if (auto idx = output_vocab.find(pmap.mid(ancestor))) targets.push_back(*idx);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  }

  const std::size_t clips = labels.clip_count();
  auto chunks = split_range(clips, std::max(1u, threads));
  std::vector<std::vector<ClassIndex>> part_labels(chunks.size());
  std::vector<std::vector<std::size_t>> part_sizes(chunks.size());
  parallel_chunks(clips, threads, [&](const Chunk& chunk) {
    auto& out = part_labels[chunk.index];
    auto& sizes = part_sizes[chunk.index];
    out.reserve(labels.offsets()[chunk.end] - labels.offsets()[chunk.begin]);
    sizes.reserve(chunk.end - chunk.begin);
    for (std::size_t r = chunk.begin; r < chunk.end; ++r) {
      const std::size_t begin = out.size();
      for (ClassIndex c : labels.row(r)) out.insert(out.end(), emits[c].begin(), emits[c].end());
      auto first = out.begin() + static_cast<std::ptrdiff_t>(begin);
      std::sort(first, out.end());
      out.erase(std::unique(first, out.end()), out.end());
      sizes.push_back(out.size() - begin);
    }
  });

  std::vector<std::size_t> offsets;
  offsets.reserve(clips + 1);
  offsets.push_back(0);
  std::vector<ClassIndex> flat;
  std::size_t total = 0;
  for (const auto& p : part_labels) total += p.size();
  flat.reserve(total);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    for (std::size_t s : part_sizes[i]) offsets.push_back(offsets.back() + s);
    flat.insert(flat.end(), part_labels[i].begin(), part_labels[i].end());
  }
  return LabelMatrix(output_vocab, labels.clip_ids(), std::move(offsets), std::move(flat),
                     labels.has_times() ? labels.times() : std::vector<SegmentTime>{});
}

inline LabelMatrix propagate_labels(const LabelMatrix& labels, const PropagationMap& pmap, unsigned threads = 1) {
  return propagate_labels(labels, pmap, labels.vocab(), threads);
}

// Score max-propagation along the single-parent edges of `pmap` (under
// labelable-only, edges into non-labelable parents are skipped). Ontology
// nodes absent from the score matrix start at -inf: they relay the maximum
// of their descendants but contribute nothing of their own. `output_vocab`
// must be a subset of the score matrix's classes.
inline ScoreMatrix propagate_scores(const ScoreMatrix& scores, const PropagationMap& pmap,
                                    const ClassVocabulary& output_vocab, unsigned threads = 1) {
  const auto& in_vocab = scores.vocab();
  std::vector<NodeId> in_node(in_vocab.size());
  for (ClassIndex c = 0; c < in_vocab.size(); ++c) in_node[c] = detail::require_node(pmap, in_vocab.mid(c), "score");
  std::vector<NodeId> out_node(output_vocab.size());
  for (ClassIndex c = 0; c < output_vocab.size(); ++c) {
    const auto& mid = output_vocab.mid(c);
    out_node[c] = detail::require_node(pmap, mid, "output vocabulary");
    if (!in_vocab.contains(mid)) {
      throw Error(Errc::kUnknownMid, "output class " + mid + " has no column in the score matrix", {mid});
    }
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId c : pmap.child_first_order()) {
    NodeId p = pmap.step_parent(c);
    if (p != kNoNode) edges.emplace_back(c, p);
  }

  const std::size_t clips = scores.clip_count();
  const std::size_t width = output_vocab.size();
  std::vector<float> values(clips * width);
  parallel_chunks(clips, threads, [&](const Chunk& chunk) {
    std::vector<float> node_score(pmap.size());
    for (std::size_t r = chunk.begin; r < chunk.end; ++r) {
      std::fill(node_score.begin(), node_score.end(), -std::numeric_limits<float>::infinity());
      auto row = scores.row(r);
      for (ClassIndex c = 0; c < row.size(); ++c) node_score[in_node[c]] = row[c];
      for (auto [child, parent] : edges) {
        if (node_score[child] > node_score[parent]) node_score[parent] = node_score[child];
      }
      float* out = values.data() + r * width;
      for (std::size_t c = 0; c < width; ++c) out[c] = node_score[out_node[c]];
    }
  });
  return ScoreMatrix(output_vocab, scores.clip_ids(), std::move(values));
}

inline ScoreMatrix propagate_scores(const ScoreMatrix& scores, const PropagationMap& pmap, unsigned threads = 1) {
  return propagate_scores(scores, pmap, scores.vocab(), threads);
}

// Through-all traversal over the whole ontology.
inline ScoreMatrix propagate_scores(const ScoreMatrix& scores, const OntologyGraph& graph,
                                    const ClassVocabulary& output_vocab, unsigned threads = 1) {
  return propagate_scores(scores, build_propagation_map(graph, TraversalPolicy::kThroughAll), output_vocab, threads);
}

}  // namespace hlp
