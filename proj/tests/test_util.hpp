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

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hlp/hlp.hpp"

namespace hlp::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(HLP_TEST_DATA_DIR) / name;
}

// Animal -> Domestic animal -> {Cat, Dog} -> Growling (two parents).
inline constexpr const char* kAnimal = "/m/0jbk";
inline constexpr const char* kDomestic = "/m/068hy";
inline constexpr const char* kCat = "/m/01yrx";
inline constexpr const char* kDog = "/m/0bt9lr";
inline constexpr const char* kGrowling = "/m/0ghcn6";

inline OntologyGraph golden_graph() { return parse_ontology(text::read_file(data_path("golden_ontology.json"))); }

inline ClassVocabulary golden_vocab() {
  return parse_class_index_csv(text::read_file(data_path("golden_class_labels_indices.csv")));
}

// Builds a graph from (parent, child) edges over the given mids.
inline OntologyGraph graph_from_edges(const std::vector<std::string>& mids,
                                      const std::vector<std::pair<std::string, std::string>>& edges) {
  std::vector<OntologyNode> nodes;
  for (const auto& m : mids) nodes.push_back({m, m, {}, false, false});
  for (const auto& [p, c] : edges) {
    for (auto& n : nodes) {
      if (n.mid == p) n.child_mids.push_back(c);
    }
  }
  return OntologyGraph(std::move(nodes));
}

inline std::set<std::string> row_mids(const LabelMatrix& m, std::size_t r) {
  std::set<std::string> out;
  for (ClassIndex c : m.row(r)) out.insert(m.vocab().mid(c));
  return out;
}

// Reference chain: step to the parent while the current node has exactly one
// parent (found by scanning every child list).
inline std::vector<std::string> brute_force_chain(const OntologyGraph& g, const std::string& mid,
                                                  const ClassVocabulary* labelable = nullptr) {
  std::vector<std::string> chain;
  std::string cur = mid;
  while (true) {
    std::vector<std::string> parents;
    for (const auto& n : g.nodes()) {
      if (std::find(n.child_mids.begin(), n.child_mids.end(), cur) != n.child_mids.end()) parents.push_back(n.mid);
    }
    if (parents.size() != 1) break;
    if (labelable && !labelable->contains(parents.front())) break;
    chain.push_back(parents.front());
    cur = parents.front();
  }
  return chain;
}

// Reference score propagation: apply s_p = max(s_p, s_c) over all
// single-parent edges in arbitrary order until nothing changes.
inline std::map<std::string, float> iterate_max_to_fixed_point(const OntologyGraph& g,
                                                               std::map<std::string, float> score) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : g.nodes()) {
      for (const auto& child : n.child_mids) {
        std::size_t parent_count = 0;
        for (const auto& m : g.nodes()) {
          parent_count += std::count(m.child_mids.begin(), m.child_mids.end(), child);
        }
        if (parent_count != 1 || !score.count(child)) continue;
        if (!score.count(n.mid) || score[child] > score[n.mid]) {
          score[n.mid] = score[child];
          changed = true;
        }
      }
    }
  }
  return score;
}

inline synth::SynthConfig random_config(std::uint64_t seed, std::size_t max_nodes = 200, std::size_t max_clips = 500) {
  std::mt19937_64 rng(seed * 7919 + 17);
  synth::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_nodes = 1 + rng() % max_nodes;
  cfg.max_children = 1 + rng() % 6;
  const double mpp[] = {0.0, 0.2, 0.5};
  cfg.multi_parent_prob = mpp[seed % 3];
  cfg.n_clips = 1 + rng() % max_clips;
  cfg.label_density = 0.5 + static_cast<double>(rng() % 40) / 10.0;
  cfg.abstract_prob = (seed % 4 == 0) ? 0.0 : 0.25;
  return cfg;
}

// Every row of `a` is a subset of the matching row of `b`.
inline bool rows_subset(const LabelMatrix& a, const LabelMatrix& b) {
  for (std::size_t r = 0; r < a.clip_count(); ++r) {
    auto x = a.row(r);
    auto y = b.row(r);
    if (!std::includes(y.begin(), y.end(), x.begin(), x.end())) return false;
  }
  return true;
}

}  // namespace hlp::testing
