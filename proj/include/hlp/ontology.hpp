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

// AudioSet-style ontology graph and the single-parent ancestor chains used by
// hierarchical label propagation.
//
// The ontology file is a JSON array of objects with the fields `id`, `name`,
// `child_ids` and `restrictions` (recognized values "abstract" and
// "blacklist"); every other field is ignored.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hlp/error.hpp"
#include "hlp/vocabulary.hpp"

namespace hlp {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct OntologyNode {
  std::string mid;
  std::string display_name;
  std::vector<std::string> child_mids;
  bool is_abstract = false;
  bool is_blacklisted = false;

  bool operator==(const OntologyNode&) const = default;
};

// Validated, immutable ontology DAG. Node ids are positions in file order.
class OntologyGraph {
 public:
  OntologyGraph() = default;

  // Throws DuplicateMid, UnknownChild or CycleDetected. A child listed twice
  // under the same parent is collapsed and reported in warnings().
  explicit OntologyGraph(std::vector<OntologyNode> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    for (std::size_t i = 0; i < n; ++i) {
      require_identifier(nodes_[i].mid, "ontology mid");
      auto [it, inserted] = index_.emplace(nodes_[i].mid, static_cast<NodeId>(i));
      if (!inserted) throw Error(Errc::kDuplicateMid, "duplicate ontology mid " + nodes_[i].mid, {nodes_[i].mid});
    }

    children_.resize(n);
    parents_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& node = nodes_[i];
      std::vector<std::string> unique_children;
      for (const auto& child : node.child_mids) {
        auto id = find(child);
        if (!id) {
          throw Error(Errc::kUnknownChild, "node " + node.mid + " lists unknown child " + child, {node.mid, child});
        }
        if (std::find(children_[i].begin(), children_[i].end(), *id) != children_[i].end()) {
          warnings_.push_back("duplicate edge " + node.mid + " -> " + child + " collapsed");
          continue;
        }
        children_[i].push_back(*id);
        unique_children.push_back(child);
      }
      node.child_mids = std::move(unique_children);
      for (NodeId c : children_[i]) parents_[c].push_back(static_cast<NodeId>(i));
    }

    compute_child_first_order();
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<OntologyNode>& nodes() const { return nodes_; }
  const OntologyNode& node(NodeId id) const { return nodes_[id]; }
  const std::string& mid(NodeId id) const { return nodes_[id].mid; }

  std::optional<NodeId> find(std::string_view mid) const {
    auto it = index_.find(mid);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeId id_of(std::string_view mid) const {
    auto id = find(mid);
    if (!id) throw Error(Errc::kUnknownMid, "mid " + std::string(mid) + " is not in the ontology", {std::string(mid)});
    return *id;
  }

  const std::vector<NodeId>& children(NodeId id) const { return children_[id]; }
  const std::vector<NodeId>& parents(NodeId id) const { return parents_[id]; }

  std::size_t edge_count() const {
    std::size_t total = 0;
    for (const auto& c : children_) total += c.size();
    return total;
  }

  // Every node appears after all of its descendants; ties between ready
  // nodes go to the smaller mid (byte order).
  const std::vector<NodeId>& child_first_order() const { return child_first_; }

  const std::vector<std::string>& warnings() const { return warnings_; }

  bool operator==(const OntologyGraph& other) const {
    return nodes_ == other.nodes_ && child_first_ == other.child_first_;
  }

 private:
  void compute_child_first_order() {
    const std::size_t n = nodes_.size();
    std::vector<std::size_t> pending(n);
    auto by_mid = [this](NodeId a, NodeId b) { return nodes_[a].mid > nodes_[b].mid; };
    std::priority_queue<NodeId, std::vector<NodeId>, decltype(by_mid)> ready(by_mid);
    for (std::size_t i = 0; i < n; ++i) {
      pending[i] = children_[i].size();
      if (pending[i] == 0) ready.push(static_cast<NodeId>(i));
    }
    child_first_.reserve(n);
    while (!ready.empty()) {
      NodeId id = ready.top();
      ready.pop();
      child_first_.push_back(id);
      for (NodeId p : parents_[id]) {
        if (--pending[p] == 0) ready.push(p);
      }
    }
    if (child_first_.size() != n) throw_cycle(pending);
  }

  // Every node left with pending > 0 still has an unplaced child, so walking
  // unplaced children from any of them must revisit a node.
  [[noreturn]] void throw_cycle(const std::vector<std::size_t>& pending) const {
    NodeId start = kNoNode;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (pending[i] > 0 && (start == kNoNode || nodes_[i].mid < nodes_[start].mid)) start = static_cast<NodeId>(i);
    }
    std::vector<NodeId> path;
    std::map<NodeId, std::size_t> position;
    NodeId cur = start;
    while (!position.count(cur)) {
      position[cur] = path.size();
      path.push_back(cur);
      NodeId next = kNoNode;
      for (NodeId c : children_[cur]) {
        if (pending[c] > 0) {
          next = c;
          break;
        }
      }
      cur = next;
    }
    std::vector<std::string> cycle;
    std::string text;
    for (std::size_t i = position[cur]; i < path.size(); ++i) {
      cycle.push_back(nodes_[path[i]].mid);
      text += nodes_[path[i]].mid + " -> ";
    }
    cycle.push_back(nodes_[cur].mid);
    text += nodes_[cur].mid;
    throw Error(Errc::kCycleDetected, "ontology contains a cycle: " + text, std::move(cycle));
  }

  std::vector<OntologyNode> nodes_;
  std::map<std::string, NodeId, std::less<>> index_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<NodeId> child_first_;
  std::vector<std::string> warnings_;
};

namespace detail {

inline const nlohmann::json* optional_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::vector<std::string> string_array(const nlohmann::json& value, const std::string& where) {
  if (!value.is_array()) throw Error(Errc::kMalformedJson, where + " is not an array");
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_string()) throw Error(Errc::kMalformedJson, where + " contains a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline OntologyGraph parse_ontology(std::string_view raw) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw.begin(), raw.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::kMalformedJson, e.what());
  }
  if (!doc.is_array()) throw Error(Errc::kMalformedJson, "ontology root must be an array of nodes");

  std::vector<OntologyNode> nodes;
  nodes.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    const std::string where = "node #" + std::to_string(i);
    if (!obj.is_object()) throw Error(Errc::kMalformedJson, where + " is not an object");
    const auto* id = detail::optional_field(obj, "id");
    if (!id || !id->is_string()) throw Error(Errc::kMalformedJson, where + " has no string 'id'");

    OntologyNode node;
    node.mid = id->get<std::string>();
    if (const auto* name = detail::optional_field(obj, "name")) {
      if (!name->is_string()) throw Error(Errc::kMalformedJson, where + " has a non-string 'name'");
      node.display_name = name->get<std::string>();
    }
    if (const auto* children = detail::optional_field(obj, "child_ids")) {
      node.child_mids = detail::string_array(*children, where + ".child_ids");
    }
    if (const auto* restrictions = detail::optional_field(obj, "restrictions")) {
      for (const auto& r : detail::string_array(*restrictions, where + ".restrictions")) {
        if (r == "abstract") node.is_abstract = true;
        if (r == "blacklist") node.is_blacklisted = true;
      }
    }
    nodes.push_back(std::move(node));
  }
  return OntologyGraph(std::move(nodes));
}

inline std::string write_ontology_json(const OntologyGraph& graph) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& node : graph.nodes()) {
    nlohmann::ordered_json obj;
    obj["id"] = node.mid;
    obj["name"] = node.display_name;
    obj["child_ids"] = node.child_mids;
    auto restrictions = nlohmann::ordered_json::array();
    if (node.is_abstract) restrictions.push_back("abstract");
    if (node.is_blacklisted) restrictions.push_back("blacklist");
    obj["restrictions"] = std::move(restrictions);
    doc.push_back(std::move(obj));
  }
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Validation summary

struct ValidationReport {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t root_count = 0;
  std::size_t abstract_count = 0;
  std::size_t blacklisted_count = 0;
  std::size_t multi_parent_count = 0;
  // Longest root-to-node path, in edges.
  std::size_t max_depth = 0;
  std::vector<std::string> warnings;

  bool operator==(const ValidationReport&) const = default;
};

inline ValidationReport validate_ontology(const OntologyGraph& graph) {
  ValidationReport report;
  report.node_count = graph.size();
  report.edge_count = graph.edge_count();
  report.warnings = graph.warnings();
  std::vector<std::size_t> depth(graph.size(), 0);
  const auto& order = graph.child_first_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId id = *it;
    const auto& node = graph.node(id);
    const auto& parents = graph.parents(id);
    if (parents.empty()) ++report.root_count;
    if (parents.size() > 1) ++report.multi_parent_count;
    if (node.is_abstract) ++report.abstract_count;
    if (node.is_blacklisted) ++report.blacklisted_count;
    for (NodeId p : parents) depth[id] = std::max(depth[id], depth[p] + 1);
    report.max_depth = std::max(report.max_depth, depth[id]);
  }
  return report;
}

inline std::string render_validation_text(const ValidationReport& r) {
  std::string out;
  out += "Nodes: " + std::to_string(r.node_count) + "\n";
  out += "Edges: " + std::to_string(r.edge_count) + "\n";
  out += "Roots: " + std::to_string(r.root_count) + "\n";
  out += "Abstract: " + std::to_string(r.abstract_count) + "\n";
  out += "Blacklisted: " + std::to_string(r.blacklisted_count) + "\n";
  out += "Multi-parent nodes: " + std::to_string(r.multi_parent_count) + "\n";
  out += "Max depth: " + std::to_string(r.max_depth) + "\n";
  for (const auto& w : r.warnings) out += "Warning: " + w + "\n";
  return out;
}

inline std::string render_validation_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["node_count"] = r.node_count;
  j["edge_count"] = r.edge_count;
  j["root_count"] = r.root_count;
  j["abstract_count"] = r.abstract_count;
  j["blacklisted_count"] = r.blacklisted_count;
  j["multi_parent_count"] = r.multi_parent_count;
  j["max_depth"] = r.max_depth;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Propagation chains

enum class TraversalPolicy {
  // Chains pass through every ontology node (including abstract ones);
  // consumers drop members outside their output vocabulary when emitting.
  kThroughAll,
  // A node outside the labelable vocabulary ends the chain: it is neither
  // emitted nor stepped through.
  kLabelableOnly,
};

inline std::string_view policy_name(TraversalPolicy p) {
  return p == TraversalPolicy::kThroughAll ? "through-all" : "labelable-only";
}

inline std::optional<TraversalPolicy> parse_policy(std::string_view s) {
  if (s == "through-all" || s == "through-all-nodes") return TraversalPolicy::kThroughAll;
  if (s == "labelable-only") return TraversalPolicy::kLabelableOnly;
  return std::nullopt;
}

// For every node, the ancestors reachable by repeatedly stepping to the
// unique parent. Self-contained copy of the graph data it needs, so it can be
// shared across workers independently of the graph's lifetime.
class PropagationMap {
 public:
  TraversalPolicy policy() const { return policy_; }
  std::size_t size() const { return mids_.size(); }
  const std::string& mid(NodeId id) const { return mids_[id]; }

  std::optional<NodeId> find(std::string_view mid) const {
    auto it = index_.find(mid);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::span<const NodeId> chain(NodeId id) const {
    return std::span<const NodeId>(chain_nodes_).subspan(chain_offsets_[id], chain_offsets_[id + 1] - chain_offsets_[id]);
  }

  std::vector<std::string> chain_mids(std::string_view mid) const {
    auto id = find(mid);
    if (!id) throw Error(Errc::kUnknownMid, "mid " + std::string(mid) + " is not in the ontology", {std::string(mid)});
    std::vector<std::string> out;
    for (NodeId a : chain(*id)) out.push_back(mids_[a]);
    return out;
  }

  // The first chain member (the node's propagation target), or kNoNode.
  NodeId step_parent(NodeId id) const {
    auto c = chain(id);
    return c.empty() ? kNoNode : c.front();
  }

  const std::vector<NodeId>& child_first_order() const { return child_first_; }

 private:
  friend PropagationMap build_propagation_map(const OntologyGraph&, TraversalPolicy, const ClassVocabulary*);

  TraversalPolicy policy_ = TraversalPolicy::kThroughAll;
  std::vector<std::string> mids_;
  std::map<std::string, NodeId, std::less<>> index_;
  std::vector<std::size_t> chain_offsets_;
  std::vector<NodeId> chain_nodes_;
  std::vector<NodeId> child_first_;
};

// `vocab` is required for kLabelableOnly and ignored otherwise; every vocab mid
// must exist in the graph (UnknownVocabMid).
inline PropagationMap build_propagation_map(const OntologyGraph& graph, TraversalPolicy policy,
                                            const ClassVocabulary* vocab = nullptr) {
  const std::size_t n = graph.size();
  std::vector<char> labelable(n, 1);
  if (vocab) {
    for (const auto& e : vocab->entries()) {
      if (!graph.find(e.mid)) {
        throw Error(Errc::kUnknownVocabMid, "vocabulary mid " + e.mid + " is not in the ontology", {e.mid});
      }
    }
  }
  if (policy == TraversalPolicy::kLabelableOnly) {
    if (!vocab) throw Error(Errc::kInvalidConfig, "labelable-only traversal needs a class vocabulary");
    for (std::size_t i = 0; i < n; ++i) labelable[i] = vocab->contains(graph.mid(static_cast<NodeId>(i))) ? 1 : 0;
  }

  // Parents come before children in the reversed child-first order, so a
  // parent's chain is final when its child is reached.
  std::vector<std::vector<NodeId>> chains(n);
  const auto& order = graph.child_first_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeId id = *it;
    const auto& parents = graph.parents(id);
    if (parents.size() != 1 || !labelable[parents.front()]) continue;
    NodeId p = parents.front();
    chains[id].reserve(chains[p].size() + 1);
    chains[id].push_back(p);
    chains[id].insert(chains[id].end(), chains[p].begin(), chains[p].end());
  }

  PropagationMap map;
  map.policy_ = policy;
  map.mids_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    map.mids_.push_back(graph.mid(static_cast<NodeId>(i)));
    map.index_.emplace(map.mids_.back(), static_cast<NodeId>(i));
  }
  map.chain_offsets_.reserve(n + 1);
  map.chain_offsets_.push_back(0);
  for (const auto& c : chains) {
    map.chain_nodes_.insert(map.chain_nodes_.end(), c.begin(), c.end());
    map.chain_offsets_.push_back(map.chain_nodes_.size());
  }
  map.child_first_ = order;
  return map;
}

inline PropagationMap build_propagation_map(const OntologyGraph& graph, TraversalPolicy policy,
                                            const ClassVocabulary& vocab) {
  return build_propagation_map(graph, policy, &vocab);
}

}  // namespace hlp
