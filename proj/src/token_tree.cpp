// Copyright 2026 The specsim Authors
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

#include "specsim/token_tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "specsim/error.hpp"

namespace specsim {
namespace {

void check_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("probability out of range [0,1]: " + std::to_string(p));
  }
}

}  // namespace

TokenTree::TokenTree(TokenId root_token, double root_prob) {
  check_prob(root_prob);
  nodes_.push_back(TreeNode{root_token, std::nullopt, 0, root_prob});
  children_.emplace_back();
  levels_.push_back({0});
  child_sum_.push_back(0.0);
}

void TokenTree::check_index(NodeIndex i) const {
  if (i >= nodes_.size()) {
    throw IndexError("node index " + std::to_string(i) + " out of range (size " +
                     std::to_string(nodes_.size()) + ")");
  }
}

NodeIndex TokenTree::add_child(NodeIndex parent, TokenId token, double prob) {
  check_index(parent);
  check_prob(prob);
  if (child_sum_[parent] + prob > 1.0 + kSiblingTolerance) {
    throw DomainError("sibling probability sum exceeds 1 under node " + std::to_string(parent));
  }
  const NodeIndex index = nodes_.size();
  const std::size_t depth = nodes_[parent].depth + 1;
  nodes_.push_back(TreeNode{token, parent, depth, prob});
  children_.emplace_back();
  children_[parent].push_back(index);
  child_sum_[parent] += prob;
  child_sum_.push_back(0.0);
  if (depth == levels_.size()) levels_.emplace_back();
  levels_[depth].push_back(index);
  return index;
}

const TreeNode& TokenTree::node(NodeIndex i) const {
  check_index(i);
  return nodes_[i];
}

const std::vector<NodeIndex>& TokenTree::children(NodeIndex i) const {
  check_index(i);
  return children_[i];
}

std::vector<NodeIndex> TokenTree::leaf_positions() const {
  std::vector<NodeIndex> leaves;
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (children_[i].empty()) leaves.push_back(i);
  }
  return leaves;
}

double TokenTree::child_prob_sum(NodeIndex i) const {
  check_index(i);
  return child_sum_[i];
}

std::vector<NodeIndex> TokenTree::path_to_root(NodeIndex i) const {
  check_index(i);
  std::vector<NodeIndex> path(nodes_[i].depth + 1);
  std::optional<NodeIndex> cur = i;
  for (std::size_t k = path.size(); k-- > 0;) {
    path[k] = *cur;
    cur = nodes_[*cur].parent;
  }
  return path;
}

std::vector<std::int64_t> TokenTree::structure_array() const {
  std::vector<std::int64_t> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.parent ? static_cast<std::int64_t>(*n.parent) : -1);
  return out;
}

Subtree induced_subtree(const TokenTree& tree, std::span<const NodeIndex> keep) {
  std::vector<NodeIndex> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty() || sorted.front() != 0) {
    throw DomainError("induced subtree must contain the root");
  }
  std::vector<std::optional<NodeIndex>> remap(tree.size());
  const auto& root = tree.node(0);
  Subtree out{TokenTree(root.token, root.surrogate_prob), {0}};
  remap[0] = 0;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const auto& n = tree.node(sorted[k]);
    if (!remap[*n.parent]) {
      throw DomainError("induced subtree is not closed under parent at node " + std::to_string(sorted[k]));
    }
    remap[sorted[k]] = out.tree.add_child(*remap[*n.parent], n.token, n.surrogate_prob);
    out.mapping.push_back(sorted[k]);
  }
  return out;
}

std::string TreeMask::to_string() const {
  std::string s;
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) s.push_back((*this)(r, c) ? '1' : '0');
    if (r + 1 < n_) s.push_back('\n');
  }
  return s;
}

TreeMask build_mask(const TokenTree& tree) {
  const std::size_t n = tree.size();
  TreeMask mask(n);
  // Row i = row of parent(i) plus the diagonal; parents precede children.
  for (NodeIndex i = 0; i < n; ++i) {
    if (const auto p = tree.node(i).parent) {
      for (NodeIndex j = 0; j <= *p; ++j) {
        if (mask(*p, j)) mask.set(i, j);
      }
    }
    mask.set(i, i);
  }
  return mask;
}

nlohmann::json tree_to_json(const TokenTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes()) {
    nlohmann::json j;
    j["token"] = n.token;
    j["parent"] = n.parent ? nlohmann::json(*n.parent) : nlohmann::json(nullptr);
    j["prob"] = n.surrogate_prob;
    nodes.push_back(std::move(j));
  }
  return nlohmann::json{{"nodes", std::move(nodes)}};
}

TokenTree tree_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array() || doc["nodes"].empty()) {
    throw ParseError("tree JSON must be an object with a non-empty \"nodes\" array");
  }
  const auto& nodes = doc["nodes"];
  auto field = [](const nlohmann::json& n, const char* key) -> const nlohmann::json& {
    if (!n.is_object() || !n.contains(key)) throw ParseError(std::string("tree node missing \"") + key + "\"");
    return n[key];
  };
  const auto& root = nodes[0];
  if (!field(root, "parent").is_null()) throw ParseError("first tree node must be the root (parent null)");
  if (!field(root, "token").is_number_integer() || !field(root, "prob").is_number()) {
    throw ParseError("tree node has non-numeric token or prob");
  }
  TokenTree tree(root["token"].get<TokenId>(), root["prob"].get<double>());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const auto& parent = field(n, "parent");
    if (!parent.is_number_integer()) throw ParseError("node " + std::to_string(i) + " has no integer parent");
    const auto p = parent.get<std::int64_t>();
    if (p < 0 || static_cast<std::size_t>(p) >= i) {
      throw ParseError("node " + std::to_string(i) + " violates topological order (parent " + std::to_string(p) + ")");
    }
    if (!field(n, "token").is_number_integer() || !field(n, "prob").is_number()) {
      throw ParseError("tree node has non-numeric token or prob");
    }
    tree.add_child(static_cast<NodeIndex>(p), n["token"].get<TokenId>(), n["prob"].get<double>());
  }
  return tree;
}

TokenTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tree file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed tree JSON in " + path + ": " + e.what());
  }
  return tree_from_json(doc);
}

void save_tree(const TokenTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write tree file: " + path);
  out << tree_to_json(tree).dump(2) << '\n';
}

}  // namespace specsim
