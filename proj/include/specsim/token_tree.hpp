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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace specsim {

using NodeIndex = std::size_t;
using TokenId = std::int64_t;

// Absolute slack allowed on the sum of sibling probabilities.
inline constexpr double kSiblingTolerance = 1e-9;

struct TreeNode {
  TokenId token = 0;
  std::optional<NodeIndex> parent;  // empty for the root
  std::size_t depth = 0;
  double surrogate_prob = 0.0;  // drafter generation probability

  bool operator==(const TreeNode&) const = default;
};

/// Draft tree of speculative tokens.
///
/// Node 0 is the first speculative token after the last confirmed token.
/// Nodes are stored in topological order (parent index < child index) and the
/// tree is append-only; pruning produces a new tree via induced_subtree().
class TokenTree {
 public:
  TokenTree(TokenId root_token, double root_prob);

  NodeIndex add_child(NodeIndex parent, TokenId token, double prob);

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(NodeIndex i) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<NodeIndex>& children(NodeIndex i) const;
  const std::vector<std::vector<NodeIndex>>& levels() const { return levels_; }
  std::size_t max_depth() const { return levels_.size() - 1; }

  // Sorted ascending.
  std::vector<NodeIndex> leaf_positions() const;
  bool is_leaf(NodeIndex i) const { return children(i).empty(); }

  // Sum of surrogate_prob over the children of i.
  double child_prob_sum(NodeIndex i) const;

  // Root first, i last.
  std::vector<NodeIndex> path_to_root(NodeIndex i) const;

  // Canonical structure array: parent index per node, -1 for the root.
  std::vector<std::int64_t> structure_array() const;

  bool operator==(const TokenTree& other) const { return nodes_ == other.nodes_; }

 private:
  void check_index(NodeIndex i) const;

  std::vector<TreeNode> nodes_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<std::vector<NodeIndex>> levels_;
  std::vector<double> child_sum_;
};

// keep must contain the root and be closed under parent. Returns the subtree
// with nodes in original relative order; mapping[new] = old index.
struct Subtree {
  TokenTree tree;
  std::vector<NodeIndex> mapping;
};
Subtree induced_subtree(const TokenTree& tree, std::span<const NodeIndex> keep);

/// Tree-causal attention mask: row i attends to column j iff j is i or an
/// ancestor of i.
class TreeMask {
 public:
  explicit TreeMask(std::size_t n) : n_(n), bits_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool operator()(std::size_t row, std::size_t col) const { return bits_[row * n_ + col] != 0; }
  void set(std::size_t row, std::size_t col) { bits_[row * n_ + col] = 1; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::string to_string() const;  // rows of 0/1 separated by '\n'

 private:
  std::size_t n_;
  std::vector<std::uint8_t> bits_;
};

TreeMask build_mask(const TokenTree& tree);

// {"nodes":[{"token":int,"parent":int|null,"prob":float}, ...]}
nlohmann::json tree_to_json(const TokenTree& tree);
TokenTree tree_from_json(const nlohmann::json& doc);
TokenTree load_tree(const std::string& path);
void save_tree(const TokenTree& tree, const std::string& path);

}  // namespace specsim
