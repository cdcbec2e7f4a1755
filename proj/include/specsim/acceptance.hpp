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

#include <map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "specsim/random.hpp"
#include "specsim/token_tree.hpp"

namespace specsim {

// Each node's conditional acceptance probability is its surrogate_prob.
struct SurrogateAcceptance {
  bool operator==(const SurrogateAcceptance&) const = default;
};

// p0 * gamma^depth * surrogate_prob. The surrogate is the drafter's share
// for the node's rank among its siblings, so sibling sums stay <= 1.
struct DepthDecayAcceptance {
  double p0 = 1.0;
  double gamma = 1.0;
  bool operator==(const DepthDecayAcceptance&) const = default;
};

struct ExplicitAcceptance {
  std::map<NodeIndex, double> probs;
  bool operator==(const ExplicitAcceptance&) const = default;
};

/// Stochastic stand-in for verifier agreement with drafted tokens.
class AcceptanceModel {
 public:
  using Variant = std::variant<SurrogateAcceptance, DepthDecayAcceptance, ExplicitAcceptance>;

  AcceptanceModel() = default;
  AcceptanceModel(Variant v);  // NOLINT(google-explicit-constructor)

  static AcceptanceModel surrogate() { return AcceptanceModel(SurrogateAcceptance{}); }
  static AcceptanceModel depth_decay(double p0, double gamma);
  static AcceptanceModel explicit_probs(std::map<NodeIndex, double> probs);

  const Variant& variant() const { return v_; }
  bool operator==(const AcceptanceModel&) const = default;

 private:
  Variant v_ = SurrogateAcceptance{};
};

// Conditional probability that node i is accepted given its parent is.
double node_prob(const AcceptanceModel& model, const TokenTree& tree, NodeIndex i);

// Product of node_prob along path_to_root(i).
double path_accept_prob(const AcceptanceModel& model, const TokenTree& tree, NodeIndex i);

// path_accept_prob for every node, computed in one topological pass.
std::vector<double> path_accept_probs(const AcceptanceModel& model, const TokenTree& tree);

// Throws DomainError if any parent's child probabilities sum above one.
void check_sibling_mass(const AcceptanceModel& model, const TokenTree& tree);

/// 1 + sum of path acceptance probabilities. The leading 1 is the verifier's
/// bonus token; mutually exclusive siblings make each node's path product the
/// probability that it lies on the accepted path.
double expected_accepted_length(const AcceptanceModel& model, const TokenTree& tree);

struct VerificationOutcome {
  std::vector<NodeIndex> accepted_path;  // root-anchored, possibly empty
  std::size_t accepted_len = 1;          // |accepted_path| + 1
};

// Walks from the root, taking at most one child per accepted node (child c
// with probability node_prob(c), otherwise stop on the residual mass).
VerificationOutcome sample_verification(const AcceptanceModel& model, const TokenTree& tree, RandomStream& rng);

// Closed form for a chain whose node d has surrogate share shares[d]:
// 1 + sum_d prod_{j<=d} p0 * gamma^j * shares[j].
double depth_decay_chain_length(double p0, double gamma, const std::vector<double>& shares);

// {"variant":"surrogate"} | {"variant":"depth_decay","p0":..,"gamma":..} |
// {"variant":"explicit","probs":{"0":0.5,...}}
AcceptanceModel acceptance_from_json(const nlohmann::json& doc);
nlohmann::json acceptance_to_json(const AcceptanceModel& model);

}  // namespace specsim
