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

#include "specsim/acceptance.hpp"

#include <cmath>
#include <string>

#include "specsim/error.hpp"

namespace specsim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(what) + " must lie in [0,1]");
}

}  // namespace

AcceptanceModel::AcceptanceModel(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const SurrogateAcceptance&) {},
                 [](const DepthDecayAcceptance& d) {
                   check_unit(d.p0, "depth_decay p0");
                   check_unit(d.gamma, "depth_decay gamma");
                 },
                 [](const ExplicitAcceptance& e) {
                   for (const auto& [i, p] : e.probs) check_unit(p, "explicit probability");
                 },
             },
             v_);
}

AcceptanceModel AcceptanceModel::depth_decay(double p0, double gamma) {
  return AcceptanceModel(DepthDecayAcceptance{p0, gamma});
}

AcceptanceModel AcceptanceModel::explicit_probs(std::map<NodeIndex, double> probs) {
  return AcceptanceModel(ExplicitAcceptance{std::move(probs)});
}

double node_prob(const AcceptanceModel& model, const TokenTree& tree, NodeIndex i) {
  const auto& n = tree.node(i);
  return std::visit(overloaded{
                        [&](const SurrogateAcceptance&) { return n.surrogate_prob; },
                        [&](const DepthDecayAcceptance& d) {
                          return d.p0 * std::pow(d.gamma, static_cast<double>(n.depth)) * n.surrogate_prob;
                        },
                        [&](const ExplicitAcceptance& e) {
                          const auto it = e.probs.find(i);
                          if (it == e.probs.end()) {
                            throw ConfigError("explicit acceptance model has no probability for node " +
                                              std::to_string(i));
                          }
                          return it->second;
                        },
                    },
                    model.variant());
}

double path_accept_prob(const AcceptanceModel& model, const TokenTree& tree, NodeIndex i) {
  double p = 1.0;
  for (NodeIndex k : tree.path_to_root(i)) p *= node_prob(model, tree, k);
  return p;
}

std::vector<double> path_accept_probs(const AcceptanceModel& model, const TokenTree& tree) {
  std::vector<double> out(tree.size());
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    const auto parent = tree.node(i).parent;
    out[i] = (parent ? out[*parent] : 1.0) * node_prob(model, tree, i);
  }
  return out;
}

void check_sibling_mass(const AcceptanceModel& model, const TokenTree& tree) {
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    double sum = 0.0;
    for (NodeIndex c : tree.children(i)) sum += node_prob(model, tree, c);
    if (sum > 1.0 + kSiblingTolerance) {
      throw DomainError("acceptance probabilities of children of node " + std::to_string(i) + " sum to " +
                        std::to_string(sum));
    }
  }
}

double expected_accepted_length(const AcceptanceModel& model, const TokenTree& tree) {
  check_sibling_mass(model, tree);
  double total = 1.0;
  for (double p : path_accept_probs(model, tree)) total += p;
  return total;
}

VerificationOutcome sample_verification(const AcceptanceModel& model, const TokenTree& tree, RandomStream& rng) {
  VerificationOutcome out;
  if (rng.uniform() >= node_prob(model, tree, 0)) return out;
  NodeIndex cur = 0;
  out.accepted_path.push_back(cur);
  for (;;) {
    const double u = rng.uniform();
    double acc = 0.0;
    bool moved = false;
    for (NodeIndex c : tree.children(cur)) {
      acc += node_prob(model, tree, c);
      if (u < acc) {
        cur = c;
        moved = true;
        break;
      }
    }
    if (!moved) break;
    out.accepted_path.push_back(cur);
  }
  out.accepted_len = out.accepted_path.size() + 1;
  return out;
}

double depth_decay_chain_length(double p0, double gamma, const std::vector<double>& shares) {
  double total = 1.0;
  double path = 1.0;
  double decay = 1.0;
  for (double s : shares) {
    path *= p0 * decay * s;
    total += path;
    decay *= gamma;
  }
  return total;
}

AcceptanceModel acceptance_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("variant") || !doc["variant"].is_string()) {
    throw ConfigError("acceptance model needs a string \"variant\"");
  }
  const auto variant = doc["variant"].get<std::string>();
  try {
    if (variant == "surrogate") return AcceptanceModel::surrogate();
    if (variant == "depth_decay") {
      return AcceptanceModel::depth_decay(doc.at("p0").get<double>(), doc.at("gamma").get<double>());
    }
    if (variant == "explicit") {
      std::map<NodeIndex, double> probs;
      for (const auto& [key, value] : doc.at("probs").items()) {
        probs[static_cast<NodeIndex>(std::stoull(key))] = value.get<double>();
      }
      return AcceptanceModel::explicit_probs(std::move(probs));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid acceptance model: ") + e.what());
  } catch (const std::logic_error& e) {  // DomainError, stoull failures
    throw ConfigError(std::string("invalid acceptance model: ") + e.what());
  }
  throw ConfigError("unknown acceptance variant: " + variant);
}

nlohmann::json acceptance_to_json(const AcceptanceModel& model) {
  return std::visit(overloaded{
                        [](const SurrogateAcceptance&) { return nlohmann::json{{"variant", "surrogate"}}; },
                        [](const DepthDecayAcceptance& d) {
                          return nlohmann::json{{"variant", "depth_decay"}, {"p0", d.p0}, {"gamma", d.gamma}};
                        },
                        [](const ExplicitAcceptance& e) {
                          nlohmann::json probs = nlohmann::json::object();
                          for (const auto& [i, p] : e.probs) probs[std::to_string(i)] = p;
                          return nlohmann::json{{"variant", "explicit"}, {"probs", probs}};
                        },
                    },
                    model.variant());
}

}  // namespace specsim
