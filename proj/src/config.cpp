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

#include "specsim/config.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "specsim/error.hpp"

namespace specsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

std::size_t read_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("\"") + key + "\" must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  const fs::path full = p.is_absolute() ? p : fs::path(base_dir) / p;
  if (!fs::exists(full)) throw ConfigError("referenced file not found: " + full.string());
  return full.string();
}

LatencyProfile profile_from_json(const json& v, const std::string& base_dir, ModelRole role) {
  if (v.is_string()) return load_profile(resolve(base_dir, v.get<std::string>()), role);
  if (!v.is_array()) throw ConfigError("latency profile must be a CSV path or [[width, latency_us], ...]");
  std::vector<Breakpoint> points;
  try {
    for (const auto& row : v) points.push_back({row.at(0).get<std::size_t>(), row.at(1).get<double>()});
    return LatencyProfile(std::move(points), role);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad inline latency profile: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bad inline latency profile: ") + e.what());
  }
}

DepthPredictor predictor_config(const json& v, const std::string& base_dir) {
  if (v.is_object() && v.value("kind", "") == "checkpoint") {
    check_keys(v, "depth_predictor", {"kind", "path"});
    if (!v.contains("path") || !v["path"].is_string()) throw ConfigError("checkpoint predictor needs a \"path\"");
    const auto path = resolve(base_dir, v["path"].get<std::string>());
    std::ifstream in(path);
    try {
      return predictor_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  return predictor_from_json(v);
}

}  // namespace

Policy policy_from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw ConfigError("policy needs a string \"kind\"");
  }
  const auto kind = doc["kind"].get<std::string>();
  if (kind == "sequence") {
    check_keys(doc, "sequence policy", {"kind", "num_draft"});
    SequencePolicy p;
    p.num_draft = read_count(doc, "num_draft", p.num_draft);
    return p;
  }
  if (kind == "kary") {
    check_keys(doc, "kary policy", {"kind", "k", "depth"});
    KAryPolicy p;
    p.k = read_count(doc, "k", p.k);
    p.depth = read_count(doc, "depth", p.depth);
    return p;
  }
  if (kind == "static_tree") {
    check_keys(doc, "static_tree policy", {"kind", "path", "tree"});
    StaticTreePolicy p;
    if (doc.contains("path")) {
      p.shape = load_tree(resolve(base_dir, doc["path"].get<std::string>()));
    } else if (doc.contains("tree")) {
      p.shape = tree_from_json(doc["tree"]);
    } else {
      throw ConfigError("static_tree policy needs \"path\" or \"tree\"");
    }
    return p;
  }
  if (kind == "egt") {
    check_keys(doc, "egt policy",
               {"kind", "candidate_widths", "max_depth", "max_verify", "expansion_k", "prune", "depth_predictor"});
    EgtPolicy p;
    read(doc, "candidate_widths", p.egt.candidate_widths);
    p.egt.max_depth = read_count(doc, "max_depth", p.egt.max_depth);
    p.egt.max_verify = read_count(doc, "max_verify", p.egt.max_verify);
    p.egt.expansion_k = read_count(doc, "expansion_k", p.egt.expansion_k);
    read(doc, "prune", p.prune);
    p.predictor = doc.contains("depth_predictor") ? predictor_config(doc["depth_predictor"], base_dir)
                                                  : DepthPredictor::fixed(std::min<std::size_t>(8, p.egt.max_depth));
    p.egt.validate();
    return p;
  }
  throw ConfigError("unknown policy kind: " + kind);
}

SimConfig config_from_json(const json& doc, const std::string& base_dir) {
  check_keys(doc, "config",
             {"seed", "iterations", "replications", "profiles", "acceptance", "drafter", "stages", "policy",
              "plan_search", "plan_window", "compile_speedup", "verify_width", "breakdown"});
  SimConfig c;
  read(doc, "seed", c.seed);
  c.iterations = read_count(doc, "iterations", c.iterations);
  c.replications = read_count(doc, "replications", c.replications);

  if (doc.contains("profiles")) {
    const auto& p = doc["profiles"];
    check_keys(p, "profiles", {"drafter", "verifier"});
    if (p.contains("drafter")) c.drafter_profile = profile_from_json(p["drafter"], base_dir, ModelRole::kDrafter);
    if (p.contains("verifier")) c.verifier_profile = profile_from_json(p["verifier"], base_dir, ModelRole::kVerifier);
  }
  if (doc.contains("acceptance")) c.acceptance = acceptance_from_json(doc["acceptance"]);
  if (doc.contains("drafter")) {
    const auto& d = doc["drafter"];
    check_keys(d, "drafter", {"top1_min", "top1_max", "persistence", "candidates", "node_jitter"});
    read(d, "top1_min", c.drafter.top1_min);
    read(d, "top1_max", c.drafter.top1_max);
    read(d, "persistence", c.drafter.persistence);
    c.drafter.candidates = read_count(d, "candidates", c.drafter.candidates);
    read(d, "node_jitter", c.drafter.node_jitter);
  }
  if (doc.contains("stages")) {
    const auto& s = doc["stages"];
    check_keys(s, "stages", {"prepare_verify_us", "accept_us", "bonus_sample_us", "drafter_stages", "head_inflation"});
    read(s, "prepare_verify_us", c.stages.prepare_verify_us);
    read(s, "accept_us", c.stages.accept_us);
    read(s, "bonus_sample_us", c.stages.bonus_sample_us);
    read(s, "drafter_stages", c.stages.drafter_stages);
    read(s, "head_inflation", c.stages.head_inflation);
  }
  if (doc.contains("policy")) c.policy = policy_from_json(doc["policy"], base_dir);
  read(doc, "plan_search", c.plan_search);
  c.plan_options.iterations = read_count(doc, "plan_window", c.plan_options.iterations);
  read(doc, "compile_speedup", c.compile_speedup);
  if (doc.contains("verify_width") && !doc["verify_width"].is_null()) {
    c.verify_width = read_count(doc, "verify_width", 0);
  }
  if (doc.contains("breakdown")) {
    const auto& b = doc["breakdown"];
    check_keys(b, "breakdown", {"fixed_depth", "compile_speedup", "train_samples", "train_epochs"});
    c.breakdown.fixed_depth = read_count(b, "fixed_depth", c.breakdown.fixed_depth);
    read(b, "compile_speedup", c.breakdown.compile_speedup);
    c.breakdown.train_samples = read_count(b, "train_samples", c.breakdown.train_samples);
    c.breakdown.train_epochs = read_count(b, "train_epochs", c.breakdown.train_epochs);
  }
  c.validate();
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  auto dir = fs::path(path).parent_path();
  return config_from_json(doc, dir.empty() ? "." : dir.string());
}

}  // namespace specsim
