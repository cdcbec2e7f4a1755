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

#include "specsim/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "specsim/error.hpp"

namespace specsim {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_duration(double d, const std::string& what) {
  if (!std::isfinite(d) || d < 0.0) throw DomainError(what + " duration must be finite and >= 0");
}

// Kahn's algorithm; `pick` chooses among ready stages.
std::vector<std::size_t> kahn(const DepGraph& g,
                              const std::function<std::size_t(const std::vector<std::size_t>&)>& pick) {
  const std::size_t n = g.stages().size();
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : g.edges()) {
    if (!e.carried) ++indeg[e.to];
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end());
    const std::size_t pos = pick(ready);
    const std::size_t s = ready[pos];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pos));
    order.push_back(s);
    for (const auto& e : g.edges()) {
      if (!e.carried && e.from == s && --indeg[e.to] == 0) ready.push_back(e.to);
    }
  }
  return order;
}

}  // namespace

std::string stage_kind_name(StageKind kind) {
  switch (kind) {
    case StageKind::kHeadDraft: return "head_draft";
    case StageKind::kDraftStep: return "draft_step";
    case StageKind::kPrepareVerify: return "prepare_verify";
    case StageKind::kVerify: return "verify";
    case StageKind::kAccept: return "accept";
    case StageKind::kTailDraft: return "tail_draft";
    case StageKind::kBonusSample: return "bonus_sample";
  }
  return "unknown";
}

Resource stage_resource(StageKind kind) {
  switch (kind) {
    case StageKind::kPrepareVerify:
    case StageKind::kAccept:
    case StageKind::kBonusSample: return Resource::kCpu;
    default: return Resource::kGpu;
  }
}

std::string Stage::name() const {
  return kind == StageKind::kDraftStep ? "draft_step_" + std::to_string(step) : stage_kind_name(kind);
}

std::string aot_name(AotTransform t) { return t == AotTransform::kTailDraft ? "tail_draft_aot" : "head_draft_aot"; }

std::size_t DepGraph::add_stage(Stage stage) {
  check_duration(stage.duration_us, stage.name());
  if (stage.aot_duration_us) check_duration(*stage.aot_duration_us, stage.name() + " AoT");
  stages_.push_back(std::move(stage));
  return stages_.size() - 1;
}

void DepGraph::add_edge(std::size_t from, std::size_t to, EdgeKind kind, bool carried) {
  if (from >= stages_.size() || to >= stages_.size()) throw IndexError("edge endpoint out of range");
  if (!carried && from == to) throw DomainError("self edge");
  edges_.push_back({from, to, kind, carried});
}

bool DepGraph::remove_edge(std::size_t from, std::size_t to, bool carried) {
  const auto it = std::find_if(edges_.begin(), edges_.end(), [&](const Edge& e) {
    return e.from == from && e.to == to && e.carried == carried;
  });
  if (it == edges_.end()) return false;
  edges_.erase(it);
  return true;
}

std::optional<std::size_t> DepGraph::find(StageKind kind, std::size_t step) const {
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (stages_[i].kind == kind && stages_[i].step == step) return i;
  }
  return std::nullopt;
}

bool DepGraph::has_edge(std::size_t from, std::size_t to, bool carried) const {
  return std::any_of(edges_.begin(), edges_.end(),
                     [&](const Edge& e) { return e.from == from && e.to == to && e.carried == carried; });
}

std::vector<std::size_t> DepGraph::predecessors(std::size_t stage, bool carried) const {
  std::vector<std::size_t> out;
  for (const auto& e : edges_) {
    if (e.to == stage && e.carried == carried) out.push_back(e.from);
  }
  return out;
}

bool DepGraph::is_acyclic() const {
  return kahn(*this, [](const std::vector<std::size_t>&) { return std::size_t{0}; }).size() == stages_.size();
}

void StageProfiles::validate() const {
  check_duration(head_draft_us, "head_draft");
  check_duration(draft_step_us, "draft_step");
  for (double d : draft_steps_us) check_duration(d, "draft_step");
  check_duration(prepare_verify_us, "prepare_verify");
  check_duration(verify_us, "verify");
  check_duration(accept_us, "accept");
  check_duration(tail_draft_us, "tail_draft");
  check_duration(bonus_sample_us, "bonus_sample");
  if (head_draft_aot_us) check_duration(*head_draft_aot_us, "head_draft aot");
  if (tail_draft_aot_us) check_duration(*tail_draft_aot_us, "tail_draft aot");
  if (!(head_inflation >= 1.0) || !std::isfinite(head_inflation)) throw DomainError("head inflation must be >= 1");
  if (!(tail_inflation >= 1.0) || !std::isfinite(tail_inflation)) throw DomainError("tail inflation must be >= 1");
}

StageProfiles parse_stage_profiles(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "stage,variant,duration_us") {
    throw ParseError("stage profile must start with header 'stage,variant,duration_us'");
  }
  std::map<std::pair<std::string, std::string>, double> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(trim(f));
    if (fields.size() != 3) throw ParseError("stage profile line " + std::to_string(lineno) + ": expected 3 fields");
    double d = 0.0;
    try {
      std::size_t used = 0;
      d = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ParseError("stage profile line " + std::to_string(lineno) + ": bad duration '" + fields[2] + "'");
    }
    if (!std::isfinite(d) || d < 0.0) {
      throw ParseError("stage profile line " + std::to_string(lineno) + ": duration must be >= 0");
    }
    if (fields[1] != "base" && fields[1] != "aot") {
      throw ParseError("stage profile line " + std::to_string(lineno) + ": variant must be base or aot");
    }
    if (fields[1] == "aot" && fields[0] != "head_draft" && fields[0] != "tail_draft") {
      throw ParseError("stage profile line " + std::to_string(lineno) + ": only head_draft/tail_draft have aot rows");
    }
    if (!rows.emplace(std::make_pair(fields[0], fields[1]), d).second) {
      throw ParseError("stage profile line " + std::to_string(lineno) + ": duplicate row for " + fields[0]);
    }
  }
  static const std::vector<std::string> required{"head_draft", "draft_step", "prepare_verify", "verify",
                                                 "accept",     "tail_draft", "bonus_sample"};
  for (const auto& [key, value] : rows) {
    if (std::find(required.begin(), required.end(), key.first) == required.end()) {
      throw ParseError("unknown stage in profile: " + key.first);
    }
  }
  auto base = [&](const std::string& name) {
    const auto it = rows.find({name, "base"});
    if (it == rows.end()) throw ParseError("stage profile missing base row for " + name);
    return it->second;
  };
  StageProfiles p;
  p.head_draft_us = base("head_draft");
  p.draft_step_us = base("draft_step");
  p.prepare_verify_us = base("prepare_verify");
  p.verify_us = base("verify");
  p.accept_us = base("accept");
  p.tail_draft_us = base("tail_draft");
  p.bonus_sample_us = base("bonus_sample");
  if (auto it = rows.find({"head_draft", "aot"}); it != rows.end()) p.head_draft_aot_us = it->second;
  if (auto it = rows.find({"tail_draft", "aot"}); it != rows.end()) p.tail_draft_aot_us = it->second;
  return p;
}

StageProfiles load_stage_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stage profile: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_stage_profiles(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

DepGraph build_graph(std::size_t draft_depth, const StageProfiles& profiles) {
  if (draft_depth < 1) throw DomainError("draft depth must be >= 1");
  profiles.validate();
  if (!profiles.draft_steps_us.empty() && profiles.draft_steps_us.size() != draft_depth) {
    throw ConfigError("per-step draft durations must have one entry per draft step");
  }
  auto make = [](StageKind k, double d, std::optional<double> aot = std::nullopt, std::size_t step = 0) {
    return Stage{k, step, stage_resource(k), d, aot};
  };
  DepGraph g;
  const auto head = g.add_stage(make(StageKind::kHeadDraft, profiles.head_draft_us, profiles.head_draft_aot()));
  std::size_t prev = head;
  std::size_t first_step = 0;
  for (std::size_t i = 1; i <= draft_depth; ++i) {
    const double d = profiles.draft_steps_us.empty() ? profiles.draft_step_us : profiles.draft_steps_us[i - 1];
    const auto s = g.add_stage(make(StageKind::kDraftStep, d, std::nullopt, i));
    if (i == 1) first_step = s;
    g.add_edge(prev, s, EdgeKind::kHard);
    prev = s;
  }
  const auto prep = g.add_stage(make(StageKind::kPrepareVerify, profiles.prepare_verify_us));
  const auto verify = g.add_stage(make(StageKind::kVerify, profiles.verify_us));
  const auto accept = g.add_stage(make(StageKind::kAccept, profiles.accept_us));
  const auto tail = g.add_stage(make(StageKind::kTailDraft, profiles.tail_draft_us, profiles.tail_draft_aot()));
  const auto bonus = g.add_stage(make(StageKind::kBonusSample, profiles.bonus_sample_us));
  g.add_edge(prev, prep, EdgeKind::kHard);
  g.add_edge(prep, verify, EdgeKind::kHard);
  g.add_edge(verify, accept, EdgeKind::kHard);
  g.add_edge(verify, tail, EdgeKind::kHard);
  g.add_edge(accept, tail, EdgeKind::kSpeculative);
  g.add_edge(accept, bonus, EdgeKind::kHard);
  g.add_edge(accept, head, EdgeKind::kSpeculative, true);
  g.add_edge(tail, head, EdgeKind::kHard, true);
  g.add_edge(bonus, first_step, EdgeKind::kHard, true);
  return g;
}

DepGraph apply_aot(const DepGraph& graph, AotTransform transform) {
  DepGraph g = graph;
  const auto accept = g.find(StageKind::kAccept);
  const auto target = g.find(transform == AotTransform::kTailDraft ? StageKind::kTailDraft : StageKind::kHeadDraft);
  if (!accept || !target) throw DomainError("graph lacks the stages of " + aot_name(transform));
  const bool carried = transform == AotTransform::kHeadDraft;
  const bool speculative = std::any_of(g.edges().begin(), g.edges().end(), [&](const Edge& e) {
    return e.from == *accept && e.to == *target && e.carried == carried && e.kind == EdgeKind::kSpeculative;
  });
  if (!speculative) throw DomainError(aot_name(transform) + " not applicable: speculative edge already removed");
  g.remove_edge(*accept, *target, carried);
  auto& stage = g.stages()[*target];
  if (stage.aot_duration_us) stage.duration_us = *stage.aot_duration_us;
  g.applied().push_back(transform);
  return g;
}

bool is_topological(const DepGraph& graph, const std::vector<std::size_t>& priority) {
  const std::size_t n = graph.stages().size();
  if (priority.size() != n) return false;
  std::vector<std::size_t> pos(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (priority[i] >= n || pos[priority[i]] != n) return false;
    pos[priority[i]] = i;
  }
  return std::all_of(graph.edges().begin(), graph.edges().end(),
                     [&](const Edge& e) { return e.carried || pos[e.from] < pos[e.to]; });
}

Timeline schedule(const DepGraph& graph, const std::vector<std::size_t>& priority, std::size_t iterations) {
  if (iterations < 1) throw DomainError("schedule needs at least one iteration");
  if (!is_topological(graph, priority)) throw DomainError("priority is not a topological order of the graph");
  const std::size_t n = graph.stages().size();
  std::vector<std::vector<std::size_t>> intra(n), carried(n);
  for (const auto& e : graph.edges()) (e.carried ? carried : intra)[e.to].push_back(e.from);

  Timeline t;
  t.iterations = iterations;
  std::vector<double> end_prev(n, 0.0), end_cur(n, 0.0);
  double lane_free[2] = {0.0, 0.0};
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t s : priority) {
      const auto& stage = graph.stages()[s];
      auto& lane = lane_free[stage.resource == Resource::kCpu ? 0 : 1];
      double start = lane;
      for (std::size_t p : intra[s]) start = std::max(start, end_cur[p]);
      if (it > 0) {
        for (std::size_t p : carried[s]) start = std::max(start, end_prev[p]);
      }
      const double end = start + stage.duration_us;
      end_cur[s] = end;
      lane = end;
      t.entries.push_back({it, s, start, end});
      t.makespan_us = std::max(t.makespan_us, end);
    }
    end_prev = end_cur;
  }
  return t;
}

std::vector<std::string> timeline_violations(const DepGraph& graph, const Timeline& timeline) {
  constexpr double eps = 1e-9;
  std::vector<std::string> out;
  const std::size_t n = graph.stages().size();
  std::map<std::pair<std::size_t, std::size_t>, const ScheduledStage*> at;
  for (const auto& e : timeline.entries) at[{e.iteration, e.stage}] = &e;
  if (at.size() != n * timeline.iterations) out.push_back("timeline does not cover every stage exactly once");
  for (const auto& e : timeline.entries) {
    const auto& stage = graph.stages()[e.stage];
    if (e.start_us < -eps || std::abs(e.end_us - e.start_us - stage.duration_us) > eps) {
      out.push_back(stage.name() + ": bad start/duration");
    }
    if (e.end_us > timeline.makespan_us + eps) out.push_back(stage.name() + ": ends after makespan");
  }
  for (const auto& edge : graph.edges()) {
    for (std::size_t it = 0; it < timeline.iterations; ++it) {
      if (edge.carried && it == 0) continue;
      const auto from = at.find({edge.carried ? it - 1 : it, edge.from});
      const auto to = at.find({it, edge.to});
      if (from == at.end() || to == at.end()) continue;
      if (to->second->start_us + eps < from->second->end_us) {
        out.push_back("dependency violated: " + graph.stages()[edge.from].name() + " -> " +
                      graph.stages()[edge.to].name() + " in iteration " + std::to_string(it));
      }
    }
  }
  for (Resource r : {Resource::kCpu, Resource::kGpu}) {
    std::vector<std::pair<double, double>> spans;
    for (const auto& e : timeline.entries) {
      if (graph.stages()[e.stage].resource == r && e.end_us > e.start_us) spans.emplace_back(e.start_us, e.end_us);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first + eps < spans[i - 1].second) {
        out.push_back(std::string(r == Resource::kCpu ? "cpu" : "gpu") + " lane overlap");
        break;
      }
    }
  }
  double max_end = 0.0;
  for (const auto& e : timeline.entries) max_end = std::max(max_end, e.end_us);
  if (std::abs(max_end - timeline.makespan_us) > eps) out.push_back("makespan differs from latest stage end");
  return out;
}

std::vector<std::size_t> canonical_priority(const DepGraph& graph) {
  return kahn(graph, [](const std::vector<std::size_t>&) { return std::size_t{0}; });
}

std::vector<std::size_t> critical_path_priority(const DepGraph& graph) {
  const std::size_t n = graph.stages().size();
  const auto topo = canonical_priority(graph);
  std::vector<double> tail(n, 0.0);  // longest path from stage to sink, inclusive
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    double best = 0.0;
    for (const auto& e : graph.edges()) {
      if (!e.carried && e.from == *it) best = std::max(best, tail[e.to]);
    }
    tail[*it] = graph.stages()[*it].duration_us + best;
  }
  return kahn(graph, [&](const std::vector<std::size_t>& ready) {
    std::size_t pos = 0;
    for (std::size_t i = 1; i < ready.size(); ++i) {
      if (tail[ready[i]] > tail[ready[pos]]) pos = i;
    }
    return pos;
  });
}

std::vector<std::size_t> cpu_first_priority(const DepGraph& graph) {
  return kahn(graph, [&](const std::vector<std::size_t>& ready) {
    for (std::size_t i = 0; i < ready.size(); ++i) {
      if (graph.stages()[ready[i]].resource == Resource::kCpu) return i;
    }
    return std::size_t{0};
  });
}

std::vector<std::vector<std::size_t>> all_topological_orders(const DepGraph& graph, std::size_t limit) {
  const std::size_t n = graph.stages().size();
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : graph.edges()) {
    if (!e.carried) ++indeg[e.to];
  }
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> order;
  std::vector<bool> used(n, false);
  std::function<void()> rec = [&]() {
    if (out.size() >= limit) return;
    if (order.size() == n) {
      out.push_back(order);
      return;
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (used[s] || indeg[s] != 0) continue;
      used[s] = true;
      order.push_back(s);
      for (const auto& e : graph.edges()) {
        if (!e.carried && e.from == s) --indeg[e.to];
      }
      rec();
      for (const auto& e : graph.edges()) {
        if (!e.carried && e.from == s) ++indeg[e.to];
      }
      order.pop_back();
      used[s] = false;
    }
  };
  rec();
  return out;
}

PlanResult plan_search(const StageProfiles& profiles, std::size_t draft_depth, double expected_aal,
                       const PlanSearchOptions& options) {
  if (!(expected_aal > 0.0)) throw DomainError("expected AAL must be positive");
  const DepGraph base = build_graph(draft_depth, profiles);
  const std::vector<std::vector<AotTransform>> subsets{
      {}, {AotTransform::kTailDraft}, {AotTransform::kHeadDraft}, {AotTransform::kTailDraft, AotTransform::kHeadDraft}};

  std::optional<PlanResult> best;
  std::size_t evaluated = 0;
  double canonical = 0.0;
  for (const auto& subset : subsets) {
    DepGraph g = base;
    for (auto t : subset) g = apply_aot(g, t);
    std::vector<std::vector<std::size_t>> orders;
    if (g.stages().size() <= options.exhaustive_limit) {
      orders = all_topological_orders(g);
    } else {
      orders = {canonical_priority(g), critical_path_priority(g), cpu_first_priority(g)};
    }
    for (const auto& order : orders) {
      Timeline t = schedule(g, order, options.iterations);
      const double per_token = t.cycle_us() / expected_aal;
      if (evaluated == 0) canonical = per_token;
      ++evaluated;
      if (!best || per_token < best->per_token_us) {
        best = PlanResult{ExecutionPlan{subset, order}, g, std::move(t), per_token, 0.0, 0};
      }
    }
  }
  best->canonical_per_token_us = canonical;
  best->plans_evaluated = evaluated;
  return std::move(*best);
}

nlohmann::json plan_to_json(const PlanResult& result) {
  const auto& g = result.graph;
  nlohmann::json transforms = nlohmann::json::array();
  for (auto t : result.plan.transforms) transforms.push_back(aot_name(t));
  nlohmann::json priority = nlohmann::json::array();
  for (auto s : result.plan.priority) priority.push_back(g.stages()[s].name());
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& e : result.timeline.entries) {
    const auto& st = g.stages()[e.stage];
    stages.push_back({{"iteration", e.iteration},
                      {"stage", st.name()},
                      {"resource", st.resource == Resource::kCpu ? "cpu" : "gpu"},
                      {"start_us", e.start_us},
                      {"end_us", e.end_us}});
  }
  return nlohmann::json{{"transforms", transforms},
                        {"priority", priority},
                        {"iterations", result.timeline.iterations},
                        {"makespan_us", result.timeline.makespan_us},
                        {"cycle_us", result.timeline.cycle_us()},
                        {"per_token_us", result.per_token_us},
                        {"canonical_per_token_us", result.canonical_per_token_us},
                        {"plans_evaluated", result.plans_evaluated},
                        {"timeline", stages}};
}

}  // namespace specsim
