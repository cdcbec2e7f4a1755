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

#include "specsim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "specsim/error.hpp"
#include "specsim/random.hpp"

namespace specsim {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::uint64_t kTokenMask = (1ULL << 62) - 1;
constexpr std::uint64_t kContextTag = 0xC0FFEEULL;
constexpr std::uint64_t kSaltTag = 0xD1CEULL;
constexpr std::size_t kFeatureWindow = 8;
constexpr double kFeatureAlpha = 0.5;

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < std::min(jobs, n); ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Per-run cache of plan-search cycle times keyed by stage durations.
class LatencyModel {
 public:
  LatencyModel(const SimConfig& config)
      : config_(config),
        drafter_(config.drafter_profile.scaled(1.0 / config.compile_speedup)),
        verifier_(config.verifier_profile.scaled(1.0 / config.compile_speedup)) {}

  const LatencyProfile& drafter() const { return drafter_; }
  const LatencyProfile& verifier() const { return verifier_; }

  double step(std::vector<double> draft_steps, std::size_t verify_nodes, std::size_t leaves) {
    if (draft_steps.empty()) draft_steps.push_back(0.0);
    const auto& costs = config_.stages;
    StageProfiles sp;
    sp.head_draft_us = costs.drafter_stages ? drafter_.at(1) : 0.0;
    sp.draft_steps_us = draft_steps;
    sp.draft_step_us = draft_steps.front();
    sp.prepare_verify_us = costs.prepare_verify_us;
    sp.verify_us = verifier_.at(verify_nodes + 1);
    sp.accept_us = costs.accept_us;
    sp.tail_draft_us = costs.drafter_stages ? drafter_.at(1) : 0.0;
    sp.bonus_sample_us = costs.bonus_sample_us;
    sp.head_inflation = costs.head_inflation;
    sp.tail_draft_aot_us = costs.drafter_stages ? drafter_.at(std::max<std::size_t>(leaves, 1)) : 0.0;

    if (!config_.plan_search) {
      double total = sp.head_draft_us + sp.prepare_verify_us + sp.verify_us + sp.accept_us + sp.tail_draft_us +
                     sp.bonus_sample_us;
      for (double d : draft_steps) total += d;
      return total;
    }
    std::vector<double> key = draft_steps;
    key.insert(key.end(), {sp.head_draft_us, sp.prepare_verify_us, sp.verify_us, sp.accept_us, sp.tail_draft_us,
                           sp.bonus_sample_us, sp.head_draft_aot(), sp.tail_draft_aot()});
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double cycle = plan_search(sp, draft_steps.size(), 1.0, config_.plan_options).timeline.cycle_us();
    cache_.emplace(std::move(key), cycle);
    return cycle;
  }

 private:
  const SimConfig& config_;
  LatencyProfile drafter_;
  LatencyProfile verifier_;
  std::map<std::vector<double>, double> cache_;
};

// Context concentration sequence of one replication.
class ContextStream {
 public:
  ContextStream(const DrafterSpec& spec, std::uint64_t seed, std::size_t rep)
      : spec_(spec), rng_(RandomStream::derive(seed ^ kContextTag, rep)) {}

  double next() {
    const double u = rng_.uniform();
    const double v = rng_.uniform();
    if (first_ || u >= spec_.persistence) c_ = spec_.top1_min + (spec_.top1_max - spec_.top1_min) * v;
    first_ = false;
    return c_;
  }

 private:
  DrafterSpec spec_;
  RandomStream rng_;
  bool first_ = true;
  double c_ = 0.0;
};

std::uint64_t iteration_salt(std::uint64_t seed, std::size_t rep, std::size_t it) {
  return RandomStream::derive(seed ^ kSaltTag, rep, it).next();
}

std::size_t accepted_within(const VerificationOutcome& outcome, const std::vector<bool>& verified) {
  std::size_t n = 0;
  for (NodeIndex i : outcome.accepted_path) {
    if (!verified[i]) break;
    ++n;
  }
  return n + 1;
}

std::vector<bool> mark(std::size_t n, const std::vector<NodeIndex>& keep) {
  std::vector<bool> out(n, false);
  for (NodeIndex i : keep) out[i] = true;
  return out;
}

std::size_t leaves_of(const TokenTree& tree, const std::vector<bool>& verified) {
  std::size_t leaves = 0;
  for (NodeIndex i = 0; i < tree.size(); ++i) {
    if (!verified[i]) continue;
    const auto& kids = tree.children(i);
    if (std::none_of(kids.begin(), kids.end(), [&](NodeIndex c) { return verified[c]; })) ++leaves;
  }
  return leaves;
}

std::vector<IterationRecord> run_replication(const SimConfig& config, std::size_t rep) {
  LatencyModel latency(config);
  ContextStream contexts(config.drafter, config.seed, rep);
  FeatureTracker tracker(kFeatureWindow, kFeatureAlpha);
  std::optional<DepthPredictor> predictor;
  if (const auto* egt = std::get_if<EgtPolicy>(&config.policy)) predictor = egt->predictor;
  const auto surrogate = AcceptanceModel::surrogate();

  std::vector<IterationRecord> trace;
  trace.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    IterationRecord rec;
    rec.replication = rep;
    rec.iteration = it;
    rec.context = contexts.next();
    const SyntheticDrafter drafter(config.drafter, rec.context, iteration_salt(config.seed, rep, it));
    const auto dist = drafter.distribution();
    const auto root_candidates = drafter.root_candidates();
    const Candidate root = root_candidates.front();

    std::optional<TokenTree> drafted;
    std::vector<NodeIndex> keep;
    std::vector<double> draft_steps;

    std::visit(overloaded{
                   [&](const EgtPolicy& p) {
                     std::size_t depth = predictor->fallback_depth();
                     if (predictor->is_fixed() || tracker.warm()) {
                       depth = predictor->predict(tracker.features(root_candidates));
                     }
                     depth = std::clamp<std::size_t>(depth, 1, p.egt.max_depth);
                     const bool prune = p.prune && !config.verify_width;
                     auto sel = select_width(p.egt, depth, root, dist, latency.drafter(), latency.verifier(), prune);
                     drafted = std::move(sel.grown.tree);
                     rec.depth = depth;
                     rec.width = sel.width;
                     draft_steps.assign(depth, latency.drafter().at(sel.width));
                     if (prune) {
                       keep = std::move(sel.pruned->pruned.mapping);
                     } else if (!config.verify_width) {
                       keep = top_k_subtree(path_accept_probs(surrogate, *drafted),
                                            std::min(drafted->size(), p.egt.max_verify));
                     }
                   },
                   [&](const auto& templ) {
                     TokenTree shape = overloaded{
                         [](const SequencePolicy& s) { return chain_template(s.num_draft); },
                         [](const KAryPolicy& k) { return kary_template(k.k, k.depth); },
                         [](const StaticTreePolicy& s) { return s.shape; },
                     }(templ);
                     drafted = instantiate_template(shape, root, dist);
                     rec.depth = drafted->max_depth();
                     for (std::size_t l = 1; l < drafted->levels().size(); ++l) {
                       const std::size_t w = drafted->levels()[l].size();
                       rec.width = std::max(rec.width, w);
                       draft_steps.push_back(latency.drafter().at(w));
                     }
                     keep.resize(drafted->size());
                     for (NodeIndex i = 0; i < drafted->size(); ++i) keep[i] = i;
                   },
               },
               config.policy);

    if (config.verify_width) {
      keep = top_k_subtree(path_accept_probs(surrogate, *drafted), std::min(drafted->size(), *config.verify_width));
    }
    const auto verified = mark(drafted->size(), keep);

    RandomStream vrng = RandomStream::derive(config.seed, rep, it);
    const auto outcome = sample_verification(config.acceptance, *drafted, vrng);
    rec.drafted_nodes = drafted->size();
    rec.verify_width = keep.size();
    rec.accepted_len = accepted_within(outcome, verified);
    rec.step_us = latency.step(std::move(draft_steps), keep.size(), leaves_of(*drafted, verified));

    tracker.observe(rec.accepted_len);
    if (predictor) predictor->observe(rec.accepted_len);
    trace.push_back(rec);
  }
  return trace;
}

}  // namespace

void DrafterSpec::validate() const {
  if (!(top1_min >= 0.0 && top1_min <= top1_max && top1_max <= 1.0)) {
    throw ConfigError("drafter top1 range must satisfy 0 <= top1_min <= top1_max <= 1");
  }
  if (!(persistence >= 0.0 && persistence <= 1.0)) throw ConfigError("drafter persistence must lie in [0,1]");
  if (candidates < 1) throw ConfigError("drafter must offer at least one candidate");
  if (!(node_jitter >= 0.0 && node_jitter <= 1.0)) throw ConfigError("drafter node_jitter must lie in [0,1]");
}

SyntheticDrafter::SyntheticDrafter(const DrafterSpec& spec, double concentration, std::uint64_t salt)
    : spec_(spec), concentration_(concentration), salt_(salt) {}

std::vector<Candidate> SyntheticDrafter::offer(TokenId parent_token) const {
  const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(parent_token) ^ salt_);
  double c = concentration_;
  if (spec_.node_jitter > 0.0) {
    c += spec_.node_jitter * (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5);
  }
  c = std::clamp(c, 0.0, 1.0);
  std::vector<Candidate> out;
  out.reserve(spec_.candidates);
  double p = c;
  for (std::size_t r = 0; r < spec_.candidates; ++r) {
    const auto token = static_cast<TokenId>(splitmix64(h + r + 1) & kTokenMask);
    out.push_back({token, p});
    p *= 1.0 - c;
  }
  return out;
}

std::vector<Candidate> SyntheticDrafter::root_candidates() const {
  return offer(static_cast<TokenId>(salt_ & kTokenMask));
}

std::vector<Candidate> SyntheticDrafter::operator()(const TokenTree& tree, NodeIndex node) const {
  return offer(tree.node(node).token);
}

DrafterDistribution SyntheticDrafter::distribution() const {
  return [self = *this](const TokenTree& tree, NodeIndex node) { return self(tree, node); };
}

std::string policy_name(const Policy& policy) {
  return std::visit(overloaded{
                        [](const SequencePolicy& s) { return "sequence(" + std::to_string(s.num_draft) + ")"; },
                        [](const KAryPolicy& k) {
                          return "kary(" + std::to_string(k.k) + "," + std::to_string(k.depth) + ")";
                        },
                        [](const StaticTreePolicy& s) { return "static(" + std::to_string(s.shape.size()) + ")"; },
                        [](const EgtPolicy& e) {
                          std::string w;
                          for (auto x : e.egt.candidate_widths) w += (w.empty() ? "" : "|") + std::to_string(x);
                          return "egt(w=" + w + ")";
                        },
                    },
                    policy);
}

TokenTree instantiate_template(const TokenTree& shape, const Candidate& root, const DrafterDistribution& drafter) {
  TokenTree tree(root.token, root.prob);
  std::vector<std::optional<NodeIndex>> placed(shape.size());
  placed[0] = 0;
  for (NodeIndex i = 0; i < shape.size(); ++i) {
    if (!placed[i]) continue;
    const auto& kids = shape.children(i);
    if (kids.empty()) continue;
    const auto cands = drafter(tree, *placed[i]);
    for (std::size_t r = 0; r < kids.size() && r < cands.size(); ++r) {
      placed[kids[r]] = tree.add_child(*placed[i], cands[r].token, cands[r].prob);
    }
  }
  return tree;
}

TokenTree chain_template(std::size_t nodes) {
  if (nodes < 1) throw ConfigError("chain needs at least one node");
  TokenTree t(0, 1.0);
  for (std::size_t i = 1; i < nodes; ++i) t.add_child(i - 1, static_cast<TokenId>(i), 0.0);
  return t;
}

TokenTree kary_template(std::size_t k, std::size_t depth) {
  if (k < 1) throw ConfigError("k-ary tree needs k >= 1");
  TokenTree t(0, 1.0);
  std::vector<NodeIndex> level{0};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<NodeIndex> next;
    for (NodeIndex p : level) {
      for (std::size_t r = 0; r < k; ++r) next.push_back(t.add_child(p, static_cast<TokenId>(t.size()), 0.0));
    }
    level = std::move(next);
  }
  return t;
}

void SimConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  drafter.validate();
  if (!(compile_speedup > 0.0) || !std::isfinite(compile_speedup)) throw ConfigError("compile_speedup must be > 0");
  if (!(stages.head_inflation >= 1.0)) throw ConfigError("head_inflation must be >= 1");
  for (double c : {stages.prepare_verify_us, stages.accept_us, stages.bonus_sample_us}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("stage costs must be finite and >= 0");
  }
  if (verify_width && *verify_width < 1) throw ConfigError("verify_width must be >= 1");
  if (plan_options.iterations < 1) throw ConfigError("plan search window must be >= 1 iteration");
  std::visit(overloaded{
                 [](const SequencePolicy& s) {
                   if (s.num_draft < 1) throw ConfigError("sequence num_draft must be >= 1");
                 },
                 [](const KAryPolicy& k) {
                   if (k.k < 1) throw ConfigError("k-ary k must be >= 1");
                 },
                 [](const StaticTreePolicy&) {},
                 [](const EgtPolicy& e) { e.egt.validate(); },
             },
             policy);
}

DecodeStats run(const SimConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<std::vector<IterationRecord>> traces(config.replications);
  parallel_for(config.replications, jobs, [&](std::size_t rep) { traces[rep] = run_replication(config, rep); });

  DecodeStats s;
  double tokens = 0.0, time = 0.0, depth = 0.0, width = 0.0, verify = 0.0;
  for (auto& t : traces) {
    for (const auto& r : t) {
      tokens += static_cast<double>(r.accepted_len);
      time += r.step_us;
      depth += static_cast<double>(r.depth);
      width += static_cast<double>(r.width);
      verify += static_cast<double>(r.verify_width);
    }
    s.trace.insert(s.trace.end(), t.begin(), t.end());
  }
  s.iterations = s.trace.size();
  const double n = static_cast<double>(s.iterations);
  s.aal = tokens / n;
  s.step_latency_us = time / n;
  s.tpot_us = s.step_latency_us / s.aal;
  s.speedup = config.verifier_profile.at(1) / s.tpot_us;
  s.mean_depth = depth / n;
  s.mean_width = width / n;
  s.mean_verify_width = verify / n;
  return s;
}

std::vector<CompareRow> compare(const std::vector<SimConfig>& configs, std::size_t jobs) {
  if (configs.size() < 2) throw ConfigError("compare needs at least two configs");
  for (const auto& c : configs) {
    if (!(c.drafter_profile == configs[0].drafter_profile) || !(c.verifier_profile == configs[0].verifier_profile) ||
        !(c.acceptance == configs[0].acceptance) || !(c.drafter == configs[0].drafter) ||
        !(c.stages == configs[0].stages) || c.compile_speedup != configs[0].compile_speedup) {
      throw ConfigError("compared configs must share latency profiles, acceptance model, drafter and stage costs");
    }
  }
  std::vector<CompareRow> rows(configs.size());
  parallel_for(configs.size(), jobs, [&](std::size_t i) {
    rows[i].name = policy_name(configs[i].policy);
    rows[i].stats = run(configs[i], 1);
  });
  for (auto& r : rows) r.relative_speedup = r.stats.speedup / rows[0].stats.speedup;
  return rows;
}

std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::kVerifyWidth: return "verify_width";
    case SweepParam::kDraftWidth: return "draft_width";
    case SweepParam::kDraftDepth: return "draft_depth";
  }
  return "unknown";
}

SweepParam parse_sweep_param(const std::string& name) {
  if (name == "verify_width") return SweepParam::kVerifyWidth;
  if (name == "draft_width") return SweepParam::kDraftWidth;
  if (name == "draft_depth") return SweepParam::kDraftDepth;
  throw ConfigError("unknown sweep parameter: " + name);
}

namespace {

void apply_param(SimConfig& cfg, SweepParam param, std::size_t value) {
  if (value < 1) throw ConfigError("sweep values must be >= 1");
  switch (param) {
    case SweepParam::kVerifyWidth: cfg.verify_width = value; return;
    case SweepParam::kDraftWidth:
      if (auto* e = std::get_if<EgtPolicy>(&cfg.policy)) {
        e->egt.candidate_widths = {value};
        return;
      }
      if (auto* k = std::get_if<KAryPolicy>(&cfg.policy)) {
        k->k = value;
        return;
      }
      throw ConfigError("draft_width sweeps need an egt or kary policy");
    case SweepParam::kDraftDepth:
      if (auto* e = std::get_if<EgtPolicy>(&cfg.policy)) {
        e->egt.max_depth = std::max(e->egt.max_depth, value);
        e->predictor = DepthPredictor::fixed(value, e->egt.max_depth);
        return;
      }
      if (auto* s = std::get_if<SequencePolicy>(&cfg.policy)) {
        s->num_draft = value;
        return;
      }
      if (auto* k = std::get_if<KAryPolicy>(&cfg.policy)) {
        k->depth = value;
        return;
      }
      throw ConfigError("draft_depth sweeps need an egt, sequence or kary policy");
  }
}

}  // namespace

std::vector<SweepRow> sweep(const SimConfig& config, const std::vector<SweepParam>& params,
                            const std::vector<std::vector<std::size_t>>& values, std::size_t jobs) {
  if (params.empty() || params.size() != values.size()) throw ConfigError("one value list per sweep parameter");
  std::size_t total = 1;
  for (const auto& v : values) {
    if (v.empty()) throw ConfigError("sweep value lists must not be empty");
    if (!std::is_sorted(v.begin(), v.end())) throw ConfigError("sweep values must be ascending");
    total *= v.size();
  }
  std::vector<SweepRow> rows(total);
  parallel_for(total, jobs, [&](std::size_t idx) {
    SimConfig cfg = config;
    std::vector<std::size_t> combo(params.size());
    std::size_t rest = idx;
    for (std::size_t p = params.size(); p-- > 0;) {
      combo[p] = values[p][rest % values[p].size()];
      rest /= values[p].size();
    }
    for (std::size_t p = 0; p < params.size(); ++p) apply_param(cfg, params[p], combo[p]);
    const auto stats = run(cfg, 1);
    rows[idx] = SweepRow{combo, stats.aal, stats.step_latency_us, stats.tpot_us, stats.speedup};
  });
  return rows;
}

std::vector<SweepRow> sweep_verify(const SimConfig& config, const std::vector<std::size_t>& widths, std::size_t jobs) {
  return sweep(config, {SweepParam::kVerifyWidth}, {widths}, jobs);
}

std::vector<DepthSample> collect_depth_samples(const SimConfig& config, std::size_t n, std::size_t chain_depth) {
  config.validate();
  if (n < 1) throw ConfigError("sample count must be >= 1");
  const TokenTree shape = chain_template(chain_depth);
  ContextStream contexts(config.drafter, config.seed, 0);
  FeatureTracker tracker(kFeatureWindow, kFeatureAlpha);
  std::vector<DepthSample> samples;
  samples.reserve(n);
  for (std::size_t it = 0; samples.size() < n; ++it) {
    const double c = contexts.next();
    const SyntheticDrafter drafter(config.drafter, c, iteration_salt(config.seed, 0, it));
    const auto root_candidates = drafter.root_candidates();
    const auto tree = instantiate_template(shape, root_candidates.front(), drafter.distribution());
    RandomStream vrng = RandomStream::derive(config.seed, 0, it);
    const auto outcome = sample_verification(config.acceptance, tree, vrng);
    if (tracker.warm()) samples.push_back({tracker.features(root_candidates), outcome.accepted_len});
    tracker.observe(outcome.accepted_len);
  }
  return samples;
}

std::vector<BreakdownRow> breakdown(const SimConfig& config, std::size_t jobs) {
  config.validate();
  const auto* egt = std::get_if<EgtPolicy>(&config.policy);
  if (!egt) throw ConfigError("breakdown needs an egt policy");
  const auto& opts = config.breakdown;
  const std::size_t fixed = std::clamp<std::size_t>(opts.fixed_depth, 1, egt->egt.max_depth);

  SimConfig o1 = config;
  o1.compile_speedup = 1.0;
  o1.plan_search = false;
  o1.verify_width.reset();
  auto& p1 = std::get<EgtPolicy>(o1.policy);
  p1.prune = false;
  p1.egt.max_verify = std::size_t{1} << 20;
  p1.predictor = DepthPredictor::fixed(fixed, egt->egt.max_depth);

  SimConfig o2 = o1;
  o2.compile_speedup = opts.compile_speedup;

  SimConfig o3 = o2;
  auto& p3 = std::get<EgtPolicy>(o3.policy);
  p3.prune = true;
  p3.egt.max_verify = egt->egt.max_verify;

  SimConfig o4 = o3;
  o4.plan_search = true;

  SimConfig o5 = o4;
  auto& p5 = std::get<EgtPolicy>(o5.policy);
  if (!egt->predictor.is_fixed()) {
    p5.predictor = egt->predictor;
  } else {
    const auto samples = collect_depth_samples(o4, opts.train_samples, egt->egt.max_depth);
    TrainOptions train;
    train.head_depths.clear();
    for (std::size_t d : {2, 4, 6, 8, 12, 16, 24, 32}) {
      if (d <= egt->egt.max_depth) train.head_depths.push_back(d);
    }
    if (train.head_depths.empty()) train.head_depths.push_back(1);
    train.epochs = opts.train_epochs;
    train.seed = config.seed;
    train.max_depth = egt->egt.max_depth;
    train.fallback_depth = fixed;
    p5.predictor = train_predictor(samples, train).predictor;
  }

  const std::vector<std::pair<std::string, SimConfig>> ladder{
      {"O1_latency_aware_egt", o1}, {"O2_graph_compilation", o2}, {"O3_verify_pruning", o3},
      {"O4_stage_scheduling", o4},  {"O5_depth_predictor", o5}};
  std::vector<BreakdownRow> rows(ladder.size());
  parallel_for(ladder.size(), jobs, [&](std::size_t i) {
    rows[i] = BreakdownRow{ladder[i].first, run(ladder[i].second, 1)};
  });
  return rows;
}

nlohmann::json stats_to_json(const DecodeStats& stats) {
  return nlohmann::json{{"iterations", stats.iterations},
                        {"aal", stats.aal},
                        {"step_latency_us", stats.step_latency_us},
                        {"tpot_us", stats.tpot_us},
                        {"speedup", stats.speedup},
                        {"mean_depth", stats.mean_depth},
                        {"mean_width", stats.mean_width},
                        {"mean_verify_width", stats.mean_verify_width}};
}

std::string trace_to_csv(const DecodeStats& stats) {
  std::ostringstream out;
  out << "replication,iteration,context,depth,width,drafted_nodes,verify_width,accepted_len,step_us\n";
  for (const auto& r : stats.trace) {
    out << r.replication << ',' << r.iteration << ',' << fmt(r.context) << ',' << r.depth << ',' << r.width << ','
        << r.drafted_nodes << ',' << r.verify_width << ',' << r.accepted_len << ',' << fmt(r.step_us) << '\n';
  }
  return out.str();
}

std::string sweep_to_csv(const std::vector<SweepParam>& params, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  if (params.size() == 1) {
    out << "value";
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) out << (i ? "," : "") << sweep_param_name(params[i]);
  }
  out << ",aal,step_us,tpot_us,speedup\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.values.size(); ++i) out << (i ? "," : "") << r.values[i];
    out << ',' << fmt(r.aal) << ',' << fmt(r.step_us) << ',' << fmt(r.tpot_us) << ',' << fmt(r.speedup) << '\n';
  }
  return out.str();
}

}  // namespace specsim
