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

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
//
// usage: specsim_acceptance <path-to-specsim-cli> <data-dir> <scratch-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "specsim/acceptance.hpp"
#include "specsim/config.hpp"
#include "specsim/depth_predictor.hpp"
#include "specsim/egt.hpp"
#include "specsim/latency.hpp"
#include "specsim/scheduler.hpp"
#include "specsim/simulator.hpp"

namespace fs = std::filesystem;
using namespace specsim;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

struct Args {
  std::string cli;
  fs::path data;
  fs::path scratch;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// 1. Knapsack pruning equals subset enumeration.
Result dp_optimality(const Args&) {
  const auto t0 = std::chrono::steady_clock::now();
  RandomStream rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const auto tree = oracle::random_tree(rng, n);
    std::vector<double> values(n);
    for (auto& v : values) v = rng.uniform();
    const auto expected = oracle::brute_force_best_subtree(tree, values);
    const MaxValueSubtree dp(tree, values, n);
    for (std::size_t k = 0; k <= n; ++k) worst = std::max(worst, std::abs(dp.best()[k] - expected[k]));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, fmt("max |dp - brute| = %.3g over 200 trees, %.2f s", worst, secs)};
}

// 2. Expected accepted length: closed form vs enumeration vs Monte Carlo.
Result expected_aal(const Args&) {
  const auto t0 = std::chrono::steady_clock::now();
  RandomStream rng(202);
  const auto model = AcceptanceModel::surrogate();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto tree = oracle::random_tree(rng, 1 + rng.below(10));
    worst = std::max(worst,
                     std::abs(expected_accepted_length(model, tree) - oracle::enumerate_expected_length(model, tree)));
  }
  double worst_z = 0.0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const auto tree = oracle::random_tree(rng, 2 + rng.below(14));
    const AcceptanceModel m = cfg % 2 ? model : AcceptanceModel::depth_decay(0.5 + 0.5 * rng.uniform(), rng.uniform());
    const double mean = expected_accepted_length(m, tree);
    const auto dist = oracle::enumerate_length_distribution(m, tree);
    double var = 0.0;
    for (std::size_t len = 0; len < dist.size(); ++len) var += dist[len] * std::pow(len - mean, 2);
    constexpr int kSamples = 100000;
    RandomStream mc = RandomStream::derive(202, cfg);
    double sum = 0.0;
    for (int s = 0; s < kSamples; ++s) sum += static_cast<double>(sample_verification(m, tree, mc).accepted_len);
    const double sigma = std::sqrt(var / kSamples);
    const double z = sigma > 0.0 ? std::abs(sum / kSamples - mean) / sigma : std::abs(sum / kSamples - mean) * 1e12;
    worst_z = std::max(worst_z, z);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && worst_z <= 3.0 && secs < 30.0,
          fmt("max |closed - enum| = %.3g, max MC |z| = %.2f, %.2f s", worst, worst_z, secs)};
}

// 3. Tree objective on chains equals the sequence objective.
Result chain_consistency(const Args&) {
  RandomStream rng(303);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t depth = 1 + rng.below(32);
    const double aal = 1.0 + rng.uniform() * static_cast<double>(depth);
    auto random_profile = [&](ModelRole role) {
      std::vector<Breakpoint> pts;
      std::size_t w = 1;
      double lat = 1.0 + 1000.0 * rng.uniform();
      for (std::size_t k = 0, n = 2 + rng.below(4); k < n; ++k) {
        pts.push_back({w, lat});
        w += 1 + rng.below(40);
        lat += 500.0 * rng.uniform();
      }
      return LatencyProfile(pts, role);
    };
    const auto d = random_profile(ModelRole::kDrafter);
    const auto v = random_profile(ModelRole::kVerifier);
    if (tree_speedup(aal, TreeShape{1, depth, depth}, d, v) != sequence_speedup(aal, depth, d, v)) ++mismatches;
  }
  return {mismatches == 0, fmt("%.0f of 1000 chain triples differ", mismatches)};
}

SimConfig shape_config() {
  SimConfig c;
  c.seed = 404;
  c.iterations = 2500;
  c.replications = 2;
  c.acceptance = AcceptanceModel::depth_decay(0.95, 0.9);
  c.drafter = DrafterSpec{0.5, 0.9, 0.9, 8, 0.0};
  c.drafter_profile = flat_profile(1000.0, 1024, ModelRole::kDrafter);
  c.verifier_profile = saturating_profile(16, 20000.0, 600.0);
  EgtPolicy p;
  p.egt.candidate_widths = {8};
  p.egt.max_depth = 8;
  p.predictor = DepthPredictor::fixed(8, 8);
  c.policy = p;
  return c;
}

// 4. Speedup over the verification width rises then falls; AAL never drops.
Result verify_sweep_shape(const Args&) {
  const std::vector<std::size_t> widths{1, 2, 4, 8, 12, 16, 24, 32, 48, 64};
  const auto rows = sweep_verify(shape_config(), widths);
  bool aal_ok = true;
  for (std::size_t i = 1; i < rows.size(); ++i) aal_ok = aal_ok && rows[i].aal >= rows[i - 1].aal;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].speedup > rows[arg].speedup) arg = i;
  }
  const bool interior = arg > 0 && arg + 1 < rows.size();
  std::ostringstream d;
  d << "speedup peaks at W_verify=" << widths[arg] << " (" << rows[arg].speedup << "x; ends " << rows.front().speedup
    << "x, " << rows.back().speedup << "x), AAL " << (aal_ok ? "non-decreasing" : "DECREASES");
  return {aal_ok && interior, d.str()};
}

SimConfig branching_config() {
  SimConfig c;
  c.seed = 505;
  c.iterations = 5000;
  c.replications = 2;
  c.acceptance = AcceptanceModel::surrogate();
  c.drafter = DrafterSpec{0.2, 0.7, 0.9, 8, 0.1};
  c.drafter_profile = linear_profile(1000.0, 150.0, 1024, ModelRole::kDrafter);
  c.verifier_profile = saturating_profile(32, 20000.0, 250.0);
  return c;
}

// 5. Tree policies beat a chain at equal verification budget; dynamic width
// is no worse than the best fixed width.
Result policy_ordering(const Args& a) {
  constexpr std::size_t kBudget = 16;
  auto base = branching_config();
  base.verify_width = kBudget;

  auto with_policy = [&](SimConfig c, Policy p) {
    c.policy = std::move(p);
    return c;
  };
  EgtPolicy egt_budget;
  egt_budget.egt.max_depth = 16;
  egt_budget.predictor = DepthPredictor::fixed(8, 16);
  StaticTreePolicy fixed_shape{load_tree((a.data / "static_tree.json").string())};

  std::vector<SimConfig> cfgs{with_policy(base, SequencePolicy{kBudget}), with_policy(base, KAryPolicy{2, 4}),
                              with_policy(base, KAryPolicy{4, 2}), with_policy(base, fixed_shape),
                              with_policy(base, egt_budget)};
  const auto table = compare(cfgs);
  bool tree_ok = true;
  std::ostringstream d;
  d << "AAL@" << kBudget << ":";
  for (const auto& r : table) {
    d << ' ' << r.name << '=' << r.stats.aal;
    tree_ok = tree_ok && r.stats.aal >= table[0].stats.aal;
  }

  SimConfig dyn = branching_config();
  EgtPolicy p;
  p.egt.candidate_widths = {1, 2, 4, 8};
  p.egt.max_depth = 16;
  p.egt.max_verify = 64;
  p.predictor = DepthPredictor::fixed(6, 16);
  dyn.policy = p;
  const double dynamic = run(dyn).speedup;
  double best_fixed = 0.0;
  std::size_t best_w = 0;
  for (std::size_t w : p.egt.candidate_widths) {
    SimConfig c = dyn;
    std::get<EgtPolicy>(c.policy).egt.candidate_widths = {w};
    const double s = run(c).speedup;
    if (s > best_fixed) {
      best_fixed = s;
      best_w = w;
    }
  }
  const bool dyn_ok = dynamic >= best_fixed * 0.98;
  d << "; dynamic EGT " << dynamic << "x vs best fixed width " << best_w << " " << best_fixed << "x";
  return {tree_ok && dyn_ok, d.str()};
}

StageProfiles random_stages(RandomStream& rng, bool zero_cpu) {
  StageProfiles s;
  auto dur = [&](double hi) { return rng.below(5) == 0 ? 0.0 : hi * rng.uniform(); };
  s.head_draft_us = dur(2000);
  s.draft_step_us = dur(2000);
  s.prepare_verify_us = zero_cpu ? 0.0 : dur(1500);
  s.verify_us = 5000 + dur(30000);
  s.accept_us = zero_cpu ? 0.0 : dur(3000);
  s.tail_draft_us = dur(2000);
  s.bonus_sample_us = zero_cpu ? 0.0 : dur(1000);
  s.head_inflation = 1.0 + 3.0 * rng.uniform();
  s.tail_inflation = 1.0 + 7.0 * rng.uniform();
  return s;
}

// 6. Timelines are feasible; plan search never loses to the canonical plan
// and strictly wins when an AoT tail draft fits under Accept.
Result scheduler_soundness(const Args&) {
  RandomStream rng(606);
  int violations = 0, regressions = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = random_stages(rng, trial % 10 == 0);
    const std::size_t depth = 1 + rng.below(6);
    const double aal = 1.0 + 4.0 * rng.uniform();
    const auto result = plan_search(s, depth, aal);
    if (!timeline_violations(result.graph, result.timeline).empty()) ++violations;
    for (auto t : {std::vector<AotTransform>{}, {AotTransform::kTailDraft}, {AotTransform::kHeadDraft},
                   {AotTransform::kTailDraft, AotTransform::kHeadDraft}}) {
      auto g = build_graph(depth, s);
      for (auto x : t) g = apply_aot(g, x);
      if (!timeline_violations(g, schedule(g, critical_path_priority(g), 4)).empty()) ++violations;
    }
    if (result.per_token_us > result.canonical_per_token_us) ++regressions;
  }
  int not_strict = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto s = random_stages(rng, false);
    s.accept_us = 500 + 3000 * rng.uniform();
    s.tail_draft_us = 50 + 1000 * rng.uniform();
    s.tail_inflation = 1.0 + 3.0 * rng.uniform();
    s.tail_draft_aot_us = std::min(s.tail_draft_aot(), s.accept_us * rng.uniform());
    // Keep the tail draft on the critical path: the bonus sample alone must
    // not outlast tail plus head drafting.
    s.bonus_sample_us = std::min(s.bonus_sample_us, 0.5 * s.tail_draft_us);
    const auto result = plan_search(s, 1 + rng.below(6), 1.0 + 4.0 * rng.uniform());
    if (!(result.per_token_us < result.canonical_per_token_us)) ++not_strict;
  }
  std::ostringstream d;
  d << violations << " infeasible timelines, " << regressions << " regressions vs canonical (1000 random), "
    << not_strict << " of 50 constructed instances without strict gain";
  return {violations == 0 && regressions == 0 && not_strict == 0, d.str()};
}

// 7. Each optimization in the breakdown ladder keeps or improves speedup.
Result breakdown_ladder(const Args& a) {
  const auto rows = breakdown(load_config((a.data / "default.json").string()));
  bool ok = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].stats.speedup < rows[i - 1].stats.speedup) ok = false;
    d << (i ? " -> " : "") << rows[i].name.substr(0, 2) << ' ' << rows[i].stats.speedup << 'x';
  }
  return {ok, d.str()};
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int shell(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

// 8. Repeated CLI invocations give byte-identical files, for any --jobs.
Result determinism(const Args& a) {
  const fs::path dir = a.scratch / "determinism";
  fs::create_directories(dir);
  const std::string cli = "\"" + a.cli + "\"";
  const std::string cfg = "\"" + (a.data / "default.json").string() + "\"";
  struct Case {
    std::string name;
    std::vector<std::string> files;
    std::function<std::string(const std::string& tag, int jobs)> command;
  };
  const std::vector<Case> cases{
      {"simulate",
       {".summary.json", ".trace.csv"},
       [&](const std::string& tag, int jobs) {
         return cli + " simulate --config " + cfg + " --seed 11 --jobs " + std::to_string(jobs) + " --out " +
                (dir / ("sim" + tag)).string();
       }},
      {"sweep",
       {".csv"},
       [&](const std::string& tag, int jobs) {
         return cli + " sweep --config " + cfg + " --seed 11 --param verify_width --values 4,16,64 --jobs " +
                std::to_string(jobs) + " --out " + (dir / ("sweep" + tag + ".csv")).string();
       }},
      {"compare",
       {".csv"},
       [&](const std::string& tag, int jobs) {
         return cli + " compare --config " + cfg + " --config " + cfg + " --seed 11 --jobs " + std::to_string(jobs) +
                " --out " + (dir / ("compare" + tag + ".csv")).string();
       }},
      {"train-predictor",
       {".json"},
       [&](const std::string& tag, int) {
         return cli + " train-predictor --config " + cfg + " --seed 11 --samples 300 --epochs 20 --out " +
                (dir / ("train" + tag + ".json")).string();
       }},
      {"plan-search",
       {".json"},
       [&](const std::string& tag, int) {
         return cli + " plan-search --stages \"" + (a.data / "stages.csv").string() + "\" --aal 3.2 --out " +
                (dir / ("plan" + tag + ".json")).string();
       }},
  };
  std::ostringstream d;
  bool ok = true;
  for (const auto& c : cases) {
    const std::vector<std::pair<std::string, int>> runs{{"_a", 1}, {"_b", 1}, {"_c", 3}};
    bool same = true;
    for (const auto& [tag, jobs] : runs) {
      if (shell(c.command(tag, jobs)) != 0) same = false;
    }
    for (const auto& suffix : c.files) {
      auto path = [&](const std::string& tag) {
        const std::string stem = c.name == "simulate" ? "sim" : c.name == "train-predictor" ? "train"
                                                            : c.name == "plan-search"       ? "plan"
                                                                                            : c.name;
        return dir / (stem + tag + suffix);
      };
      const auto ref = read_bytes(path("_a"));
      same = same && !ref.empty() && read_bytes(path("_b")) == ref && read_bytes(path("_c")) == ref;
    }
    d << c.name << (same ? " ok" : " DIFFERS") << "; ";
    ok = ok && same;
  }
  return {ok, d.str()};
}

// Chain speedup when drafting `depth` tokens and the verifier would accept
// `len - 1` of them.
double chain_gain(std::size_t depth, std::size_t len, double td, double tv) {
  const double accepted = static_cast<double>(std::min(len, depth + 1));
  return accepted * tv / (static_cast<double>(depth) * td + tv);
}

// 9. The trained predictor cuts depth-selection regret against a fixed
// depth, and learns the step function of a constant-length dataset.
Result predictor_efficacy(const Args&) {
  constexpr double kTd = 1000.0, kTv = 20000.0;
  constexpr std::size_t kMaxDepth = 16;
  RandomStream rng(909);
  auto make = [&](std::size_t n) {
    std::vector<DepthSample> out;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 2 + rng.below(16);
      const double l = static_cast<double>(len);
      out.push_back({{l + rng.normal(0.0, 0.5), l + rng.normal(0.0, 2.0), rng.uniform(), rng.uniform(),
                      rng.normal()},
                     len});
    }
    return out;
  };
  const auto train = make(2000);
  const auto held = make(1000);
  TrainOptions opts;
  opts.seed = 9;
  opts.max_depth = kMaxDepth;
  const auto trained = train_predictor(train, opts);

  auto oracle_gain = [&](std::size_t len) {
    double best = 0.0;
    for (std::size_t d = 1; d <= kMaxDepth; ++d) best = std::max(best, chain_gain(d, len, kTd, kTv));
    return best;
  };
  std::size_t fixed = 1;
  double fixed_best = -1.0;
  for (std::size_t d = 1; d <= kMaxDepth; ++d) {
    double total = 0.0;
    for (const auto& s : train) total += chain_gain(d, s.realized_len, kTd, kTv);
    if (total > fixed_best) {
      fixed_best = total;
      fixed = d;
    }
  }
  double regret_fixed = 0.0, regret_mlp = 0.0;
  for (const auto& s : held) {
    const double best = oracle_gain(s.realized_len);
    regret_fixed += best - chain_gain(fixed, s.realized_len, kTd, kTv);
    regret_mlp += best - chain_gain(trained.predictor.predict(s.features), s.realized_len, kTd, kTv);
  }
  const double reduction = 1.0 - regret_mlp / regret_fixed;

  std::vector<DepthSample> constant;
  for (std::size_t i = 0; i < 500; ++i) {
    constant.push_back({{rng.normal(), rng.normal(), rng.uniform(), rng.uniform(), rng.normal()}, 5});
  }
  const auto flat = train_predictor(constant, opts);
  const auto& mlp = std::get<MlpDepth>(flat.predictor.variant());
  double step_err = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto heads = mlp.heads(constant[i].features);
    for (std::size_t h = 0; h < heads.size(); ++h) {
      const double target = mlp.head_depths[h] <= 5 ? 1.0 : 0.0;
      step_err = std::max(step_err, std::abs(heads[h] - target));
    }
  }
  std::ostringstream d;
  d << "held-out regret fixed(" << fixed << ")=" << regret_fixed / 1000 << " mlp=" << regret_mlp / 1000
    << " (reduction " << 100 * reduction << "%); constant-length max head error " << step_err;
  return {reduction >= 0.20 && step_err < 0.1, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 4) {
    std::fprintf(stderr, "usage: %s <specsim-cli> <data-dir> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const Args args{argv[1], argv[2], argv[3]};
  fs::create_directories(args.scratch);

  const std::vector<std::pair<std::string, std::function<Result(const Args&)>>> criteria{
      {"DP pruning optimality", dp_optimality},
      {"expected AAL correctness", expected_aal},
      {"chain objective consistency", chain_consistency},
      {"verify-width sweep shape", verify_sweep_shape},
      {"tree policy ordering", policy_ordering},
      {"scheduler soundness", scheduler_soundness},
      {"breakdown monotonicity", breakdown_ladder},
      {"CLI determinism", determinism},
      {"predictor efficacy", predictor_efficacy},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second(args);
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
