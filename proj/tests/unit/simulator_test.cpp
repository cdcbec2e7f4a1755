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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "specsim/error.hpp"

namespace specsim {
namespace {

// Every drafted token is certain and accepted.
SimConfig certain_config() {
  SimConfig c;
  c.seed = 1;
  c.iterations = 200;
  c.acceptance = AcceptanceModel::depth_decay(1.0, 1.0);
  c.drafter = DrafterSpec{1.0, 1.0, 1.0, 4, 0.0};
  return c;
}

SimConfig small_egt_config() {
  SimConfig c;
  c.seed = 3;
  c.iterations = 400;
  c.replications = 3;
  c.drafter_profile = linear_profile(1000.0, 100.0, 1024, ModelRole::kDrafter);
  c.verifier_profile = saturating_profile(32, 20000.0, 200.0);
  EgtPolicy p;
  p.egt.candidate_widths = {1, 2, 4};
  p.egt.max_depth = 8;
  p.egt.max_verify = 32;
  p.predictor = DepthPredictor(EmaDepth{8, 0.5}, 8, 4);
  c.policy = p;
  return c;
}

TEST(SimulatorTest, CertainAcceptanceSequence) {
  auto c = certain_config();
  c.policy = SequencePolicy{3};
  const auto s = run(c);
  EXPECT_DOUBLE_EQ(s.aal, 4.0);
  for (const auto& r : s.trace) EXPECT_EQ(r.accepted_len, 4u);
}

TEST(SimulatorTest, ZeroAcceptanceGivesBonusOnly) {
  auto c = small_egt_config();
  c.acceptance = AcceptanceModel::depth_decay(0.0, 1.0);
  for (const Policy& p : {Policy{SequencePolicy{4}}, Policy{KAryPolicy{2, 3}}, c.policy}) {
    c.policy = p;
    EXPECT_DOUBLE_EQ(run(c).aal, 1.0) << policy_name(p);
  }
}

TEST(SimulatorTest, AccountingIdentity) {
  const auto s = run(small_egt_config());
  EXPECT_NEAR(s.tpot_us * s.aal, s.step_latency_us, 1e-9 * s.step_latency_us);
  EXPECT_GT(s.speedup, 0.0);
  EXPECT_EQ(s.iterations, 1200u);
  EXPECT_EQ(s.trace.size(), 1200u);
  double tokens = 0.0;
  for (const auto& r : s.trace) tokens += static_cast<double>(r.accepted_len);
  EXPECT_DOUBLE_EQ(s.aal, tokens / 1200.0);
}

TEST(SimulatorTest, DeterministicAcrossJobs) {
  const auto c = small_egt_config();
  const auto a = run(c, 1);
  const auto b = run(c, 4);
  EXPECT_EQ(trace_to_csv(a), trace_to_csv(b));
  EXPECT_EQ(stats_to_json(a), stats_to_json(b));
  auto other = c;
  other.seed = 4;
  EXPECT_NE(trace_to_csv(run(other)), trace_to_csv(a));
}

TEST(SimulatorTest, StationaryMatchesObjective) {
  SimConfig c;
  c.seed = 9;
  c.iterations = 10000;
  c.acceptance = AcceptanceModel::depth_decay(0.95, 0.9);
  c.drafter = DrafterSpec{0.7, 0.7, 1.0, 8, 0.0};
  c.drafter_profile = linear_profile(1000.0, 50.0, 1024, ModelRole::kDrafter);
  c.verifier_profile = saturating_profile(16, 20000.0, 300.0);
  EgtPolicy p;
  p.egt.candidate_widths = {4};
  p.egt.max_depth = 4;
  p.predictor = DepthPredictor::fixed(4, 4);
  p.prune = false;
  c.policy = p;
  const auto s = run(c);

  const SyntheticDrafter drafter(c.drafter, 0.7, 0);
  const auto grown = grow_egt(drafter.root_candidates().front(), drafter.distribution(), 4, 4, 8);
  const double aal = expected_accepted_length(c.acceptance, grown.tree);
  const double objective =
      tree_speedup(aal, TreeShape{4, 4, grown.tree.size()}, c.drafter_profile, c.verifier_profile);
  EXPECT_NEAR(s.speedup / objective, 1.0, 0.05);
  EXPECT_NEAR(s.aal, aal, 0.05 * aal);
}

TEST(SimulatorTest, CompareIdenticalAndMismatched) {
  const auto c = small_egt_config();
  const auto rows = compare({c, c});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(stats_to_json(rows[0].stats), stats_to_json(rows[1].stats));
  EXPECT_DOUBLE_EQ(rows[1].relative_speedup, 1.0);
  auto other = c;
  other.verifier_profile = flat_profile(10000.0);
  EXPECT_THROW(compare({c, other}), ConfigError);
  EXPECT_THROW(compare({c}), ConfigError);
}

TEST(SimulatorTest, TreeBeatsSequenceAtEqualBudget) {
  auto c = small_egt_config();
  c.drafter = DrafterSpec{0.2, 0.6, 0.9, 8, 0.1};
  c.verify_width = 12;
  auto seq = c;
  seq.policy = SequencePolicy{12};
  auto kary = c;
  kary.policy = KAryPolicy{3, 3};
  const auto rows = compare({seq, kary, c});
  EXPECT_GE(rows[1].stats.aal, rows[0].stats.aal);
  EXPECT_GE(rows[2].stats.aal, rows[0].stats.aal);
}

TEST(SimulatorTest, VerifySweepShapes) {
  auto c = small_egt_config();
  std::get<EgtPolicy>(c.policy).predictor = DepthPredictor::fixed(6, 8);
  const std::vector<std::size_t> widths{1, 2, 4, 8, 16, 32};
  const auto rows = sweep_verify(c, widths);
  ASSERT_EQ(rows.size(), widths.size());
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].aal, rows[i - 1].aal);

  c.verifier_profile = flat_profile(20000.0);
  const auto flat = sweep_verify(c, widths);
  for (std::size_t i = 1; i < flat.size(); ++i) EXPECT_GE(flat[i].speedup, flat[i - 1].speedup);
  EXPECT_THROW(sweep_verify(c, {4, 2}), ConfigError);
}

TEST(SimulatorTest, DepthSweepWithoutAcceptanceDecreases) {
  auto c = small_egt_config();
  c.acceptance = AcceptanceModel::depth_decay(0.0, 1.0);
  const auto rows = sweep(c, {SweepParam::kDraftDepth}, {{1, 2, 4, 8, 16}});
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(rows[i].speedup, rows[i - 1].speedup);
}

TEST(SimulatorTest, GridSweep) {
  auto c = small_egt_config();
  c.iterations = 50;
  c.replications = 1;
  const std::vector<SweepParam> params{SweepParam::kDraftDepth, SweepParam::kDraftWidth, SweepParam::kVerifyWidth};
  const auto rows = sweep(c, params, {{4, 8, 16}, {4, 8}, {16, 64}});
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[1].values, (std::vector<std::size_t>{4, 4, 64}));
  const auto csv = sweep_to_csv(params, rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "draft_depth,draft_width,verify_width,aal,step_us,tpot_us,speedup");
  EXPECT_THROW(parse_sweep_param("temperature"), ConfigError);
}

TEST(SimulatorTest, DepthSamples) {
  const auto certain = collect_depth_samples(certain_config(), 50, 8);
  ASSERT_EQ(certain.size(), 50u);
  for (const auto& s : certain) EXPECT_EQ(s.realized_len, 9u);

  SimConfig c;
  c.seed = 5;
  c.acceptance = AcceptanceModel::depth_decay(0.95, 0.85);
  c.drafter = DrafterSpec{0.8, 0.8, 1.0, 4, 0.0};
  const auto a = collect_depth_samples(c, 1000, 12);
  const auto b = collect_depth_samples(c, 1000, 12);
  ASSERT_EQ(a.size(), 1000u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].realized_len, b[i].realized_len);
    ASSERT_EQ(a[i].features, b[i].features);
  }
  const double expected = depth_decay_chain_length(0.95, 0.85, std::vector<double>(12, 0.8));
  double sum = 0.0, sq = 0.0;
  for (const auto& s : a) {
    sum += static_cast<double>(s.realized_len);
    sq += std::pow(static_cast<double>(s.realized_len), 2);
  }
  const double mean = sum / 1000.0;
  const double sd = std::sqrt(sq / 1000.0 - mean * mean);
  EXPECT_LE(std::abs(mean - expected), 3.0 * sd / std::sqrt(1000.0));
}

TEST(SimulatorTest, BreakdownLadder) {
  auto c = small_egt_config();
  c.iterations = 300;
  c.breakdown.train_samples = 300;
  c.breakdown.train_epochs = 20;
  c.stages = StageCosts{400, 1500, 100, true, 2.0};
  const auto rows = breakdown(c);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_GE(rows[2].stats.speedup, rows[1].stats.speedup);
  EXPECT_GE(rows[3].stats.speedup, rows[2].stats.speedup);
  auto seq = c;
  seq.policy = SequencePolicy{4};
  EXPECT_THROW(breakdown(seq), ConfigError);
}

TEST(SimulatorTest, FeedbackDrivesDepth) {
  const auto s = run(small_egt_config());
  bool varied = false;
  for (const auto& r : s.trace) varied = varied || r.depth != s.trace.front().depth;
  EXPECT_TRUE(varied);
  for (const auto& r : s.trace) {
    EXPECT_GE(r.depth, 1u);
    EXPECT_LE(r.depth, 8u);
    EXPECT_LE(r.verify_width, 32u);
  }
}

TEST(SimulatorTest, ConfigValidation) {
  auto c = small_egt_config();
  c.iterations = 0;
  EXPECT_THROW(run(c), ConfigError);
  c = small_egt_config();
  c.drafter.top1_min = 0.9;
  c.drafter.top1_max = 0.5;
  EXPECT_THROW(run(c), ConfigError);
  c = small_egt_config();
  c.compile_speedup = 0.0;
  EXPECT_THROW(run(c), ConfigError);
}

TEST(SimulatorTest, Templates) {
  EXPECT_EQ(chain_template(5).size(), 5u);
  EXPECT_EQ(kary_template(2, 3).size(), 15u);
  EXPECT_EQ(kary_template(3, 0).size(), 1u);
  const SyntheticDrafter drafter(DrafterSpec{0.5, 0.5, 1.0, 2, 0.0}, 0.5, 7);
  const auto t = instantiate_template(kary_template(3, 2), drafter.root_candidates().front(), drafter.distribution());
  EXPECT_EQ(t.size(), 7u);  // only two ranks on offer
}

TEST(SimulatorTest, SyntheticDrafterOffers) {
  const SyntheticDrafter drafter(DrafterSpec{0.3, 0.9, 0.5, 6, 0.2}, 0.6, 99);
  const auto a = drafter.root_candidates();
  EXPECT_EQ(a.size(), 6u);
  double mass = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    mass += a[r].prob;
    if (r > 0) EXPECT_LE(a[r].prob, a[r - 1].prob);
  }
  EXPECT_LE(mass, 1.0);
  const auto b = SyntheticDrafter(DrafterSpec{0.3, 0.9, 0.5, 6, 0.2}, 0.6, 99).root_candidates();
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].token, b[r].token);
    EXPECT_EQ(a[r].prob, b[r].prob);
  }
}

}  // namespace
}  // namespace specsim
