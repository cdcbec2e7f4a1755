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
#include <string>
#include <vector>

namespace specsim {

enum class ModelRole { kDrafter, kVerifier };

struct Breakpoint {
  std::size_t width = 1;
  double latency_us = 0.0;
  bool operator==(const Breakpoint&) const = default;
};

/// Forward-pass latency as a function of the number of tokens processed in
/// parallel. Piecewise linear between breakpoints, clamped below the first
/// breakpoint and extrapolated with the last segment's slope above the last.
class LatencyProfile {
 public:
  LatencyProfile(std::vector<Breakpoint> breakpoints, ModelRole role = ModelRole::kVerifier);

  double at(std::size_t width) const;

  // Same breakpoints with every latency multiplied by factor (> 0).
  LatencyProfile scaled(double factor) const;

  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  ModelRole role() const { return role_; }
  bool operator==(const LatencyProfile&) const = default;

 private:
  std::vector<Breakpoint> points_;
  ModelRole role_;
};

inline double latency_at(const LatencyProfile& profile, std::size_t width) { return profile.at(width); }

// CSV with header "width,latency_us".
LatencyProfile load_profile(const std::string& path, ModelRole role = ModelRole::kVerifier);
LatencyProfile parse_profile(const std::string& text, ModelRole role = ModelRole::kVerifier);
std::string profile_to_csv(const LatencyProfile& profile);
void save_profile(const LatencyProfile& profile, const std::string& path);

struct TreeShape {
  std::size_t draft_width = 1;   // leaves grown per drafter invocation
  std::size_t draft_depth = 1;   // drafter invocations
  std::size_t verify_width = 1;  // speculative tokens submitted to the verifier
};

struct SpeedupInputs {
  double aal = 1.0;
  TreeShape shape;
  const LatencyProfile* drafter = nullptr;
  const LatencyProfile* verifier = nullptr;
};

// Generative-vs-speculative speedup estimates. Verification of k speculative
// tokens also processes the confirmed token, hence T_v(k + 1).
double naive_speedup(double aal);
double sequence_speedup(double aal, std::size_t num_draft, const LatencyProfile& drafter,
                        const LatencyProfile& verifier);
double tree_speedup(const SpeedupInputs& inputs);
double tree_speedup(double aal, const TreeShape& shape, const LatencyProfile& drafter, const LatencyProfile& verifier);

// Denominator of tree_speedup: drafting plus verification time.
double tree_step_latency(const TreeShape& shape, const LatencyProfile& drafter, const LatencyProfile& verifier);

// Canonical profile shapes.
LatencyProfile flat_profile(double base_us, std::size_t max_width = 1024, ModelRole role = ModelRole::kVerifier);
LatencyProfile saturating_profile(std::size_t knee, double base_us, double slope_us_per_token,
                                  ModelRole role = ModelRole::kVerifier);
LatencyProfile linear_profile(double base_us, double slope_us_per_token, std::size_t max_width = 1024,
                              ModelRole role = ModelRole::kVerifier);

}  // namespace specsim
