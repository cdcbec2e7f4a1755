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
#include <deque>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "specsim/egt.hpp"

namespace specsim {

// Feature layout fed to the depth predictor.
inline constexpr std::size_t kNumDepthFeatures = 5;
const std::vector<std::string>& depth_feature_names();

/// Tracks realized accepted lengths and derives predictor features:
/// [EMA of the last `window` lengths, last length, top-1 root-candidate mass,
///  top-4 root-candidate mass, entropy of the root-candidate distribution].
class FeatureTracker {
 public:
  explicit FeatureTracker(std::size_t window = 8, double alpha = 0.5);

  void observe(std::size_t accepted_len);
  bool warm() const { return history_.size() >= window_; }
  const std::deque<std::size_t>& history() const { return history_; }

  std::vector<double> features(std::span<const Candidate> root_candidates) const;

 private:
  std::size_t window_;
  double alpha_;
  std::deque<std::size_t> history_;
};

struct DepthSample {
  std::vector<double> features;
  std::size_t realized_len = 1;
};

struct FixedDepth {
  std::size_t depth = 8;
};

// round(EMA of the last `window` observed lengths), seeded with the oldest.
struct EmaDepth {
  std::size_t window = 8;
  double alpha = 0.5;
};

/// Two-layer perceptron: standardized features -> logistic hidden layer ->
/// one logistic head per candidate depth d estimating P(accepted_len >= d).
struct MlpDepth {
  std::vector<std::size_t> head_depths;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  std::size_t hidden = 16;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // heads x hidden, row-major
  std::vector<double> b2;  // heads
  double threshold = 0.5;

  std::size_t inputs() const { return feature_mean.size(); }
  std::vector<double> heads(std::span<const double> features) const;
};

/// Predicts the number of drafter invocations for the next iteration.
/// Stateful for EmaDepth: observe() feeds realized lengths back.
class DepthPredictor {
 public:
  using Variant = std::variant<FixedDepth, EmaDepth, MlpDepth>;

  DepthPredictor(Variant v, std::size_t max_depth, std::size_t fallback_depth);

  static DepthPredictor fixed(std::size_t depth, std::size_t max_depth = 64) {
    return DepthPredictor(FixedDepth{depth}, std::max(max_depth, depth), depth);
  }

  // Feeds the realized accepted length of the last iteration.
  void observe(std::size_t accepted_len);

  std::size_t predict(std::span<const double> features) const;

  const Variant& variant() const { return v_; }
  std::size_t max_depth() const { return max_depth_; }
  std::size_t fallback_depth() const { return fallback_; }
  bool is_fixed() const { return std::holds_alternative<FixedDepth>(v_); }

 private:
  std::size_t clamp(double d) const;

  Variant v_;
  std::size_t max_depth_;
  std::size_t fallback_;
  std::deque<std::size_t> history_;
};

std::size_t predict_depth(const DepthPredictor& predictor, std::span<const double> features);

struct TrainOptions {
  std::vector<std::size_t> head_depths{2, 4, 6, 8, 12, 16};
  std::size_t hidden = 16;
  double learning_rate = 0.5;
  double momentum = 0.9;
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t max_depth = 16;
  std::size_t fallback_depth = 8;
};

struct TrainResult {
  DepthPredictor predictor;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Mean per-head binary cross-entropy against labels 1{realized_len >= d}.
double predictor_loss(const MlpDepth& mlp, std::span<const DepthSample> samples);

/// Mini-batch gradient descent with momentum on the per-head cross-entropy.
/// Deterministic for a given seed.
TrainResult train_predictor(std::span<const DepthSample> samples, const TrainOptions& options);

nlohmann::json predictor_to_json(const DepthPredictor& predictor);
DepthPredictor predictor_from_json(const nlohmann::json& doc);

}  // namespace specsim
