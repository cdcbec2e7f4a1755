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

#include "specsim/depth_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

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

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double ema_of(const std::deque<std::size_t>& history, std::size_t window, double alpha) {
  const std::size_t start = history.size() > window ? history.size() - window : 0;
  double e = static_cast<double>(history[start]);
  for (std::size_t i = start + 1; i < history.size(); ++i) {
    e = alpha * static_cast<double>(history[i]) + (1.0 - alpha) * e;
  }
  return e;
}

struct Forward {
  std::vector<double> z;  // standardized input
  std::vector<double> h;  // hidden activations
  std::vector<double> y;  // head outputs
};

Forward forward(const MlpDepth& mlp, std::span<const double> x) {
  const std::size_t in = mlp.inputs();
  const std::size_t heads = mlp.head_depths.size();
  Forward f{std::vector<double>(in), std::vector<double>(mlp.hidden), std::vector<double>(heads)};
  for (std::size_t i = 0; i < in; ++i) f.z[i] = (x[i] - mlp.feature_mean[i]) / mlp.feature_std[i];
  for (std::size_t j = 0; j < mlp.hidden; ++j) {
    double a = mlp.b1[j];
    for (std::size_t i = 0; i < in; ++i) a += mlp.w1[j * in + i] * f.z[i];
    f.h[j] = sigmoid(a);
  }
  for (std::size_t m = 0; m < heads; ++m) {
    double a = mlp.b2[m];
    for (std::size_t j = 0; j < mlp.hidden; ++j) a += mlp.w2[m * mlp.hidden + j] * f.h[j];
    f.y[m] = sigmoid(a);
  }
  return f;
}

void check_mlp(const MlpDepth& mlp) {
  const std::size_t in = mlp.inputs();
  const std::size_t heads = mlp.head_depths.size();
  if (in == 0 || heads == 0 || mlp.hidden == 0) throw ConfigError("MLP predictor has empty layers");
  if (mlp.feature_std.size() != in || mlp.w1.size() != mlp.hidden * in || mlp.b1.size() != mlp.hidden ||
      mlp.w2.size() != heads * mlp.hidden || mlp.b2.size() != heads) {
    throw ConfigError("MLP predictor weight shapes are inconsistent");
  }
  for (std::size_t m = 0; m < heads; ++m) {
    if (mlp.head_depths[m] < 1 || (m > 0 && mlp.head_depths[m] <= mlp.head_depths[m - 1])) {
      throw ConfigError("MLP head depths must be positive and strictly increasing");
    }
  }
  for (double s : mlp.feature_std) {
    if (!(s > 0.0)) throw ConfigError("MLP feature_std entries must be positive");
  }
}

}  // namespace

const std::vector<std::string>& depth_feature_names() {
  static const std::vector<std::string> names{"ema_accepted_len", "last_accepted_len", "root_top1_mass",
                                              "root_top4_mass", "root_entropy"};
  return names;
}

FeatureTracker::FeatureTracker(std::size_t window, double alpha) : window_(window), alpha_(alpha) {
  if (window < 1) throw ConfigError("feature window must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("feature EMA alpha must lie in (0,1]");
}

void FeatureTracker::observe(std::size_t accepted_len) {
  history_.push_back(accepted_len);
  if (history_.size() > window_) history_.pop_front();
}

std::vector<double> FeatureTracker::features(std::span<const Candidate> root_candidates) const {
  std::vector<double> f(kNumDepthFeatures, 0.0);
  if (!history_.empty()) {
    f[0] = ema_of(history_, window_, alpha_);
    f[1] = static_cast<double>(history_.back());
  }
  double mass = 0.0;
  double entropy = 0.0;
  for (std::size_t r = 0; r < root_candidates.size(); ++r) {
    const double p = root_candidates[r].prob;
    if (r == 0) f[2] = p;
    if (r < 4) f[3] += p;
    mass += p;
    if (p > 0.0) entropy -= p * std::log(p);
  }
  const double residual = 1.0 - mass;
  if (residual > 0.0) entropy -= residual * std::log(residual);
  f[4] = entropy;
  return f;
}

std::vector<double> MlpDepth::heads(std::span<const double> features) const {
  if (features.size() != inputs()) {
    throw DomainError("feature dimension " + std::to_string(features.size()) + " != predictor input " +
                      std::to_string(inputs()));
  }
  return forward(*this, features).y;
}

DepthPredictor::DepthPredictor(Variant v, std::size_t max_depth, std::size_t fallback_depth)
    : v_(std::move(v)), max_depth_(max_depth), fallback_(fallback_depth) {
  if (max_depth_ < 1) throw ConfigError("predictor max_depth must be >= 1");
  if (fallback_ < 1 || fallback_ > max_depth_) throw ConfigError("fallback depth must lie in [1, max_depth]");
  std::visit(overloaded{
                 [&](const FixedDepth& f) {
                   if (f.depth < 1 || f.depth > max_depth_) throw ConfigError("fixed depth must lie in [1, max_depth]");
                 },
                 [](const EmaDepth& e) {
                   if (e.window < 1) throw ConfigError("EMA window must be >= 1");
                   if (!(e.alpha > 0.0 && e.alpha <= 1.0)) throw ConfigError("EMA alpha must lie in (0,1]");
                 },
                 [](const MlpDepth& m) { check_mlp(m); },
             },
             v_);
}

void DepthPredictor::observe(std::size_t accepted_len) {
  if (const auto* e = std::get_if<EmaDepth>(&v_)) {
    history_.push_back(accepted_len);
    if (history_.size() > e->window) history_.pop_front();
  }
}

std::size_t DepthPredictor::clamp(double d) const {
  const double r = std::round(d);
  if (r < 1.0) return 1;
  if (r > static_cast<double>(max_depth_)) return max_depth_;
  return static_cast<std::size_t>(r);
}

std::size_t DepthPredictor::predict(std::span<const double> features) const {
  return std::visit(overloaded{
                        [&](const FixedDepth& f) { return f.depth; },
                        [&](const EmaDepth& e) {
                          if (history_.empty()) return fallback_;
                          return clamp(ema_of(history_, e.window, e.alpha));
                        },
                        [&](const MlpDepth& m) {
                          const auto y = m.heads(features);
                          std::size_t depth = 1;
                          for (std::size_t k = 0; k < y.size(); ++k) {
                            if (y[k] >= m.threshold) depth = m.head_depths[k];
                          }
                          return clamp(static_cast<double>(depth));
                        },
                    },
                    v_);
}

std::size_t predict_depth(const DepthPredictor& predictor, std::span<const double> features) {
  return predictor.predict(features);
}

double predictor_loss(const MlpDepth& mlp, std::span<const DepthSample> samples) {
  if (samples.empty()) return 0.0;
  constexpr double eps = 1e-12;
  double total = 0.0;
  for (const auto& s : samples) {
    const auto y = mlp.heads(s.features);
    for (std::size_t m = 0; m < y.size(); ++m) {
      const bool label = s.realized_len >= mlp.head_depths[m];
      total -= label ? std::log(std::max(y[m], eps)) : std::log(std::max(1.0 - y[m], eps));
    }
  }
  return total / static_cast<double>(samples.size() * mlp.head_depths.size());
}

TrainResult train_predictor(std::span<const DepthSample> samples, const TrainOptions& options) {
  if (samples.size() < 2) throw DomainError("training needs at least two samples");
  if (options.epochs < 1 || options.batch_size < 1 || options.hidden < 1 || options.head_depths.empty()) {
    throw ConfigError("invalid training options");
  }
  const std::size_t in = samples.front().features.size();
  if (in == 0) throw DomainError("training samples have no features");
  for (const auto& s : samples) {
    if (s.features.size() != in) throw DomainError("training samples have inconsistent feature dimensions");
  }

  MlpDepth mlp;
  mlp.head_depths = options.head_depths;
  mlp.hidden = options.hidden;
  mlp.feature_mean.assign(in, 0.0);
  mlp.feature_std.assign(in, 0.0);
  const double n = static_cast<double>(samples.size());
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < in; ++i) mlp.feature_mean[i] += s.features[i] / n;
  }
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < in; ++i) {
      const double d = s.features[i] - mlp.feature_mean[i];
      mlp.feature_std[i] += d * d / n;
    }
  }
  for (double& v : mlp.feature_std) v = v > 1e-24 ? std::sqrt(v) : 1.0;

  const std::size_t heads = mlp.head_depths.size();
  const std::size_t hidden = mlp.hidden;
  RandomStream rng(options.seed);
  const double a1 = std::sqrt(6.0 / static_cast<double>(in + hidden));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + heads));
  mlp.w1.resize(hidden * in);
  for (double& w : mlp.w1) w = rng.uniform(-a1, a1);
  mlp.b1.assign(hidden, 0.0);
  mlp.w2.resize(heads * hidden);
  for (double& w : mlp.w2) w = rng.uniform(-a2, a2);
  mlp.b2.assign(heads, 0.0);

  const double initial = predictor_loss(mlp, samples);

  std::vector<double> v_w1(mlp.w1.size(), 0.0), v_b1(hidden, 0.0), v_w2(mlp.w2.size(), 0.0), v_b2(heads, 0.0);
  std::vector<double> g_w1(mlp.w1.size()), g_b1(hidden), g_w2(mlp.w2.size()), g_b2(heads);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const double scale = 1.0 / static_cast<double>((end - start) * heads);
      std::fill(g_w1.begin(), g_w1.end(), 0.0);
      std::fill(g_b1.begin(), g_b1.end(), 0.0);
      std::fill(g_w2.begin(), g_w2.end(), 0.0);
      std::fill(g_b2.begin(), g_b2.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto& s = samples[order[b]];
        const auto f = forward(mlp, s.features);
        std::vector<double> dh(hidden, 0.0);
        for (std::size_t m = 0; m < heads; ++m) {
          const double label = s.realized_len >= mlp.head_depths[m] ? 1.0 : 0.0;
          const double delta = (f.y[m] - label) * scale;
          g_b2[m] += delta;
          for (std::size_t j = 0; j < hidden; ++j) {
            g_w2[m * hidden + j] += delta * f.h[j];
            dh[j] += delta * mlp.w2[m * hidden + j];
          }
        }
        for (std::size_t j = 0; j < hidden; ++j) {
          const double dj = dh[j] * f.h[j] * (1.0 - f.h[j]);
          g_b1[j] += dj;
          for (std::size_t i = 0; i < in; ++i) g_w1[j * in + i] += dj * f.z[i];
        }
      }
      auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
        for (std::size_t k = 0; k < w.size(); ++k) {
          v[k] = options.momentum * v[k] - options.learning_rate * g[k];
          w[k] += v[k];
        }
      };
      step(mlp.w1, v_w1, g_w1);
      step(mlp.b1, v_b1, g_b1);
      step(mlp.w2, v_w2, g_w2);
      step(mlp.b2, v_b2, g_b2);
    }
  }

  const double final_loss = predictor_loss(mlp, samples);
  const std::size_t max_depth = std::max(options.max_depth, options.head_depths.back());
  return TrainResult{DepthPredictor(std::move(mlp), max_depth, std::min(options.fallback_depth, max_depth)), initial,
                     final_loss};
}

nlohmann::json predictor_to_json(const DepthPredictor& predictor) {
  nlohmann::json j = std::visit(
      overloaded{
          [](const FixedDepth& f) { return nlohmann::json{{"kind", "fixed"}, {"depth", f.depth}}; },
          [](const EmaDepth& e) { return nlohmann::json{{"kind", "ema"}, {"window", e.window}, {"alpha", e.alpha}}; },
          [](const MlpDepth& m) {
            return nlohmann::json{{"kind", "mlp"},         {"feature_names", depth_feature_names()},
                                  {"head_depths", m.head_depths}, {"feature_mean", m.feature_mean},
                                  {"feature_std", m.feature_std}, {"hidden", m.hidden},
                                  {"w1", m.w1},                   {"b1", m.b1},
                                  {"w2", m.w2},                   {"b2", m.b2},
                                  {"threshold", m.threshold}};
          },
      },
      predictor.variant());
  j["max_depth"] = predictor.max_depth();
  j["fallback_depth"] = predictor.fallback_depth();
  return j;
}

DepthPredictor predictor_from_json(const nlohmann::json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "fixed") {
      const auto depth = doc.at("depth").get<std::size_t>();
      return DepthPredictor(FixedDepth{depth}, doc.value("max_depth", std::max<std::size_t>(depth, 64)),
                            doc.value("fallback_depth", depth));
    }
    const auto max_depth = doc.value("max_depth", std::size_t{16});
    const auto fallback = doc.value("fallback_depth", std::min<std::size_t>(8, max_depth));
    if (kind == "ema") {
      return DepthPredictor(EmaDepth{doc.value("window", std::size_t{8}), doc.value("alpha", 0.5)}, max_depth,
                            fallback);
    }
    if (kind == "mlp") {
      MlpDepth m;
      m.head_depths = doc.at("head_depths").get<std::vector<std::size_t>>();
      m.feature_mean = doc.at("feature_mean").get<std::vector<double>>();
      m.feature_std = doc.at("feature_std").get<std::vector<double>>();
      m.hidden = doc.at("hidden").get<std::size_t>();
      m.w1 = doc.at("w1").get<std::vector<double>>();
      m.b1 = doc.at("b1").get<std::vector<double>>();
      m.w2 = doc.at("w2").get<std::vector<double>>();
      m.b2 = doc.at("b2").get<std::vector<double>>();
      m.threshold = doc.value("threshold", 0.5);
      return DepthPredictor(std::move(m), max_depth, fallback);
    }
    throw ConfigError("unknown depth predictor kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid depth predictor: ") + e.what());
  }
}

}  // namespace specsim
