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

#include "specsim/latency.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "specsim/error.hpp"

namespace specsim {
namespace {

constexpr double kAalSlack = 1e-9;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

LatencyProfile::LatencyProfile(std::vector<Breakpoint> breakpoints, ModelRole role)
    : points_(std::move(breakpoints)), role_(role) {
  if (points_.size() < 2) throw DomainError("latency profile needs at least two breakpoints");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (p.width < 1) throw DomainError("latency profile widths must be positive");
    if (!std::isfinite(p.latency_us) || p.latency_us < 0.0) {
      throw DomainError("latency profile latencies must be finite and non-negative");
    }
    if (i > 0 && p.width <= points_[i - 1].width) {
      throw DomainError("latency profile widths must be strictly increasing");
    }
    if (i > 0 && p.latency_us < points_[i - 1].latency_us) {
      throw DomainError("latency profile latencies must be non-decreasing");
    }
  }
}

double LatencyProfile::at(std::size_t width) const {
  if (width < 1) throw DomainError("latency width must be >= 1");
  if (width <= points_.front().width) return points_.front().latency_us;
  std::size_t seg = points_.size() - 2;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (width <= points_[i].width) {
      seg = i - 1;
      break;
    }
  }
  const auto& a = points_[seg];
  const auto& b = points_[seg + 1];
  const double slope = (b.latency_us - a.latency_us) / static_cast<double>(b.width - a.width);
  return a.latency_us + slope * (static_cast<double>(width) - static_cast<double>(a.width));
}

LatencyProfile LatencyProfile::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("profile scale must be positive");
  auto pts = points_;
  for (auto& p : pts) p.latency_us *= factor;
  return LatencyProfile(std::move(pts), role_);
}

LatencyProfile parse_profile(const std::string& text, ModelRole role) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "width,latency_us") {
    throw ParseError("latency profile must start with header 'width,latency_us'");
  }
  std::vector<Breakpoint> pts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("profile line " + std::to_string(lineno) + ": expected two fields");
    try {
      std::size_t used = 0;
      const std::string w = trim(line.substr(0, comma));
      const std::string l = trim(line.substr(comma + 1));
      const long long width = std::stoll(w, &used);
      if (used != w.size() || width < 1) throw std::invalid_argument("width");
      const double lat = std::stod(l, &used);
      if (used != l.size()) throw std::invalid_argument("latency");
      pts.push_back({static_cast<std::size_t>(width), lat});
    } catch (const std::logic_error&) {
      throw ParseError("profile line " + std::to_string(lineno) + ": malformed number in '" + line + "'");
    }
  }
  try {
    return LatencyProfile(std::move(pts), role);
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid latency profile: ") + e.what());
  }
}

LatencyProfile load_profile(const std::string& path, ModelRole role) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open latency profile: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_profile(ss.str(), role);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string profile_to_csv(const LatencyProfile& profile) {
  std::ostringstream out;
  out << "width,latency_us\n";
  out.precision(17);
  for (const auto& p : profile.breakpoints()) out << p.width << ',' << p.latency_us << '\n';
  return out.str();
}

void save_profile(const LatencyProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write latency profile: " + path);
  out << profile_to_csv(profile);
}

double naive_speedup(double aal) {
  if (!(aal >= 1.0)) throw DomainError("AAL must be >= 1");
  return aal;
}

double sequence_speedup(double aal, std::size_t num_draft, const LatencyProfile& drafter,
                        const LatencyProfile& verifier) {
  if (!(aal >= 1.0)) throw DomainError("AAL must be >= 1");
  if (static_cast<double>(num_draft) < aal - 1.0 - kAalSlack) {
    throw DomainError("num_draft must be >= AAL - 1");
  }
  return aal * verifier.at(1) /
         (static_cast<double>(num_draft) * drafter.at(1) + verifier.at(num_draft + 1));
}

double tree_step_latency(const TreeShape& shape, const LatencyProfile& drafter, const LatencyProfile& verifier) {
  return static_cast<double>(shape.draft_depth) * drafter.at(shape.draft_width) + verifier.at(shape.verify_width + 1);
}

double tree_speedup(double aal, const TreeShape& shape, const LatencyProfile& drafter, const LatencyProfile& verifier) {
  if (shape.draft_width < 1 || shape.draft_depth < 1 || shape.verify_width < 1) {
    throw DomainError("tree shape fields must be >= 1");
  }
  if (!(aal >= 1.0)) throw DomainError("AAL must be >= 1");
  if (aal > static_cast<double>(shape.verify_width) + 1.0 + kAalSlack) {
    throw DomainError("AAL cannot exceed W_verify + 1");
  }
  return aal * verifier.at(1) / tree_step_latency(shape, drafter, verifier);
}

double tree_speedup(const SpeedupInputs& inputs) {
  if (inputs.drafter == nullptr || inputs.verifier == nullptr) throw DomainError("speedup inputs need both profiles");
  return tree_speedup(inputs.aal, inputs.shape, *inputs.drafter, *inputs.verifier);
}

LatencyProfile flat_profile(double base_us, std::size_t max_width, ModelRole role) {
  if (max_width < 2) throw DomainError("flat profile needs max_width >= 2");
  return LatencyProfile({{1, base_us}, {max_width, base_us}}, role);
}

LatencyProfile saturating_profile(std::size_t knee, double base_us, double slope_us_per_token, ModelRole role) {
  if (knee < 2) throw DomainError("saturating profile needs knee >= 2");
  if (slope_us_per_token < 0.0) throw DomainError("slope must be non-negative");
  return LatencyProfile({{1, base_us}, {knee, base_us}, {2 * knee, base_us + slope_us_per_token * static_cast<double>(knee)}},
                        role);
}

LatencyProfile linear_profile(double base_us, double slope_us_per_token, std::size_t max_width, ModelRole role) {
  if (max_width < 2) throw DomainError("linear profile needs max_width >= 2");
  if (slope_us_per_token < 0.0) throw DomainError("slope must be non-negative");
  return LatencyProfile(
      {{1, base_us}, {max_width, base_us + slope_us_per_token * static_cast<double>(max_width - 1)}}, role);
}

}  // namespace specsim
