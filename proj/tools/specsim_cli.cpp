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

// specsim command-line driver.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specsim/config.hpp"
#include "specsim/depth_predictor.hpp"
#include "specsim/error.hpp"
#include "specsim/latency.hpp"
#include "specsim/scheduler.hpp"
#include "specsim/simulator.hpp"
#include "specsim/token_tree.hpp"

namespace {

using nlohmann::json;
using namespace specsim;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Emits to a file, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// "1,2,4", "1..8" or a mix such as "1..4,8,16".
std::vector<std::size_t> parse_values(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  auto number = [&](const std::string& s) -> std::size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("sweep values must be positive integers: \"" + s + "\"");
    }
    return std::stoull(s);
  };
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(number(item));
      continue;
    }
    const auto lo = number(item.substr(0, dots));
    const auto hi = number(item.substr(dots + 2));
    if (hi < lo) throw ConfigError("descending range: " + item);
    for (auto v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty value list");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw ConfigError("sweep values must be strictly ascending");
  }
  if (out.front() == 0) throw ConfigError("sweep values must be >= 1");
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads a file of the given kind and checks its invariants; returns a short description.
std::string validate_file(const std::string& path, std::string kind) {
  if (!std::filesystem::exists(path)) throw ConfigError("file not found: " + path);
  const std::string text = slurp(path);
  if (kind == "auto") {
    const auto first = text.substr(0, text.find('\n'));
    if (first.rfind("width", 0) == 0) {
      kind = "profile";
    } else if (first.rfind("stage", 0) == 0) {
      kind = "stages";
    } else {
      json doc;
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
      }
      if (doc.is_object() && doc.contains("nodes")) {
        kind = "tree";
      } else if (doc.is_object() && doc.contains("kind") && !doc.contains("policy")) {
        kind = "predictor";
      } else {
        kind = "config";
      }
    }
  }
  if (kind == "profile") {
    const auto p = parse_profile(text);
    return "profile with " + std::to_string(p.breakpoints().size()) + " breakpoints";
  }
  if (kind == "stages") {
    parse_stage_profiles(text).validate();
    return "stage profile";
  }
  if (kind == "tree") {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
    const auto t = tree_from_json(doc);
    return "tree with " + std::to_string(t.size()) + " nodes";
  }
  if (kind == "predictor") {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": " + e.what());
    }
    predictor_from_json(doc);
    return "depth predictor";
  }
  if (kind == "config") {
    const auto c = load_config(path);
    return "config (" + policy_name(c.policy) + ")";
  }
  throw ConfigError("unknown file kind: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-aware tree speculative decoding simulator"};
  app.require_subcommand(1);

  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed;

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run one experiment config");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "Experiment config JSON")->required();
  sim->add_option("--seed", seed, "Override the config seed");
  sim->add_option("--out", sim_out, "Output prefix for .summary.json and .trace.csv")->required();
  sim->add_option("--jobs", jobs, "Worker threads for replications")->check(CLI::PositiveNumber);

  // compare
  auto* cmp = app.add_subcommand("compare", "Run several configs on shared profiles");
  std::vector<std::string> cmp_configs;
  std::string cmp_out;
  cmp->add_option("--config", cmp_configs, "Experiment config JSON (repeat)")->required();
  cmp->add_option("--seed", seed, "Override every config seed");
  cmp->add_option("--out", cmp_out, "CSV output path (default stdout)");
  cmp->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // sweep
  auto* swp = app.add_subcommand("sweep", "Sweep draft/verify shape parameters");
  std::string swp_config, swp_out;
  std::vector<std::string> swp_params, swp_values;
  swp->add_option("--config", swp_config, "Experiment config JSON")->required();
  swp->add_option("--param", swp_params, "verify_width | draft_width | draft_depth (repeat for a grid)")->required();
  swp->add_option("--values", swp_values, "Ascending integers, e.g. 1,2,4 or 1..64 (one list per --param)")
      ->required();
  swp->add_option("--seed", seed, "Override the config seed");
  swp->add_option("--out", swp_out, "CSV output path (default stdout)");
  swp->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // plan-search
  auto* pln = app.add_subcommand("plan-search", "Search AoT transforms and stage orders");
  std::string pln_stages, pln_out;
  double pln_aal = 1.0;
  std::size_t pln_depth = 4, pln_window = 4;
  std::optional<double> pln_tail_inflation, pln_head_inflation;
  pln->add_option("--stages", pln_stages, "Stage profile CSV")->required();
  pln->add_option("--aal", pln_aal, "Expected accepted length per iteration");
  pln->add_option("--draft-depth", pln_depth, "Drafter invocations per iteration")->check(CLI::PositiveNumber);
  pln->add_option("--window", pln_window, "Unrolled iterations per evaluation")->check(CLI::PositiveNumber);
  pln->add_option("--tail-inflation,--leaves", pln_tail_inflation, "AoT tail draft multiplier without an aot row");
  pln->add_option("--head-inflation", pln_head_inflation, "AoT head draft multiplier without an aot row");
  pln->add_option("--out", pln_out, "Timeline JSON output path");

  // train-predictor
  auto* trn = app.add_subcommand("train-predictor", "Train the depth predictor on simulated samples");
  std::string trn_config, trn_out;
  std::size_t trn_samples = 2000, trn_chain = 16;
  TrainOptions train;
  trn->add_option("--config", trn_config, "Experiment config JSON")->required();
  trn->add_option("--samples", trn_samples, "Number of samples")->check(CLI::PositiveNumber);
  trn->add_option("--chain-depth", trn_chain, "Depth of the profiling chain")->check(CLI::PositiveNumber);
  trn->add_option("--epochs", train.epochs, "Training epochs")->check(CLI::PositiveNumber);
  trn->add_option("--lr", train.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  trn->add_option("--hidden", train.hidden, "Hidden units")->check(CLI::PositiveNumber);
  trn->add_option("--seed", seed, "Sampling and initialization seed");
  trn->add_option("--out", trn_out, "Checkpoint JSON output path")->required();

  // gen-profile
  auto* gen = app.add_subcommand("gen-profile", "Write a synthetic latency profile CSV");
  std::string gen_shape, gen_out;
  double gen_base = 100.0, gen_slope = 0.0;
  std::size_t gen_knee = 64, gen_max = 1024;
  gen->add_option("--shape", gen_shape, "flat | saturating | linear")->required();
  gen->add_option("--base", gen_base, "Latency at width 1 (us)");
  gen->add_option("--knee", gen_knee, "Saturation width");
  gen->add_option("--slope", gen_slope, "Latency growth per token (us)");
  gen->add_option("--max-width", gen_max, "Last breakpoint width (flat, linear)");
  gen->add_option("--out", gen_out, "CSV output path (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "Check a config, profile, stage, tree or predictor file");
  std::string val_path, val_kind = "auto";
  val->add_option("path", val_path, "File to check")->required();
  val->add_option("--kind", val_kind, "auto | config | profile | stages | tree | predictor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sim) {
      auto config = load_config(sim_config);
      if (seed) config.seed = *seed;
      const auto stats = run(config, jobs);
      json summary = stats_to_json(stats);
      summary["policy"] = policy_name(config.policy);
      summary["seed"] = config.seed;
      const std::string text = summary.dump(2) + "\n";
      write_file(sim_out + ".summary.json", text);
      write_file(sim_out + ".trace.csv", trace_to_csv(stats));
      std::cout << text;
    } else if (*cmp) {
      std::vector<SimConfig> configs;
      for (const auto& p : cmp_configs) {
        configs.push_back(load_config(p));
        if (seed) configs.back().seed = *seed;
      }
      const auto rows = compare(configs, jobs);
      std::ostringstream out;
      out << "config,policy,aal,step_us,tpot_us,speedup,relative_speedup\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& s = rows[i].stats;
        out << cmp_configs[i] << ',' << rows[i].name << ',' << fmt(s.aal) << ',' << fmt(s.step_latency_us) << ','
            << fmt(s.tpot_us) << ',' << fmt(s.speedup) << ',' << fmt(rows[i].relative_speedup) << '\n';
      }
      emit(cmp_out, out.str());
    } else if (*swp) {
      if (swp_params.size() != swp_values.size()) throw ConfigError("give one --values list per --param");
      auto config = load_config(swp_config);
      if (seed) config.seed = *seed;
      std::vector<SweepParam> params;
      std::vector<std::vector<std::size_t>> values;
      for (std::size_t i = 0; i < swp_params.size(); ++i) {
        params.push_back(parse_sweep_param(swp_params[i]));
        values.push_back(parse_values(swp_values[i]));
      }
      emit(swp_out, sweep_to_csv(params, sweep(config, params, values, jobs)));
    } else if (*pln) {
      auto profiles = load_stage_profiles(pln_stages);
      if (pln_tail_inflation) profiles.tail_inflation = *pln_tail_inflation;
      if (pln_head_inflation) profiles.head_inflation = *pln_head_inflation;
      profiles.validate();
      if (!(pln_aal >= 1.0)) throw ConfigError("--aal must be >= 1");
      PlanSearchOptions options;
      options.iterations = pln_window;
      const auto result = plan_search(profiles, pln_depth, pln_aal, options);
      const auto doc = plan_to_json(result);
      std::string names;
      for (const auto& t : doc["transforms"]) names += (names.empty() ? "" : ",") + t.get<std::string>();
      std::cout << "transforms: " << (names.empty() ? "none" : names) << "\n"
                << "makespan_us: " << fmt(result.timeline.makespan_us) << "\n"
                << "cycle_us: " << fmt(result.timeline.cycle_us()) << "\n"
                << "makespan_per_token_us: " << fmt(result.per_token_us) << "\n"
                << "canonical_per_token_us: " << fmt(result.canonical_per_token_us) << "\n";
      if (!pln_out.empty()) write_file(pln_out, doc.dump(2) + "\n");
    } else if (*trn) {
      auto config = load_config(trn_config);
      if (seed) config.seed = *seed;
      train.seed = config.seed;
      if (const auto* egt = std::get_if<EgtPolicy>(&config.policy)) {
        train.max_depth = egt->egt.max_depth;
        train.fallback_depth = std::min<std::size_t>(train.fallback_depth, train.max_depth);
        std::erase_if(train.head_depths, [&](std::size_t d) { return d > train.max_depth; });
      }
      const auto samples = collect_depth_samples(config, trn_samples, trn_chain);
      const auto result = train_predictor(samples, train);
      write_file(trn_out, predictor_to_json(result.predictor).dump(2) + "\n");
      std::cout << json{{"samples", samples.size()},
                        {"initial_loss", result.initial_loss},
                        {"final_loss", result.final_loss}}
                       .dump(2)
                << "\n";
    } else if (*gen) {
      LatencyProfile profile = flat_profile(1.0);
      if (gen_slope < 0.0) throw ConfigError("--slope must be non-negative");
      if (gen_base < 0.0) throw ConfigError("--base must be non-negative");
      if (gen_shape == "flat") {
        profile = flat_profile(gen_base, gen_max);
      } else if (gen_shape == "saturating") {
        profile = saturating_profile(gen_knee, gen_base, gen_slope);
      } else if (gen_shape == "linear") {
        profile = linear_profile(gen_base, gen_slope, gen_max);
      } else {
        throw ConfigError("unknown profile shape: " + gen_shape);
      }
      emit(gen_out, profile_to_csv(profile));
    } else if (*val) {
      std::cout << "ok: " << validate_file(val_path, val_kind) << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    // Invalid parameters reach the library as domain errors.
    std::cerr << "error: " << e.what() << "\n";
    return *val || *gen || *pln ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
