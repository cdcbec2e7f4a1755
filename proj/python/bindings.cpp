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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "specsim/acceptance.hpp"
#include "specsim/config.hpp"
#include "specsim/depth_predictor.hpp"
#include "specsim/egt.hpp"
#include "specsim/error.hpp"
#include "specsim/latency.hpp"
#include "specsim/scheduler.hpp"
#include "specsim/simulator.hpp"
#include "specsim/token_tree.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace specsim;

namespace {

// Structured values cross the boundary as JSON text; the Python package
// wraps them in dicts.
json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

SimConfig config_of(const std::string& config_json, const std::string& base_dir) {
  return config_from_json(parse(config_json), base_dir);
}

std::string run_json(const std::string& config_json, const std::string& base_dir, std::size_t jobs, bool trace) {
  const auto stats = run(config_of(config_json, base_dir), jobs);
  json doc = stats_to_json(stats);
  if (trace) doc["trace_csv"] = trace_to_csv(stats);
  return doc.dump();
}

std::string sweep_json(const std::string& config_json, const std::string& base_dir,
                       const std::vector<std::string>& params, const std::vector<std::vector<std::size_t>>& values,
                       std::size_t jobs) {
  std::vector<SweepParam> ps;
  for (const auto& p : params) ps.push_back(parse_sweep_param(p));
  json rows = json::array();
  for (const auto& r : sweep(config_of(config_json, base_dir), ps, values, jobs)) {
    rows.push_back({{"values", r.values},
                    {"aal", r.aal},
                    {"step_us", r.step_us},
                    {"tpot_us", r.tpot_us},
                    {"speedup", r.speedup}});
  }
  return rows.dump();
}

std::string breakdown_json(const std::string& config_json, const std::string& base_dir, std::size_t jobs) {
  json rows = json::array();
  for (const auto& r : breakdown(config_of(config_json, base_dir), jobs)) {
    json s = stats_to_json(r.stats);
    s["name"] = r.name;
    rows.push_back(std::move(s));
  }
  return rows.dump();
}

std::string plan_search_json(const std::string& stages_csv, std::size_t depth, double aal) {
  return plan_to_json(plan_search(parse_stage_profiles(stages_csv), depth, aal)).dump();
}

std::string train_json(const std::string& config_json, const std::string& base_dir, std::size_t samples,
                       std::size_t chain_depth, std::size_t epochs, std::uint64_t seed) {
  const auto config = config_of(config_json, base_dir);
  TrainOptions opts;
  opts.epochs = epochs;
  opts.seed = seed;
  const auto data = collect_depth_samples(config, samples, chain_depth);
  const auto result = train_predictor(data, opts);
  return json{{"predictor", predictor_to_json(result.predictor)},
              {"initial_loss", result.initial_loss},
              {"final_loss", result.final_loss}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Latency-aware tree speculative decoding simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);

  py::class_<TokenTree>(m, "TokenTree")
      .def(py::init<TokenId, double>(), py::arg("root_token"), py::arg("root_prob"))
      .def("add_child", &TokenTree::add_child, py::arg("parent"), py::arg("token"), py::arg("prob"))
      .def("__len__", &TokenTree::size)
      .def_property_readonly("max_depth", &TokenTree::max_depth)
      .def("structure_array", &TokenTree::structure_array)
      .def("leaf_positions", &TokenTree::leaf_positions)
      .def("path_to_root", &TokenTree::path_to_root, py::arg("node"))
      .def("depth", [](const TokenTree& t, NodeIndex i) { return t.node(i).depth; })
      .def("prob", [](const TokenTree& t, NodeIndex i) { return t.node(i).surrogate_prob; })
      .def("mask",
           [](const TokenTree& t) {
             const auto mask = build_mask(t);
             std::vector<std::vector<int>> rows(t.size(), std::vector<int>(t.size()));
             for (std::size_t i = 0; i < t.size(); ++i) {
               for (std::size_t j = 0; j < t.size(); ++j) rows[i][j] = mask(i, j);
             }
             return rows;
           })
      .def("to_json", [](const TokenTree& t) { return tree_to_json(t).dump(); })
      .def_static("from_json", [](const std::string& text) { return tree_from_json(parse(text)); });

  py::class_<LatencyProfile>(m, "LatencyProfile")
      .def(py::init([](const std::vector<std::pair<std::size_t, double>>& points) {
             std::vector<Breakpoint> bp;
             for (const auto& [w, l] : points) bp.push_back({w, l});
             return LatencyProfile(std::move(bp));
           }),
           py::arg("breakpoints"))
      .def("at", &LatencyProfile::at, py::arg("width"))
      .def("breakpoints",
           [](const LatencyProfile& p) {
             std::vector<std::pair<std::size_t, double>> out;
             for (const auto& b : p.breakpoints()) out.emplace_back(b.width, b.latency_us);
             return out;
           })
      .def("to_csv", &profile_to_csv)
      .def_static("from_csv", [](const std::string& text) { return parse_profile(text); });

  m.def(
      "expected_accepted_length",
      [](const TokenTree& tree, const std::string& model_json) {
        return expected_accepted_length(acceptance_from_json(parse(model_json)), tree);
      },
      py::arg("tree"), py::arg("model_json") = R"({"variant":"surrogate"})");
  m.def(
      "path_accept_probs",
      [](const TokenTree& tree, const std::string& model_json) {
        return path_accept_probs(acceptance_from_json(parse(model_json)), tree);
      },
      py::arg("tree"), py::arg("model_json") = R"({"variant":"surrogate"})");
  m.def(
      "max_value_subtree",
      [](const TokenTree& tree, const std::vector<double>& values, std::size_t max_size) {
        return MaxValueSubtree(tree, values, max_size).best();
      },
      py::arg("tree"), py::arg("values"), py::arg("max_size"));
  m.def(
      "prune_verify",
      [](const TokenTree& tree, const LatencyProfile& drafter, const LatencyProfile& verifier, std::size_t depth,
         std::size_t width, std::size_t max_verify) {
        const auto r = prune_verify(tree, AcceptanceModel::surrogate(), drafter, verifier, depth, width, max_verify);
        return py::dict(py::arg("verify_width") = r.verify_width, py::arg("kept") = r.pruned.mapping,
                        py::arg("aal_estimate") = r.aal_estimate, py::arg("speedup_estimate") = r.speedup_estimate);
      },
      py::arg("tree"), py::arg("drafter"), py::arg("verifier"), py::arg("depth"), py::arg("width"),
      py::arg("max_verify"));
  m.def(
      "tree_speedup",
      [](double aal, std::size_t width, std::size_t depth, std::size_t verify_width, const LatencyProfile& d,
         const LatencyProfile& v) { return tree_speedup(aal, TreeShape{width, depth, verify_width}, d, v); },
      py::arg("aal"), py::arg("draft_width"), py::arg("draft_depth"), py::arg("verify_width"), py::arg("drafter"),
      py::arg("verifier"));
  m.def("sequence_speedup", &sequence_speedup, py::arg("aal"), py::arg("num_draft"), py::arg("drafter"),
        py::arg("verifier"));

  m.def("_run", &run_json, py::arg("config_json"), py::arg("base_dir"), py::arg("jobs"), py::arg("trace"),
        py::call_guard<py::gil_scoped_release>());
  m.def("_sweep", &sweep_json, py::arg("config_json"), py::arg("base_dir"), py::arg("params"), py::arg("values"),
        py::arg("jobs"), py::call_guard<py::gil_scoped_release>());
  m.def("_breakdown", &breakdown_json, py::arg("config_json"), py::arg("base_dir"), py::arg("jobs"),
        py::call_guard<py::gil_scoped_release>());
  m.def("_plan_search", &plan_search_json, py::arg("stages_csv"), py::arg("draft_depth"), py::arg("aal"));
  m.def("_train_predictor", &train_json, py::arg("config_json"), py::arg("base_dir"), py::arg("samples"),
        py::arg("chain_depth"), py::arg("epochs"), py::arg("seed"), py::call_guard<py::gil_scoped_release>());
}
