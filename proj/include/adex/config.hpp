// Copyright 2026 The adex Authors
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

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adex/baselines.hpp"
#include "adex/core.hpp"
#include "adex/generator.hpp"

namespace adex {

// Full application configuration: generator + exposure model + single-run
// settings + sweep grid.  The JSON shape below is the single source of truth
// for which keys exist; overrides naming anything else are rejected.
struct AppConfig {
  GeneratorConfig generator;

  // exposure section
  double kappa = 0.95;            // geometric position decay
  std::vector<double> q_explicit; // non-empty: explicit per-slot exposure curve

  // run section
  std::string strategy = "hca2e";
  double alpha = 0.5;
  int beam = 5;
  double m_star = 0.10;
  double beta = -1.0;                // < 0: calibrate on a stream slice
  double gap_decay = 0.8;
  std::vector<int> fixed_positions;  // empty: calibrate from the exposure model
  std::uint64_t run_seed = 7;        // user-feedback sampling seed
  int jobs = 1;
  int calibration_requests = 2000;
  double initial_rho = -1.0;         // < 0: calibrate on a stream slice
  bool controller_enabled = true;
  double gamma = 0.1;
  int window = 2000;
  double rho_min = 0.0;
  double rho_max = -1.0;

  // sweep section
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::string> sweep_strategies = {"hca2e", "wpo", "gea", "fixed"};
  std::vector<int> beams = {5};
};

namespace cfgdetail {

using json = nlohmann::json;

inline json defaults_json() {
  const AppConfig d;
  json generator = {{"seed", d.generator.seed},
                    {"num_requests", d.generator.num_requests},
                    {"page_length", d.generator.constraints.page_length},
                    {"top_ad_slot", d.generator.constraints.top_ad_slot},
                    {"min_ad_gap", d.generator.constraints.min_ad_gap},
                    {"ads_min", d.generator.ads_min},
                    {"ads_max", d.generator.ads_max},
                    {"pctr_a", d.generator.pctr_a},
                    {"pctr_b", d.generator.pctr_b},
                    {"pctr_scale", d.generator.pctr_scale},
                    {"pcvr_a", d.generator.pcvr_a},
                    {"pcvr_b", d.generator.pcvr_b},
                    {"pcvr_scale", d.generator.pcvr_scale},
                    {"price_mu", d.generator.price_mu},
                    {"price_sigma", d.generator.price_sigma},
                    {"bid_mu", d.generator.bid_mu},
                    {"bid_sigma", d.generator.bid_sigma},
                    {"ad_quality_sigma", d.generator.ad_quality_sigma},
                    {"reserve_price", d.generator.reserve_price},
                    {"ad_conv_lift", d.generator.ad_conv_lift}};
  json run = {{"strategy", d.strategy},
              {"alpha", d.alpha},
              {"beam", d.beam},
              {"m_star", d.m_star},
              {"beta", d.beta},
              {"gap_decay", d.gap_decay},
              {"fixed_positions", d.fixed_positions},
              {"seed", d.run_seed},
              {"jobs", d.jobs},
              {"calibration_requests", d.calibration_requests},
              {"initial_rho", d.initial_rho},
              {"controller",
               {{"enabled", d.controller_enabled},
                {"gamma", d.gamma},
                {"window", d.window},
                {"rho_min", d.rho_min},
                {"rho_max", d.rho_max}}}};
  json sweep = {{"alphas", d.alphas},
                {"strategies", d.sweep_strategies},
                {"beams", d.beams}};
  return json{{"generator", generator},
              {"exposure", {{"kappa", d.kappa}, {"q", d.q_explicit}}},
              {"run", run},
              {"sweep", sweep}};
}

// Merge `provided` into `base`, insisting every provided key already exists.
inline void merge_checked(json& base, const json& provided, const std::string& prefix) {
  if (!provided.is_object())
    throw ConfigError("config section '" + (prefix.empty() ? "<root>" : prefix) +
                      "' must be an object");
  for (auto it = provided.begin(); it != provided.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    json& slot = base[it.key()];
    const json& value = it.value();
    if (slot.is_object()) {
      merge_checked(slot, value, path);
      continue;
    }
    const bool both_numeric = slot.is_number() && value.is_number();
    const bool both_arrays = slot.is_array() && value.is_array();
    if (!both_numeric && !both_arrays && slot.type() != value.type())
      throw ConfigError("config key '" + path + "' has the wrong type");
    slot = value;
  }
}

// Set one dotted path ("run.controller.gamma") to a JSON value.
inline void apply_override(json& base, const std::string& key, const json& value) {
  json* node = &base;
  std::string prefix;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    const std::string path = prefix.empty() ? part : prefix + "." + part;
    if (part.empty() || !node->contains(part))
      throw ConfigError("unknown config key '" + key + "'");
    if (dot == std::string::npos) {
      json wrapped = json::object({{part, value}});
      merge_checked(*node, wrapped, prefix);
      return;
    }
    node = &(*node)[part];
    prefix = path;
    pos = dot + 1;
  }
}

template <typename T>
T get_as(const json& node, const std::string& path) {
  try {
    return node.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + path + "' has the wrong type");
  }
}

}  // namespace cfgdetail

// Parse "key=value" override strings; values are JSON literals with a string
// fallback, so strategy=hca2e and sweep.alphas=[0.1,0.2] both work.
inline std::pair<std::string, nlohmann::json> parse_override(const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;  // bare strings are strings
  }
  return {key, value};
}

struct LoadedConfig {
  AppConfig config;
  nlohmann::json effective;  // fully resolved tree, for manifests
};

inline LoadedConfig load_config(const std::string& config_path,
                                const std::vector<std::string>& overrides) {
  using nlohmann::json;
  json tree = cfgdetail::defaults_json();

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    json provided;
    try {
      provided = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file " + config_path + ": " + e.what());
    }
    cfgdetail::merge_checked(tree, provided, "");
  }
  for (const std::string& assignment : overrides) {
    auto [key, value] = parse_override(assignment);
    cfgdetail::apply_override(tree, key, value);
  }

  LoadedConfig out;
  out.effective = tree;
  AppConfig& c = out.config;

  const json& g = tree["generator"];
  c.generator.seed = cfgdetail::get_as<std::uint64_t>(g["seed"], "generator.seed");
  c.generator.num_requests =
      cfgdetail::get_as<std::uint64_t>(g["num_requests"], "generator.num_requests");
  c.generator.constraints.page_length =
      cfgdetail::get_as<int>(g["page_length"], "generator.page_length");
  c.generator.constraints.top_ad_slot =
      cfgdetail::get_as<int>(g["top_ad_slot"], "generator.top_ad_slot");
  c.generator.constraints.min_ad_gap =
      cfgdetail::get_as<int>(g["min_ad_gap"], "generator.min_ad_gap");
  c.generator.ads_min = cfgdetail::get_as<int>(g["ads_min"], "generator.ads_min");
  c.generator.ads_max = cfgdetail::get_as<int>(g["ads_max"], "generator.ads_max");
  c.generator.pctr_a = cfgdetail::get_as<double>(g["pctr_a"], "generator.pctr_a");
  c.generator.pctr_b = cfgdetail::get_as<double>(g["pctr_b"], "generator.pctr_b");
  c.generator.pctr_scale = cfgdetail::get_as<double>(g["pctr_scale"], "generator.pctr_scale");
  c.generator.pcvr_a = cfgdetail::get_as<double>(g["pcvr_a"], "generator.pcvr_a");
  c.generator.pcvr_b = cfgdetail::get_as<double>(g["pcvr_b"], "generator.pcvr_b");
  c.generator.pcvr_scale = cfgdetail::get_as<double>(g["pcvr_scale"], "generator.pcvr_scale");
  c.generator.price_mu = cfgdetail::get_as<double>(g["price_mu"], "generator.price_mu");
  c.generator.price_sigma =
      cfgdetail::get_as<double>(g["price_sigma"], "generator.price_sigma");
  c.generator.bid_mu = cfgdetail::get_as<double>(g["bid_mu"], "generator.bid_mu");
  c.generator.bid_sigma = cfgdetail::get_as<double>(g["bid_sigma"], "generator.bid_sigma");
  c.generator.ad_quality_sigma =
      cfgdetail::get_as<double>(g["ad_quality_sigma"], "generator.ad_quality_sigma");
  c.generator.reserve_price =
      cfgdetail::get_as<double>(g["reserve_price"], "generator.reserve_price");
  c.generator.ad_conv_lift =
      cfgdetail::get_as<double>(g["ad_conv_lift"], "generator.ad_conv_lift");

  const json& e = tree["exposure"];
  c.kappa = cfgdetail::get_as<double>(e["kappa"], "exposure.kappa");
  c.q_explicit = cfgdetail::get_as<std::vector<double>>(e["q"], "exposure.q");

  const json& r = tree["run"];
  c.strategy = cfgdetail::get_as<std::string>(r["strategy"], "run.strategy");
  c.alpha = cfgdetail::get_as<double>(r["alpha"], "run.alpha");
  c.beam = cfgdetail::get_as<int>(r["beam"], "run.beam");
  c.m_star = cfgdetail::get_as<double>(r["m_star"], "run.m_star");
  c.beta = cfgdetail::get_as<double>(r["beta"], "run.beta");
  c.gap_decay = cfgdetail::get_as<double>(r["gap_decay"], "run.gap_decay");
  c.fixed_positions =
      cfgdetail::get_as<std::vector<int>>(r["fixed_positions"], "run.fixed_positions");
  c.run_seed = cfgdetail::get_as<std::uint64_t>(r["seed"], "run.seed");
  c.jobs = cfgdetail::get_as<int>(r["jobs"], "run.jobs");
  c.calibration_requests =
      cfgdetail::get_as<int>(r["calibration_requests"], "run.calibration_requests");
  c.initial_rho = cfgdetail::get_as<double>(r["initial_rho"], "run.initial_rho");
  const json& ctl = r["controller"];
  c.controller_enabled = cfgdetail::get_as<bool>(ctl["enabled"], "run.controller.enabled");
  c.gamma = cfgdetail::get_as<double>(ctl["gamma"], "run.controller.gamma");
  c.window = cfgdetail::get_as<int>(ctl["window"], "run.controller.window");
  c.rho_min = cfgdetail::get_as<double>(ctl["rho_min"], "run.controller.rho_min");
  c.rho_max = cfgdetail::get_as<double>(ctl["rho_max"], "run.controller.rho_max");

  const json& s = tree["sweep"];
  c.alphas = cfgdetail::get_as<std::vector<double>>(s["alphas"], "sweep.alphas");
  c.sweep_strategies =
      cfgdetail::get_as<std::vector<std::string>>(s["strategies"], "sweep.strategies");
  c.beams = cfgdetail::get_as<std::vector<int>>(s["beams"], "sweep.beams");

  // Range checks that do not depend on how the config is used.
  if (c.generator.constraints.page_length < 1)
    throw ConfigError("generator.page_length must be >= 1");
  if (c.generator.constraints.top_ad_slot < 1)
    throw ConfigError("generator.top_ad_slot must be >= 1");
  if (c.generator.constraints.min_ad_gap < 0)
    throw ConfigError("generator.min_ad_gap must be >= 0");
  if (c.generator.ads_min < 0 || c.generator.ads_max < c.generator.ads_min)
    throw ConfigError("generator: need 0 <= ads_min <= ads_max");
  if (!(c.kappa > 0.0) || c.kappa > 1.0)
    throw ConfigError("exposure.kappa must be in (0, 1]");
  if (!(c.m_star > 0.0) || c.m_star >= 1.0)
    throw ConfigError("run.m_star must be in (0, 1)");
  if (c.alpha < 0.0) throw ConfigError("run.alpha must be >= 0");
  if (c.beam < 1) throw ConfigError("run.beam must be >= 1");
  if (c.window < 1) throw ConfigError("run.controller.window must be >= 1");
  if (c.gamma < 0.0) throw ConfigError("run.controller.gamma must be >= 0");
  if (c.jobs < 1) throw ConfigError("run.jobs must be >= 1");
  if (c.calibration_requests < 1)
    throw ConfigError("run.calibration_requests must be >= 1");
  if (!(c.gap_decay > 0.0) || c.gap_decay > 1.0)
    throw ConfigError("run.gap_decay must be in (0, 1]");
  if (c.alphas.empty()) throw ConfigError("sweep.alphas must be non-empty");
  for (double a : c.alphas)
    if (!(a > 0.0) || a > 1.0) throw ConfigError("sweep.alphas entries must lie in (0, 1]");
  if (c.beams.empty()) throw ConfigError("sweep.beams must be non-empty");
  for (int b : c.beams)
    if (b < 1) throw ConfigError("sweep.beams entries must be >= 1");
  if (c.sweep_strategies.empty()) throw ConfigError("sweep.strategies must be non-empty");
  for (const std::string& name : c.sweep_strategies) parse_strategy(name);
  parse_strategy_list(c.strategy);  // run.strategy may be a comma list

  return out;
}

// The exposure curve a config describes: explicit q wins over geometric decay.
inline SlotExposureModel exposure_model(const AppConfig& c) {
  if (!c.q_explicit.empty()) {
    if (static_cast<int>(c.q_explicit.size()) != c.generator.constraints.page_length)
      throw ConfigError("exposure.q length must equal generator.page_length");
    SlotExposureModel model(c.q_explicit);
    model.validate();
    return model;
  }
  return SlotExposureModel::geometric(c.generator.constraints.page_length, c.kappa);
}

}  // namespace adex
