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

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "adex/core.hpp"
#include "adex/ets.hpp"
#include "adex/evaluator.hpp"

namespace adex {

// Exposure budget for a horizon: the ad exposure mass a stream may spend
// while keeping its monetization rate at m_star.
inline double capacity(double total_expected_exposures, double m_star) {
  return m_star * total_expected_exposures;
}

struct ControllerConfig {
  double m_star = 0.10;   // target monetization rate, in (0, 1)
  double gamma = 0.1;     // proportional feedback gain
  int window_size = 2000; // requests per threshold update
  double rho_min = 0.0;
  double rho_max = -1.0;  // < 0: auto, 1e6 x max(initial threshold, 1)
};

// One controller window: the threshold move and the monetization rate that
// produced it.  Exactly the fields the window report file carries.
struct WindowReport {
  std::uint64_t window_index = 0;  // 1-based
  double realized_m = 0.0;         // window ad exposures / window exposures
  double rho_before = 0.0;
  double rho_after = 0.0;
};

// Feedback controller for the exposure threshold.  The application-level
// budget is enforced by pricing, not by hard per-window cutoffs: every
// window_size requests the threshold moves proportionally to the window's
// relative monetization error, rho <- rho * (1 + gamma * (m / m_star - 1)).
// This is the only stateful component in the library.
class ThresholdController {
 public:
  ThresholdController(double initial_rho, const ControllerConfig& cfg) : cfg_(cfg) {
    if (!(cfg.m_star > 0.0) || cfg.m_star >= 1.0)
      throw ConfigError("controller: m_star must be in (0, 1)");
    if (cfg.window_size < 1) throw ConfigError("controller: window_size must be >= 1");
    if (cfg.gamma < 0.0) throw ConfigError("controller: gamma must be >= 0");
    if (initial_rho < 0.0) throw ConfigError("controller: initial threshold must be >= 0");
    rho_max_ = cfg.rho_max < 0.0 ? 1e6 * std::max(initial_rho, 1.0) : cfg.rho_max;
    rho_ = std::clamp(initial_rho, cfg.rho_min, rho_max_);
  }

  double rho_thres() const { return rho_; }

  // Account one served page at its expected (position-weighted) exposures.
  void observe(const MergedPage& page, const SlotExposureModel& q) {
    observe_exposures(request_weight(page.tmpl, q), q.total());
  }

  // Raw-count variant for callers that track realized exposures instead.
  void observe_exposures(double ad_exposures, double total_exposures) {
    window_ad_ += ad_exposures;
    window_total_ += total_exposures;
    ++window_requests_;
  }

  // Close the window once enough requests accrued.  An empty window (zero
  // exposure mass) emits its report but leaves the threshold untouched.
  std::optional<WindowReport> maybe_update() {
    if (window_requests_ < cfg_.window_size) return std::nullopt;
    WindowReport report;
    report.window_index = ++windows_emitted_;
    report.realized_m = window_total_ > 0.0 ? window_ad_ / window_total_ : 0.0;
    report.rho_before = rho_;
    if (window_total_ > 0.0) {
      rho_ *= 1.0 + cfg_.gamma * (report.realized_m / cfg_.m_star - 1.0);
      rho_ = std::clamp(rho_, cfg_.rho_min, rho_max_);
    }
    report.rho_after = rho_;
    window_ad_ = 0.0;
    window_total_ = 0.0;
    window_requests_ = 0;
    return report;
  }

  std::uint64_t windows_emitted() const { return windows_emitted_; }
  int window_requests() const { return window_requests_; }

 private:
  ControllerConfig cfg_;
  double rho_ = 0.0;
  double rho_max_ = 0.0;
  double window_ad_ = 0.0;
  double window_total_ = 0.0;
  int window_requests_ = 0;
  std::uint64_t windows_emitted_ = 0;
};

struct RhoCalibration {
  double rho = 0.0;
  double achieved_m = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Offline threshold initialization: bisection on the expected monetization
// rate of the full search+finalize pipeline over a stream slice.  m(rho) is
// non-increasing, so plain bisection applies; if even rho = 0 undershoots the
// target the floor is returned with converged = false.
inline RhoCalibration calibrate_rho(const std::vector<Request>& slice,
                                    const SlotExposureModel& q, double alpha,
                                    const SearchConfig& search, double m_star,
                                    double tol_rel = 1e-4, int max_iters = 60) {
  if (slice.empty()) throw DataError("calibrate_rho: empty calibration slice");
  const double total = q.total() * static_cast<double>(slice.size());
  if (!(total > 0.0)) throw DataError("calibrate_rho: exposure model has zero mass");

  auto m_of = [&](double rho) {
    TradeoffParams p{alpha, rho};
    double ad_mass = 0.0;
    for (const Request& r : slice) {
      SearchResult res = ets_search(r, q, p, search);
      ExposureTemplate final_t = finalize_template(res, rho);
      ad_mass += request_weight(final_t, q);
    }
    return ad_mass / total;
  };

  RhoCalibration out;
  double m_floor = m_of(0.0);
  ++out.iterations;
  if (m_floor <= m_star) {
    // Even maximal exposure cannot reach the target; serve at the floor.
    out.rho = 0.0;
    out.achieved_m = m_floor;
    out.converged = std::abs(m_floor - m_star) <= tol_rel * m_star;
    return out;
  }

  double lo = 0.0, hi = 1.0;
  double m_hi = m_of(hi);
  ++out.iterations;
  while (m_hi > m_star && hi < 1e18 && out.iterations < max_iters) {
    lo = hi;
    hi *= 4.0;
    m_hi = m_of(hi);
    ++out.iterations;
  }

  double mid = hi, m_mid = m_hi;
  while (out.iterations < max_iters) {
    mid = 0.5 * (lo + hi);
    m_mid = m_of(mid);
    ++out.iterations;
    if (std::abs(m_mid - m_star) <= tol_rel * m_star) {
      out.converged = true;
      break;
    }
    if (m_mid > m_star)
      lo = mid;
    else
      hi = mid;
  }
  out.rho = mid;
  out.achieved_m = m_mid;
  return out;
}

// Batch selection in the spirit of the horizon-level knapsack: serve requests
// in value-per-weight order until the budget is spent.  The straddling
// request is admitted, so the budget is never exceeded by more than one
// request's weight; non-positive-vpw requests are never selected.
inline std::vector<std::size_t> batch_greedy_select(const std::vector<TemplateScore>& scores,
                                                    double capacity_w) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
    if (scores[a].vpw != scores[b].vpw) return scores[a].vpw > scores[b].vpw;
    return a < b;
  });
  std::vector<std::size_t> selected;
  double spent = 0.0;
  for (std::size_t i : order) {
    if (scores[i].vpw <= 0.0) break;
    if (spent >= capacity_w) break;
    selected.push_back(i);
    spent += scores[i].weight;
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

}  // namespace adex
