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
#include <cmath>
#include <string>
#include <vector>

#include "adex/core.hpp"
#include "adex/evaluator.hpp"

namespace adex {

enum class StrategyKind { kFixed, kWpo, kGea, kHca2e };

inline std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kFixed: return "fixed";
    case StrategyKind::kWpo: return "wpo";
    case StrategyKind::kGea: return "gea";
    case StrategyKind::kHca2e: return "hca2e";
  }
  return "?";
}

inline StrategyKind parse_strategy(const std::string& name) {
  if (name == "fixed") return StrategyKind::kFixed;
  if (name == "wpo") return StrategyKind::kWpo;
  if (name == "gea") return StrategyKind::kGea;
  if (name == "hca2e") return StrategyKind::kHca2e;
  throw ConfigError("unknown strategy '" + name + "' (expected fixed|wpo|gea|hca2e)");
}

// Parses a comma-separated strategy list ("hca2e,wpo"), de-duplicating while
// preserving first-occurrence order.
inline std::vector<StrategyKind> parse_strategy_list(const std::string& csv) {
  std::vector<StrategyKind> kinds;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = csv.find(',', pos);
    const std::string token =
        csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (token.empty()) throw ConfigError("strategy list has an empty entry: '" + csv + "'");
    const StrategyKind kind = parse_strategy(token);
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) kinds.push_back(kind);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (kinds.empty()) throw ConfigError("strategy list must name at least one strategy");
  return kinds;
}

// Static baseline: the same 1-based ad positions on every page.  The position
// set itself must satisfy the placement rules.
inline ExposureTemplate fixed_template(const RequestConstraints& c,
                                       const std::vector<int>& positions) {
  ExposureTemplate t = ExposureTemplate::all_organic(c.page_length);
  for (int p : positions) {
    if (p < 1 || p > c.page_length)
      throw ConfigError("fixed positions: slot " + std::to_string(p) + " outside 1.." +
                        std::to_string(c.page_length));
    t.slots[static_cast<std::size_t>(p - 1)] = 1;
  }
  if (!validate_template(t, c, t.ad_count()))
    throw ConfigError("fixed positions violate top-slot/gap rules");
  return t;
}

// Drop trailing ad slots a request cannot fill.  Removing ads never tightens
// a gap, so the clipped template stays feasible.
inline ExposureTemplate clip_to_availability(const ExposureTemplate& t, int ads_available) {
  ExposureTemplate out = t;
  int ads = 0;
  for (std::size_t i = 0; i < out.slots.size(); ++i) {
    if (!out.slots[i]) continue;
    if (++ads > ads_available) out.slots[i] = 0;
  }
  return out;
}

// Pick a static position set whose expected ad exposure share lands near
// m_star: greedily add the feasible slot that most reduces the error until no
// addition improves it.  Deterministic for a fixed exposure model.
inline std::vector<int> calibrate_fixed_positions(const RequestConstraints& c,
                                                  const SlotExposureModel& q, double m_star) {
  if (q.length() != c.page_length)
    throw ConfigError("calibrate_fixed_positions: exposure model length mismatch");
  const double total = q.total();
  if (!(total > 0.0)) throw ConfigError("calibrate_fixed_positions: zero exposure mass");

  std::vector<int> chosen;
  double mass = 0.0;
  while (true) {
    double best_err = std::abs(mass / total - m_star);
    int best_p = 0;
    for (int p = c.top_ad_slot; p <= c.page_length; ++p) {
      bool feasible = true;
      for (int cpos : chosen)
        if (std::abs(p - cpos) < c.min_ad_gap || p == cpos) {
          feasible = false;
          break;
        }
      if (!feasible) continue;
      const double err =
          std::abs((mass + q.q[static_cast<std::size_t>(p - 1)]) / total - m_star);
      if (err < best_err) {
        best_err = err;
        best_p = p;
      }
    }
    if (best_p == 0) break;
    chosen.push_back(best_p);
    mass += q.q[static_cast<std::size_t>(best_p - 1)];
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace detail {

// Rank-preserving head-to-head blend shared by the score-mixing baselines.
// At each slot the best-scored head of the two queues competes; an ad can win
// only where placement rules allow one, and ties go to the organic side.
// Consuming both lists strictly in order preserves within-type upstream order
// no matter how the scores run.
template <typename AdScoreFn>
ExposureTemplate blend_by_score(const Request& r, double alpha, AdScoreFn ad_score) {
  const RequestConstraints& c = r.constraints;
  ExposureTemplate t = ExposureTemplate::all_organic(c.page_length);
  std::size_t next_rec = 0, next_ad = 0;
  int last_ad = 0;
  for (int slot1 = 1; slot1 <= c.page_length; ++slot1) {
    const bool ad_ok = next_ad < r.ad_list.size() && slot1 >= c.top_ad_slot &&
                       (last_ad == 0 || slot1 - last_ad >= c.min_ad_gap);
    if (ad_ok) {
      const double sa = ad_score(r.ad_list[next_ad], slot1, last_ad);
      const double so = next_rec < r.rec_list.size()
                            ? alpha * r.rec_list[next_rec].utility_rec
                            : -1.0;
      if (sa > so) {
        t.slots[static_cast<std::size_t>(slot1 - 1)] = 1;
        ++next_ad;
        last_ad = slot1;
        continue;
      }
    }
    ++next_rec;
  }
  return t;
}

}  // namespace detail

// Whole-page optimization baseline: organics score alpha * utility_rec, ads
// score beta * (utility_ad + alpha * utility_rec), and slots are filled by
// score with ads deferred past infeasible slots.
inline ExposureTemplate wpo_blend(const Request& r, double beta, double alpha) {
  return detail::blend_by_score(r, alpha, [beta, alpha](const Candidate& ad, int, int) {
    return beta * (ad.utility_ad + alpha * ad.utility_rec);
  });
}

// Gap-effect-aware variant: an ad placed close behind the previous one decays
// by gap_decay^(2 * min_ad_gap - distance), so crowding costs score.
inline ExposureTemplate gea_blend(const Request& r, double beta, double alpha,
                                  double gap_decay) {
  if (!(gap_decay > 0.0) || gap_decay > 1.0)
    throw ConfigError("gea: gap_decay must be in (0, 1]");
  const int min_gap = r.constraints.min_ad_gap;
  return detail::blend_by_score(
      r, alpha, [beta, alpha, gap_decay, min_gap](const Candidate& ad, int slot1, int last_ad) {
        double s = beta * (ad.utility_ad + alpha * ad.utility_rec);
        if (last_ad != 0) {
          const int crowding = 2 * min_gap - (slot1 - last_ad);
          if (crowding > 0) s *= std::pow(gap_decay, static_cast<double>(crowding));
        }
        return s;
      });
}

struct BetaCalibration {
  double beta = 0.0;
  double achieved_m = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Raised when a target monetization rate is unreachable for a strategy; the
// densest pattern the strategy can produce is reported back.
struct CalibrationError : Error {
  CalibrationError(const std::string& what, double max_m)
      : Error(what), max_achievable_m(max_m) {}
  double max_achievable_m;
};

// Fit the score knob so the blend's expected monetization rate over a stream
// slice lands on m_star.  Expected ad exposure share is monotone
// non-decreasing in beta, so bisection converges; an unreachable target
// raises CalibrationError carrying the best achievable rate.
inline BetaCalibration calibrate_beta(StrategyKind kind, const std::vector<Request>& slice,
                                      const SlotExposureModel& q, double alpha,
                                      double m_star, double gap_decay = 0.8,
                                      double tol_abs = 1e-3, int max_iters = 40) {
  if (kind != StrategyKind::kWpo && kind != StrategyKind::kGea)
    throw ConfigError("calibrate_beta: strategy has no beta knob");
  if (slice.empty()) throw DataError("calibrate_beta: empty calibration slice");
  const double total = q.total() * static_cast<double>(slice.size());
  if (!(total > 0.0)) throw DataError("calibrate_beta: exposure model has zero mass");

  auto m_of = [&](double beta) {
    double ad_mass = 0.0;
    for (const Request& r : slice) {
      ExposureTemplate t = kind == StrategyKind::kWpo
                               ? wpo_blend(r, beta, alpha)
                               : gea_blend(r, beta, alpha, gap_decay);
      ad_mass += request_weight(t, q);
    }
    return ad_mass / total;
  };

  BetaCalibration out;
  if (m_star <= 0.0) {
    out.achieved_m = m_of(0.0);
    out.iterations = 1;
    out.converged = true;
    return out;
  }

  double lo = 0.0, hi = 1.0;
  double m_hi = m_of(hi);
  ++out.iterations;
  while (m_hi < m_star && hi < 1e15) {
    lo = hi;
    hi *= 8.0;
    m_hi = m_of(hi);
    ++out.iterations;
  }
  if (m_hi < m_star)
    throw CalibrationError("calibrate_beta: target m_star unreachable (max achievable m = " +
                               std::to_string(m_hi) + ")",
                           m_hi);

  double mid = hi, m_mid = m_hi;
  while (out.iterations < max_iters) {
    mid = 0.5 * (lo + hi);
    m_mid = m_of(mid);
    ++out.iterations;
    if (std::abs(m_mid - m_star) <= tol_abs) {
      out.converged = true;
      break;
    }
    if (m_mid < m_star)
      lo = mid;
    else
      hi = mid;
  }
  out.beta = mid;
  out.achieved_m = m_mid;
  return out;
}

}  // namespace adex
