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

#include <string>

#include "adex/core.hpp"

namespace adex {

// Blending trade-off knobs: alpha weighs recommendation utility against ad
// utility inside the page objective; rho_thres is the value-per-weight bar a
// template must clear before the page may carry ads.
struct TradeoffParams {
  double alpha = 0.5;
  double rho_thres = 0.0;
};

// Score of one template on one request.
//   value  - discounted utility gained over the all-organic page
//   weight - expected ad exposures the template spends
//   vpw    - value per unit of weight (0 when weight is 0)
//   kvi    - value - rho_thres * weight, the selection margin
struct TemplateScore {
  double value = 0.0;
  double weight = 0.0;
  double vpw = 0.0;
  double kvi = 0.0;
};

// Expected discounted page utility under the rank-preserving item assignment:
// sum over slots of q_l * (utility_ad + alpha * utility_rec) of the item the
// template places there.  Consumes both lists in order without materializing
// the page.  Accumulation runs in slot order; other scoring paths reproduce
// this exact arithmetic so scores compare bit-identically.
inline double page_utility(const Request& r, const ExposureTemplate& t,
                           const SlotExposureModel& q, double alpha) {
  const int length = r.constraints.page_length;
  if (t.length() != length || q.length() != length)
    throw DataError("page_utility: template/exposure length mismatch on request " + r.id);
  if (!validate_template(t, r.constraints, static_cast<int>(r.ad_list.size())))
    throw DataError("page_utility: infeasible template " + to_string(t) +
                    " for request " + r.id);
  const int organic_slots = length - t.ad_count();
  if (organic_slots > static_cast<int>(r.rec_list.size()))
    throw DataError("page_utility: too few organics on request " + r.id);

  double utility = 0.0;
  std::size_t next_rec = 0, next_ad = 0;
  for (int l = 0; l < length; ++l) {
    const Candidate& item = t.slots[static_cast<std::size_t>(l)]
                                ? r.ad_list[next_ad++]
                                : r.rec_list[next_rec++];
    utility += q.q[static_cast<std::size_t>(l)] *
               (item.utility_ad + alpha * item.utility_rec);
  }
  return utility;
}

// Value of a template: utility gained over the all-organic reference page.
inline double request_value(const Request& r, const ExposureTemplate& t,
                            const SlotExposureModel& q, double alpha) {
  const ExposureTemplate baseline = ExposureTemplate::all_organic(r.constraints.page_length);
  return page_utility(r, t, q, alpha) - page_utility(r, baseline, q, alpha);
}

// Weight of a template: expected ad exposures, i.e. the q mass on ad slots.
inline double request_weight(const ExposureTemplate& t, const SlotExposureModel& q) {
  if (t.length() != q.length())
    throw DataError("request_weight: template/exposure length mismatch");
  double w = 0.0;
  for (int l = 0; l < t.length(); ++l)
    if (t.slots[static_cast<std::size_t>(l)]) w += q.q[static_cast<std::size_t>(l)];
  return w;
}

// Value per unit weight.  A weightless template (no exposed ad mass) is
// defined to have vpw 0, which makes the all-organic page the neutral point.
// Weight is an exposure mass, so it can never legitimately be negative.
inline double vpw(double value, double weight) {
  if (weight < 0.0) throw DataError("vpw: negative weight");
  return weight == 0.0 ? 0.0 : value / weight;
}

// Selection margin at threshold rho_thres.  Positive kvi means the template
// buys utility cheaper than the current price of ad exposure.
inline double kvi(double value, double weight, double rho_thres) {
  return value - rho_thres * weight;
}

inline TemplateScore score_template(const Request& r, const ExposureTemplate& t,
                                    const SlotExposureModel& q, const TradeoffParams& p) {
  TemplateScore s;
  s.value = request_value(r, t, q, p.alpha);
  s.weight = request_weight(t, q);
  s.vpw = vpw(s.value, s.weight);
  s.kvi = kvi(s.value, s.weight, p.rho_thres);
  return s;
}

// Shared preference order for templates: higher kvi, then fewer ad slots,
// then lexicographically smaller slot sequence (organic before ad).  This is
// a total order on distinct templates, so every argmax in the code base is
// unique and independent of enumeration order.
inline bool score_preferred(const TemplateScore& sa, const ExposureTemplate& ta,
                            const TemplateScore& sb, const ExposureTemplate& tb) {
  if (sa.kvi != sb.kvi) return sa.kvi > sb.kvi;
  const int ca = ta.ad_count(), cb = tb.ad_count();
  if (ca != cb) return ca < cb;
  return lex_less(ta, tb);
}

}  // namespace adex
