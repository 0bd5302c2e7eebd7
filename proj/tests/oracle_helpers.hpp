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

// Independent reimplementations used as cross-check oracles in tests.  These
// deliberately avoid the library's evaluation code paths: merging, scoring,
// feasible-set construction, and knapsack optimization are rebuilt from the
// definitions so that agreement is meaningful.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "adex/core.hpp"
#include "adex/rng.hpp"

namespace oracle {

// Merge by walking the slots once, consuming each list in order.
inline std::vector<adex::Candidate> merge_items(const adex::Request& r,
                                                const std::vector<std::uint8_t>& slots) {
  std::vector<adex::Candidate> page;
  std::size_t next_rec = 0, next_ad = 0;
  for (std::uint8_t is_ad : slots)
    page.push_back(is_ad ? r.ad_list.at(next_ad++) : r.rec_list.at(next_rec++));
  return page;
}

inline double page_utility(const adex::Request& r, const std::vector<std::uint8_t>& slots,
                           const std::vector<double>& q, double alpha) {
  const std::vector<adex::Candidate> page = merge_items(r, slots);
  double u = 0.0;
  for (std::size_t l = 0; l < slots.size(); ++l)
    u += q.at(l) * (page[l].utility_ad + alpha * page[l].utility_rec);
  return u;
}

// Exact displacement accounting for the incremental value of a template:
// ads contribute their own discounted utility, kept organics gain or lose
// exposure as they shift to later slots, and the tail organics that fall off
// the page lose theirs entirely.
inline double displacement_value(const adex::Request& r,
                                 const std::vector<std::uint8_t>& slots,
                                 const std::vector<double>& q, double alpha) {
  const std::size_t length = slots.size();
  double v = 0.0;
  std::size_t ads = 0;
  std::vector<std::size_t> organic_slot;  // slot (0-based) of the i-th organic
  for (std::size_t l = 0; l < length; ++l) {
    if (slots[l]) {
      const adex::Candidate& ad = r.ad_list.at(ads++);
      v += q.at(l) * (ad.utility_ad + alpha * ad.utility_rec);
    } else {
      organic_slot.push_back(l);
    }
  }
  for (std::size_t i = 0; i < organic_slot.size(); ++i)
    v += alpha * r.rec_list.at(i).utility_rec * (q.at(organic_slot[i]) - q.at(i));
  for (std::size_t i = organic_slot.size(); i < length; ++i)
    v -= alpha * q.at(i) * r.rec_list.at(i).utility_rec;
  return v;
}

// Every feasible slot labeling, built constructively (first ad at or after
// top_ad_slot, successive ads at least min_ad_gap apart, at most max_ads ads)
// rather than by filtering — so it cannot share a bug with validate_template.
inline void enumerate_rec(int length, int min_ad_gap, int max_ads, int next_allowed,
                          std::vector<int>& chosen,
                          std::vector<std::vector<std::uint8_t>>& out) {
  std::vector<std::uint8_t> t(static_cast<std::size_t>(length), 0);
  for (int p : chosen) t[static_cast<std::size_t>(p - 1)] = 1;
  out.push_back(t);
  if (static_cast<int>(chosen.size()) == max_ads) return;
  for (int p = next_allowed; p <= length; ++p) {
    chosen.push_back(p);
    enumerate_rec(length, min_ad_gap, max_ads, p + min_ad_gap, chosen, out);
    chosen.pop_back();
  }
}

inline std::vector<std::vector<std::uint8_t>> enumerate_feasible(int length, int top_ad_slot,
                                                                 int min_ad_gap,
                                                                 int max_ads) {
  std::vector<std::vector<std::uint8_t>> out;
  std::vector<int> chosen;
  enumerate_rec(length, min_ad_gap, max_ads, top_ad_slot, chosen, out);
  return out;
}

// The same count through a bare recurrence, no templates built.
inline std::uint64_t count_feasible(int length, int top_ad_slot, int min_ad_gap,
                                    int max_ads, int next_allowed = -1) {
  if (next_allowed < 0) next_allowed = top_ad_slot;
  std::uint64_t n = 1;  // stop placing ads
  if (max_ads == 0) return n;
  for (int p = next_allowed; p <= length; ++p)
    n += count_feasible(length, top_ad_slot, min_ad_gap, max_ads - 1, p + min_ad_gap);
  return n;
}

// Plain 0-1 knapsack over integer weights; items may be skipped, so
// negative-value items never help.
inline double knapsack_dp(const std::vector<double>& values,
                          const std::vector<int>& weights, int capacity) {
  std::vector<double> best(static_cast<std::size_t>(capacity) + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (int w = capacity; w >= weights[i]; --w) {
      const double with = best[static_cast<std::size_t>(w - weights[i])] + values[i];
      if (with > best[static_cast<std::size_t>(w)]) best[static_cast<std::size_t>(w)] = with;
    }
  }
  return best[static_cast<std::size_t>(capacity)];
}

// ----------------------- synthetic request builders -----------------------

inline adex::Candidate make_organic(int rank, double utility_rec, double pctr = 0.1,
                                    double pcvr = 0.05, double price = 1.0) {
  adex::Candidate c;
  c.id = "o" + std::to_string(rank);
  c.kind = adex::ItemKind::kOrganic;
  c.upstream_rank = rank;
  c.utility_rec = utility_rec;
  c.pctr = pctr;
  c.pcvr = pcvr;
  c.item_price = price;
  return c;
}

inline adex::Candidate make_ad(int rank, double utility_ad, double utility_rec = 0.0,
                               double pctr = 0.1, double price_per_click = 1.0,
                               double pcvr = 0.05, double price = 1.0) {
  adex::Candidate c;
  c.id = "a" + std::to_string(rank);
  c.kind = adex::ItemKind::kAd;
  c.upstream_rank = rank;
  c.utility_rec = utility_rec;
  c.utility_ad = utility_ad;
  c.pctr = pctr;
  c.pcvr = pcvr;
  c.item_price = price;
  c.price_per_click = price_per_click;
  return c;
}

// Random request with positive utilities; rec_list is one item longer than
// the page so length mismatches surface immediately.
inline adex::Request random_request(adex::Rng& rng, int length, int num_ads,
                                    int top_ad_slot, int min_ad_gap) {
  adex::Request r;
  r.id = "t" + std::to_string(rng.bounded(1u << 30));
  r.constraints.page_length = length;
  r.constraints.top_ad_slot = top_ad_slot;
  r.constraints.min_ad_gap = min_ad_gap;
  for (int i = 1; i <= length + 1; ++i)
    r.rec_list.push_back(make_organic(i, rng.uniform(0.0, 2.0), rng.uniform(0.01, 0.5),
                                      rng.uniform(0.0, 0.3), rng.uniform(0.1, 10.0)));
  for (int i = 1; i <= num_ads; ++i)
    r.ad_list.push_back(make_ad(i, rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0),
                                rng.uniform(0.01, 0.5), rng.uniform(0.05, 5.0),
                                rng.uniform(0.0, 0.3), rng.uniform(0.1, 10.0)));
  return r;
}

inline std::vector<double> geometric_q(int length, double kappa) {
  std::vector<double> q(static_cast<std::size_t>(length));
  double cur = 1.0;
  for (int l = 0; l < length; ++l) {
    q[static_cast<std::size_t>(l)] = cur;
    cur *= kappa;
  }
  return q;
}

}  // namespace oracle
