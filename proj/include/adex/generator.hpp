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
#include <cstdint>
#include <string>
#include <vector>

#include "adex/core.hpp"
#include "adex/rng.hpp"

namespace adex {

// Synthetic stream shape.  Defaults give a desk-scale feed: 50-slot pages,
// ads allowed from slot 5 at gap 4, and heterogeneous per-request ad quality
// so adaptive strategies have something to adapt to.
struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::uint64_t num_requests = 100000;
  RequestConstraints constraints{50, 5, 4};
  int ads_min = 8;
  int ads_max = 16;

  // Organic engagement rates: scaled Kumaraswamy draws, bounded in [0, scale].
  double pctr_a = 2.0, pctr_b = 6.0, pctr_scale = 0.35;
  double pcvr_a = 2.0, pcvr_b = 10.0, pcvr_scale = 0.30;
  // Order value on conversion (log-normal).
  double price_mu = 1.1, price_sigma = 0.7;
  // Ad auction: value-based bidding.  Each advertiser bids a log-normal
  // multiple of its expected order value per click (pcvr * item_price), and a
  // per-request quality factor shifts whole auctions up or down so requests
  // differ in how ad-worthy they are.
  double bid_mu = 1.3, bid_sigma = 0.6;
  double ad_quality_sigma = 0.7;
  double reserve_price = 0.05;
  // Sponsored items convert better than a uniform catalog draw: advertisers
  // self-select commercially strong inventory.  Multiplies ad pcvr (capped
  // at 1).
  double ad_conv_lift = 2.0;
};

namespace detail {

// Snap to a 1e-9 decimal grid: keeps request logs short (shortest round-trip
// decimals) without meaningfully disturbing the distributions.
inline double quantize9(double x) { return std::round(x * 1e9) / 1e9; }

}  // namespace detail

// Second-price auction over the ad list, in place.  Ads are ranked by
// bid * pctr; ad k pays the smallest bid that would have kept its rank,
// floored at the reserve and capped at its own bid.  Bids must come in
// at or above the reserve.
inline void run_auction(std::vector<Candidate>& ads, const std::vector<double>& bids,
                        double reserve_price) {
  if (ads.size() != bids.size()) throw DataError("auction: bid/ad count mismatch");
  std::vector<std::size_t> order(ads.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ea = bids[a] * ads[a].pctr, eb = bids[b] * ads[b].pctr;
    if (ea != eb) return ea > eb;
    if (bids[a] != bids[b]) return bids[a] > bids[b];
    return a < b;
  });
  std::vector<Candidate> ranked;
  ranked.reserve(ads.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    Candidate ad = ads[order[k]];
    double price = reserve_price;
    if (k + 1 < order.size()) {
      const std::size_t nxt = order[k + 1];
      price = std::max(reserve_price, bids[nxt] * ads[nxt].pctr / ad.pctr);
    }
    price = std::min(price, bids[order[k]]);  // individual rationality
    ad.price_per_click = detail::quantize9(price);
    ad.utility_ad = detail::quantize9(ad.pctr * ad.price_per_click);
    ad.upstream_rank = static_cast<int>(k) + 1;
    ranked.push_back(std::move(ad));
  }
  ads = std::move(ranked);
}

// One synthetic request.  Organics are ranked by recommendation utility, ads
// by the auction; both lists carry contiguous 1-based ranks.
inline Request generate_request(const GeneratorConfig& cfg, std::uint64_t index) {
  Rng rng(derive_seed(cfg.seed, index));
  const RequestConstraints& c = cfg.constraints;

  Request r;
  r.id = "r" + std::to_string(index);
  r.constraints = c;

  r.rec_list.reserve(static_cast<std::size_t>(c.page_length));
  for (int i = 0; i < c.page_length; ++i) {
    Candidate item;
    item.kind = ItemKind::kOrganic;
    item.pctr = detail::quantize9(cfg.pctr_scale * rng.kumaraswamy(cfg.pctr_a, cfg.pctr_b));
    item.pcvr = detail::quantize9(cfg.pcvr_scale * rng.kumaraswamy(cfg.pcvr_a, cfg.pcvr_b));
    item.item_price = detail::quantize9(rng.lognormal(cfg.price_mu, cfg.price_sigma));
    item.utility_rec = detail::quantize9(item.pctr * item.pcvr * item.item_price);
    r.rec_list.push_back(std::move(item));
  }
  std::sort(r.rec_list.begin(), r.rec_list.end(), [](const Candidate& a, const Candidate& b) {
    if (a.utility_rec != b.utility_rec) return a.utility_rec > b.utility_rec;
    return a.pctr > b.pctr;
  });
  for (std::size_t i = 0; i < r.rec_list.size(); ++i) {
    r.rec_list[i].upstream_rank = static_cast<int>(i) + 1;
    r.rec_list[i].id = "o" + std::to_string(i + 1);
  }

  // Per-request ad quality multiplier: some requests attract hot auctions.
  const double quality = std::exp(rng.normal(0.0, cfg.ad_quality_sigma));
  const int num_ads = rng.uniform_int(cfg.ads_min, cfg.ads_max);
  std::vector<Candidate> ads;
  std::vector<double> bids;
  ads.reserve(static_cast<std::size_t>(num_ads));
  bids.reserve(static_cast<std::size_t>(num_ads));
  for (int i = 0; i < num_ads; ++i) {
    Candidate ad;
    ad.kind = ItemKind::kAd;
    ad.pctr = detail::quantize9(cfg.pctr_scale * rng.kumaraswamy(cfg.pctr_a, cfg.pctr_b));
    ad.pcvr = detail::quantize9(std::min(
        1.0, cfg.ad_conv_lift * cfg.pcvr_scale * rng.kumaraswamy(cfg.pcvr_a, cfg.pcvr_b)));
    ad.item_price = detail::quantize9(rng.lognormal(cfg.price_mu, cfg.price_sigma));
    ad.utility_rec = detail::quantize9(ad.pctr * ad.pcvr * ad.item_price);
    // Bid = margin share of expected order value per click, so strong
    // commercial items bid (and rank) higher.
    const double value_per_click = ad.pcvr * ad.item_price;
    ads.push_back(std::move(ad));
    bids.push_back(detail::quantize9(
        cfg.reserve_price + quality * value_per_click * rng.lognormal(cfg.bid_mu, cfg.bid_sigma)));
  }
  run_auction(ads, bids, cfg.reserve_price);
  for (std::size_t i = 0; i < ads.size(); ++i) ads[i].id = "a" + std::to_string(i + 1);
  r.ad_list = std::move(ads);
  return r;
}

inline std::vector<Request> generate_stream(const GeneratorConfig& cfg) {
  if (cfg.constraints.page_length < 1) throw ConfigError("generator: page_length must be >= 1");
  if (cfg.constraints.top_ad_slot < 1) throw ConfigError("generator: top_ad_slot must be >= 1");
  if (cfg.constraints.min_ad_gap < 1) throw ConfigError("generator: min_ad_gap must be >= 1");
  if (cfg.ads_min < 0 || cfg.ads_max < cfg.ads_min)
    throw ConfigError("generator: need 0 <= ads_min <= ads_max");
  if (!(cfg.reserve_price >= 0.0)) throw ConfigError("generator: reserve_price must be >= 0");
  if (!(cfg.ad_conv_lift > 0.0)) throw ConfigError("generator: ad_conv_lift must be > 0");
  std::vector<Request> stream;
  stream.reserve(cfg.num_requests);
  for (std::uint64_t i = 0; i < cfg.num_requests; ++i)
    stream.push_back(generate_request(cfg, i));
  return stream;
}

}  // namespace adex
