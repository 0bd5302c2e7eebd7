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
#include <vector>

#include "adex/core.hpp"
#include "adex/rng.hpp"

namespace adex {

struct ClickEvent {
  int slot1 = 0;  // 1-based slot
  bool is_ad = false;
  double price_per_click = 0.0;
};

struct ConversionEvent {
  int slot1 = 0;
  double item_price = 0.0;
};

// Realized feedback of one page view.
struct UserEvent {
  int scroll_depth = 0;  // slots actually seen, in [0, L]
  int ad_exposures = 0;  // ad slots within the scrolled prefix
  std::vector<ClickEvent> clicks;
  std::vector<ConversionEvent> conversions;
  double revenue = 0.0;  // sum of clicked ad prices
  double gmv = 0.0;      // sum of converted item prices, organic and ad alike
};

// Sample one user session.  Scroll depth D satisfies P(D >= l) = q_l exactly
// (one uniform against the non-increasing exposure curve), so slot exposure
// is coupled: seeing slot l implies seeing every slot above it.  Each seen
// item clicks with pctr; a click converts with pcvr.  Clicked ads pay their
// auction price; conversions contribute the item price to order value.
inline UserEvent simulate_user(const MergedPage& page, const SlotExposureModel& q, Rng& rng) {
  const int length = page.length();
  if (q.length() != length) throw DataError("simulate_user: exposure model length mismatch");

  UserEvent ev;
  const double u = rng.uniform01();
  int depth = 0;
  while (depth < length && u < q.q[static_cast<std::size_t>(depth)]) ++depth;
  ev.scroll_depth = depth;

  for (int l = 0; l < depth; ++l) {
    const Candidate& item = *page.items[static_cast<std::size_t>(l)];
    const bool is_ad = page.tmpl.slots[static_cast<std::size_t>(l)] != 0;
    ev.ad_exposures += is_ad;
    if (!rng.bernoulli(item.pctr)) continue;
    ev.clicks.push_back(ClickEvent{l + 1, is_ad, item.price_per_click});
    if (is_ad) ev.revenue += item.price_per_click;
    if (rng.bernoulli(item.pcvr)) {
      ev.conversions.push_back(ConversionEvent{l + 1, item.item_price});
      ev.gmv += item.item_price;
    }
  }
  return ev;
}

}  // namespace adex
