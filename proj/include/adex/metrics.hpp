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
#include "adex/evaluator.hpp"
#include "adex/user_model.hpp"

namespace adex {

// Stream-level accumulators.  Expected quantities are position-weighted
// (q mass); realized quantities count what sampled users actually saw.
struct RunMetrics {
  std::uint64_t requests = 0;
  double revenue = 0.0;
  double gmv = 0.0;
  std::uint64_t clicks = 0;
  std::uint64_t conversions = 0;
  double expected_ad_exposures = 0.0;
  double expected_total_exposures = 0.0;
  std::uint64_t realized_ad_exposures = 0;
  std::uint64_t realized_total_exposures = 0;
  std::uint64_t ad_position_sum = 0;                 // over realized ad exposures
  std::vector<std::uint64_t> ad_position_counts;    // realized, per 1-based slot

  void add(const MergedPage& page, const UserEvent& ev, const SlotExposureModel& q) {
    if (ad_position_counts.empty())
      ad_position_counts.assign(static_cast<std::size_t>(page.length()), 0);
    ++requests;
    revenue += ev.revenue;
    gmv += ev.gmv;
    clicks += ev.clicks.size();
    conversions += ev.conversions.size();
    expected_ad_exposures += request_weight(page.tmpl, q);
    expected_total_exposures += q.total();
    realized_ad_exposures += static_cast<std::uint64_t>(ev.ad_exposures);
    realized_total_exposures += static_cast<std::uint64_t>(ev.scroll_depth);
    for (int l = 1; l <= ev.scroll_depth; ++l) {
      if (page.tmpl.is_ad(l)) {
        ++ad_position_counts[static_cast<std::size_t>(l - 1)];
        ad_position_sum += static_cast<std::uint64_t>(l);
      }
    }
  }

  // Fold another accumulator in (chunked runs fold in request order, so
  // results are independent of how work was split).
  void merge(const RunMetrics& other) {
    if (ad_position_counts.empty())
      ad_position_counts.assign(other.ad_position_counts.size(), 0);
    requests += other.requests;
    revenue += other.revenue;
    gmv += other.gmv;
    clicks += other.clicks;
    conversions += other.conversions;
    expected_ad_exposures += other.expected_ad_exposures;
    expected_total_exposures += other.expected_total_exposures;
    realized_ad_exposures += other.realized_ad_exposures;
    realized_total_exposures += other.realized_total_exposures;
    ad_position_sum += other.ad_position_sum;
    for (std::size_t i = 0; i < other.ad_position_counts.size() && i < ad_position_counts.size(); ++i)
      ad_position_counts[i] += other.ad_position_counts[i];
  }

  double ctr() const {
    return realized_total_exposures == 0
               ? 0.0
               : static_cast<double>(clicks) / static_cast<double>(realized_total_exposures);
  }
  double expected_m() const {
    return expected_total_exposures == 0.0 ? 0.0
                                           : expected_ad_exposures / expected_total_exposures;
  }
  double realized_m() const {
    return realized_total_exposures == 0
               ? 0.0
               : static_cast<double>(realized_ad_exposures) /
                     static_cast<double>(realized_total_exposures);
  }
  // Average 1-based slot of an exposed ad (0 when no ad was ever exposed).
  double avg_ad_position() const {
    return realized_ad_exposures == 0
               ? 0.0
               : static_cast<double>(ad_position_sum) /
                     static_cast<double>(realized_ad_exposures);
  }
};

// Relative advantage in percent over a baseline value.
inline double advantage(double metric, double baseline) {
  if (!(baseline > 0.0)) throw DataError("advantage: baseline metric must be positive");
  return (metric - baseline) / baseline * 100.0;
}

struct HistogramBucket {
  int start_slot = 0;  // 1-based, inclusive
  int end_slot = 0;    // inclusive
  std::uint64_t count = 0;
  double share = 0.0;  // of all realized ad exposures
};

// Where ads actually got seen: realized ad exposures bucketed by slot bands
// of width min_ad_gap starting at the first allowed slot.
inline std::vector<HistogramBucket> ad_position_report(const RunMetrics& metrics,
                                                       const RequestConstraints& c) {
  std::vector<HistogramBucket> buckets;
  const int width = std::max(c.min_ad_gap, 1);
  std::uint64_t total = 0;
  for (auto v : metrics.ad_position_counts) total += v;
  for (int start = c.top_ad_slot; start <= c.page_length; start += width) {
    HistogramBucket b;
    b.start_slot = start;
    b.end_slot = std::min(start + width - 1, c.page_length);
    for (int l = start; l <= b.end_slot; ++l) {
      const std::size_t i = static_cast<std::size_t>(l - 1);
      if (i < metrics.ad_position_counts.size()) b.count += metrics.ad_position_counts[i];
    }
    b.share = total == 0 ? 0.0 : static_cast<double>(b.count) / static_cast<double>(total);
    buckets.push_back(b);
  }
  return buckets;
}

}  // namespace adex
