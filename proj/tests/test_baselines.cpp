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

// Baseline page builders (static positions, score blending with and without
// crowding decay) and their score-knob calibration.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "adex/baselines.hpp"
#include "adex/core.hpp"
#include "adex/generator.hpp"
#include "adex/rng.hpp"
#include "oracle_helpers.hpp"

using namespace adex;

namespace {

std::vector<int> ad_slots(const ExposureTemplate& t) {
  std::vector<int> out;
  for (int l = 0; l < t.length(); ++l)
    if (t.slots[static_cast<std::size_t>(l)]) out.push_back(l + 1);
  return out;
}

}  // namespace

TEST_CASE("strategy names round-trip", "[baselines]") {
  for (StrategyKind k :
       {StrategyKind::kFixed, StrategyKind::kWpo, StrategyKind::kGea, StrategyKind::kHca2e})
    CHECK(parse_strategy(to_string(k)) == k);
  CHECK_THROWS_AS(parse_strategy("bogus"), ConfigError);
}

TEST_CASE("fixed_template validates the static position set", "[baselines]") {
  RequestConstraints c{50, 5, 4};

  SECTION("an evenly spread set is accepted") {
    ExposureTemplate t = fixed_template(c, {5, 15, 25, 35, 45});
    CHECK(ad_slots(t) == std::vector<int>{5, 15, 25, 35, 45});
    CHECK(validate_template(t, c, 5));
  }
  SECTION("a slot above the top ad slot is rejected") {
    CHECK_THROWS_AS(fixed_template(c, {3, 15, 25}), ConfigError);
  }
  SECTION("slots closer than the minimum gap are rejected") {
    CHECK_THROWS_AS(fixed_template(c, {5, 7}), ConfigError);
  }
  SECTION("out-of-page slots are rejected") {
    CHECK_THROWS_AS(fixed_template(c, {0}), ConfigError);
    CHECK_THROWS_AS(fixed_template(c, {51}), ConfigError);
  }
  SECTION("an empty set gives the all-organic page") {
    CHECK(fixed_template(c, {}).ad_count() == 0);
  }
}

TEST_CASE("clip_to_availability drops trailing ad slots only", "[baselines]") {
  RequestConstraints c{10, 2, 2};
  ExposureTemplate t = fixed_template(c, {2, 4, 6, 8});

  CHECK(ad_slots(clip_to_availability(t, 4)) == std::vector<int>{2, 4, 6, 8});
  CHECK(ad_slots(clip_to_availability(t, 2)) == std::vector<int>{2, 4});
  CHECK(clip_to_availability(t, 0).ad_count() == 0);
  // Clipping never invalidates: gaps only widen.
  CHECK(validate_template(clip_to_availability(t, 3), c, 3));
}

TEST_CASE("calibrate_fixed_positions lands near the target share", "[baselines]") {
  RequestConstraints c{50, 5, 4};
  SlotExposureModel q = SlotExposureModel::geometric(50, 0.95);

  std::vector<int> positions = calibrate_fixed_positions(c, q, 0.10);
  REQUIRE_FALSE(positions.empty());
  // The set must be feasible by construction.
  ExposureTemplate t = fixed_template(c, positions);
  const double share = request_weight(t, q) / q.total();
  // Greedy error is bounded by the largest single legal slot mass.
  CHECK(std::abs(share - 0.10) <= q.q[static_cast<std::size_t>(c.top_ad_slot - 1)]);

  SECTION("a zero target selects nothing") {
    CHECK(calibrate_fixed_positions(c, q, 0.0).empty());
  }
  SECTION("mismatched exposure model is rejected") {
    SlotExposureModel wrong = SlotExposureModel::geometric(10, 0.9);
    CHECK_THROWS_AS(calibrate_fixed_positions(c, wrong, 0.1), ConfigError);
  }
}

TEST_CASE("wpo blend spans no-ads to densest-legal as beta grows", "[baselines]") {
  Rng rng(211);
  Request r = oracle::random_request(rng, 12, 5, 3, 3);

  SECTION("beta zero serves the organic page") {
    // Ties go to the organic side, so zero ad score never wins even against
    // zero organic utility.
    CHECK(wpo_blend(r, 0.0, 0.5).ad_count() == 0);
  }
  SECTION("huge beta packs ads as densely as the rules allow") {
    ExposureTemplate t = wpo_blend(r, 1e12, 0.5);
    CHECK(ad_slots(t) == std::vector<int>{3, 6, 9, 12});
  }
  SECTION("huge beta with scarce ads stops at availability") {
    Request scarce = r;
    scarce.ad_list.resize(2);
    CHECK(ad_slots(wpo_blend(scarce, 1e12, 0.5)) == std::vector<int>{3, 6});
  }
}

TEST_CASE("wpo output is always feasible", "[baselines][property]") {
  Rng rng(223);
  for (int trial = 0; trial < 300; ++trial) {
    const int length = 1 + static_cast<int>(rng.bounded(15));
    const int tas = 1 + static_cast<int>(rng.bounded(6));
    const int gap = 1 + static_cast<int>(rng.bounded(5));
    Request r = oracle::random_request(rng, length, static_cast<int>(rng.bounded(6)), tas, gap);
    const double beta = std::exp(rng.uniform(-4.0, 8.0));
    ExposureTemplate t = wpo_blend(r, beta, rng.uniform(0.0, 1.5));
    REQUIRE(validate_template(t, r.constraints, static_cast<int>(r.ad_list.size())));
  }
}

TEST_CASE("wpo exposure mass trends upward in beta on ranked streams", "[baselines][property]") {
  // On utility-sorted inputs a larger score knob should never buy less ad
  // exposure on average; tested statistically across a generated slice.
  GeneratorConfig gcfg;
  gcfg.seed = 29;
  gcfg.num_requests = 200;
  gcfg.constraints = RequestConstraints{20, 3, 3};
  std::vector<Request> slice = generate_stream(gcfg);
  SlotExposureModel q = SlotExposureModel::geometric(20, 0.9);

  const std::vector<double> ladder = {0.0, 0.05, 0.2, 0.8, 3.0, 12.0, 50.0, 1e6};
  double prev_mass = -1.0;
  for (double beta : ladder) {
    double mass = 0.0;
    for (const Request& r : slice) mass += request_weight(wpo_blend(r, beta, 0.5), q);
    REQUIRE(mass >= prev_mass - 1e-9);
    prev_mass = mass;
  }
}

TEST_CASE("gea blend reduces crowding", "[baselines]") {
  SECTION("decay one reproduces wpo exactly") {
    Rng rng(227);
    for (int trial = 0; trial < 200; ++trial) {
      const int length = 1 + static_cast<int>(rng.bounded(12));
      Request r = oracle::random_request(rng, length, static_cast<int>(rng.bounded(5)),
                                         1 + static_cast<int>(rng.bounded(4)),
                                         1 + static_cast<int>(rng.bounded(4)));
      const double beta = std::exp(rng.uniform(-3.0, 6.0));
      const double alpha = rng.uniform(0.0, 1.2);
      CHECK(gea_blend(r, beta, alpha, 1.0).slots == wpo_blend(r, beta, alpha).slots);
    }
  }
  SECTION("beta zero serves the organic page") {
    Rng rng(229);
    Request r = oracle::random_request(rng, 10, 4, 2, 2);
    CHECK(gea_blend(r, 0.0, 0.5, 0.8).ad_count() == 0);
  }
  SECTION("invalid decay is rejected") {
    Rng rng(233);
    Request r = oracle::random_request(rng, 6, 2, 2, 2);
    CHECK_THROWS_AS(gea_blend(r, 1.0, 0.5, 0.0), ConfigError);
    CHECK_THROWS_AS(gea_blend(r, 1.0, 0.5, 1.0001), ConfigError);
  }
  SECTION("output is always feasible") {
    Rng rng(239);
    for (int trial = 0; trial < 200; ++trial) {
      const int length = 1 + static_cast<int>(rng.bounded(14));
      Request r = oracle::random_request(rng, length, static_cast<int>(rng.bounded(6)),
                                         1 + static_cast<int>(rng.bounded(5)),
                                         1 + static_cast<int>(rng.bounded(4)));
      ExposureTemplate t =
          gea_blend(r, std::exp(rng.uniform(-3.0, 7.0)), rng.uniform(0.0, 1.2), 0.7);
      REQUIRE(validate_template(t, r.constraints, static_cast<int>(r.ad_list.size())));
    }
  }
  SECTION("mean ad spacing is at least wpo's on generated streams") {
    GeneratorConfig gcfg;
    gcfg.seed = 31;
    gcfg.num_requests = 300;
    gcfg.constraints = RequestConstraints{20, 3, 2};
    std::vector<Request> slice = generate_stream(gcfg);

    auto mean_gap = [&](bool gea) {
      double gap_sum = 0.0;
      std::uint64_t gap_count = 0;
      for (const Request& r : slice) {
        ExposureTemplate t =
            gea ? gea_blend(r, 2.0, 0.5, 0.5) : wpo_blend(r, 2.0, 0.5);
        std::vector<int> slots = ad_slots(t);
        for (std::size_t i = 1; i < slots.size(); ++i) {
          gap_sum += slots[i] - slots[i - 1];
          ++gap_count;
        }
      }
      return gap_count ? gap_sum / static_cast<double>(gap_count) : 0.0;
    };
    CHECK(mean_gap(true) >= mean_gap(false) - 1e-9);
  }
}

TEST_CASE("calibrate_beta hits the target monetization rate", "[baselines][slow]") {
  GeneratorConfig gcfg;
  gcfg.seed = 37;
  gcfg.num_requests = 250;
  gcfg.constraints = RequestConstraints{20, 3, 3};
  std::vector<Request> slice = generate_stream(gcfg);
  SlotExposureModel q = SlotExposureModel::geometric(20, 0.9);

  SECTION("wpo converges within the absolute tolerance") {
    BetaCalibration cal = calibrate_beta(StrategyKind::kWpo, slice, q, 0.5, 0.10);
    REQUIRE(cal.converged);
    CHECK(std::abs(cal.achieved_m - 0.10) <= 1e-3);
    CHECK(cal.beta > 0.0);
  }
  SECTION("gea converges within the absolute tolerance") {
    BetaCalibration cal = calibrate_beta(StrategyKind::kGea, slice, q, 0.5, 0.10, 0.8);
    REQUIRE(cal.converged);
    CHECK(std::abs(cal.achieved_m - 0.10) <= 1e-3);
  }
  SECTION("a non-positive target returns beta zero immediately") {
    BetaCalibration cal = calibrate_beta(StrategyKind::kWpo, slice, q, 0.5, 0.0);
    CHECK(cal.beta == 0.0);
    CHECK(cal.converged);
  }
  SECTION("an unreachable target raises with the best achievable rate") {
    try {
      calibrate_beta(StrategyKind::kWpo, slice, q, 0.5, 0.95);
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(e.max_achievable_m > 0.0);
      CHECK(e.max_achievable_m < 0.95);
    }
  }
  SECTION("strategies without a beta knob are rejected") {
    CHECK_THROWS_AS(calibrate_beta(StrategyKind::kFixed, slice, q, 0.5, 0.1), ConfigError);
    CHECK_THROWS_AS(calibrate_beta(StrategyKind::kHca2e, slice, q, 0.5, 0.1), ConfigError);
  }
  SECTION("empty slice is rejected") {
    std::vector<Request> empty;
    CHECK_THROWS_AS(calibrate_beta(StrategyKind::kWpo, empty, q, 0.5, 0.1), DataError);
  }
}
