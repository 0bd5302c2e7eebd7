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

// Constrained template beam search: trace structure, equivalence with full
// enumeration at saturating beam width, feasibility under pruning, and the
// threshold / finalization semantics.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "adex/core.hpp"
#include "adex/ets.hpp"
#include "adex/evaluator.hpp"
#include "adex/rng.hpp"
#include "oracle_helpers.hpp"

using namespace adex;

namespace {

// A prefix of a feasible template must itself obey the placement rules.
bool prefix_feasible(const std::vector<std::uint8_t>& slots, const RequestConstraints& c,
                     int ads_available) {
  int ads = 0, last_ad = 0;
  for (std::size_t l = 0; l < slots.size(); ++l) {
    if (!slots[l]) continue;
    const int slot1 = static_cast<int>(l) + 1;
    if (slot1 < c.top_ad_slot) return false;
    if (last_ad != 0 && slot1 - last_ad < c.min_ad_gap) return false;
    last_ad = slot1;
    if (++ads > ads_available) return false;
  }
  return true;
}

Request random_sorted_request(Rng& rng, int length, int num_ads, int tas, int gap) {
  Request r = oracle::random_request(rng, length, num_ads, tas, gap);
  // Upstream rankers emit utility-sorted lists; several properties below are
  // only meaningful on that input distribution.
  std::sort(r.rec_list.begin(), r.rec_list.end(),
            [](const Candidate& a, const Candidate& b) { return a.utility_rec > b.utility_rec; });
  std::sort(r.ad_list.begin(), r.ad_list.end(),
            [](const Candidate& a, const Candidate& b) { return a.utility_ad > b.utility_ad; });
  for (std::size_t i = 0; i < r.rec_list.size(); ++i)
    r.rec_list[i].upstream_rank = static_cast<int>(i) + 1;
  for (std::size_t i = 0; i < r.ad_list.size(); ++i)
    r.ad_list[i].upstream_rank = static_cast<int>(i) + 1;
  return r;
}

}  // namespace

TEST_CASE("feasible template enumeration matches mask filtering", "[search]") {
  SECTION("frozen small case has exactly five templates") {
    auto feasible = oracle::enumerate_feasible(4, 2, 2, 2);
    CHECK(feasible.size() == 5);
    CHECK(oracle::count_feasible(4, 2, 2, 2) == 5);
  }
  SECTION("constructive enumeration equals validate-filtered enumeration") {
    Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
      const int length = 1 + static_cast<int>(rng.bounded(9));
      const int tas = 1 + static_cast<int>(rng.bounded(5));
      const int gap = 1 + static_cast<int>(rng.bounded(4));
      const int avail = static_cast<int>(rng.bounded(5));
      RequestConstraints c{length, tas, gap};

      std::set<std::vector<std::uint8_t>> constructive;
      for (auto& slots : oracle::enumerate_feasible(length, tas, gap, avail))
        constructive.insert(slots);

      std::set<std::vector<std::uint8_t>> filtered;
      ExposureTemplate t;
      t.slots.assign(static_cast<std::size_t>(length), 0);
      for (std::uint64_t mask = 0; mask < (1ull << length); ++mask) {
        for (int l = 0; l < length; ++l)
          t.slots[static_cast<std::size_t>(l)] = static_cast<std::uint8_t>((mask >> l) & 1u);
        if (validate_template(t, c, avail)) filtered.insert(t.slots);
      }

      REQUIRE(constructive == filtered);
      REQUIRE(oracle::count_feasible(length, tas, gap, avail) ==
              static_cast<std::uint64_t>(filtered.size()));
    }
  }
}

TEST_CASE("exhaustive oracle returns the preference-order argmax", "[search]") {
  Rng rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    const int length = 1 + static_cast<int>(rng.bounded(8));
    const int tas = 1 + static_cast<int>(rng.bounded(4));
    const int gap = 1 + static_cast<int>(rng.bounded(3));
    Request r = random_sorted_request(rng, length, static_cast<int>(rng.bounded(4)), tas, gap);
    SlotExposureModel q(oracle::geometric_q(length, 0.85));
    TradeoffParams p{rng.uniform(0.0, 1.5), rng.uniform(0.0, 2.0)};

    SearchResult got = exhaustive_oracle(r, q, p);

    bool have = false;
    ExposureTemplate best;
    TemplateScore best_score;
    for (auto& slots : oracle::enumerate_feasible(length, tas, gap,
                                                  static_cast<int>(r.ad_list.size()))) {
      ExposureTemplate t;
      t.slots = slots;
      TemplateScore s = score_template(r, t, q, p);
      if (!have || score_preferred(s, t, best_score, best)) {
        best = t;
        best_score = s;
        have = true;
      }
    }
    REQUIRE(have);
    REQUIRE(got.best.slots == best.slots);
    REQUIRE(got.score.kvi == best_score.kvi);
    REQUIRE(got.score.value == best_score.value);
    REQUIRE(got.score.weight == best_score.weight);
  }

  SECTION("length above the cap is refused") {
    Request r;
    r.constraints = {20, 2, 2};
    SlotExposureModel q(oracle::geometric_q(20, 0.9));
    CHECK_THROWS_AS(exhaustive_oracle(r, q, TradeoffParams{}, 16), ConfigError);
  }
}

TEST_CASE("beam search with saturating width equals full enumeration bitwise", "[search]") {
  // With beam_size >= 2^L no child is ever pruned, and because prefix scores
  // accumulate with the evaluator's exact arithmetic the winner and its score
  // must match the enumeration argmax bit for bit.
  Rng rng(107);
  for (int trial = 0; trial < 60; ++trial) {
    const int length = 2 + static_cast<int>(rng.bounded(9));  // 2..10
    const int tas = 1 + static_cast<int>(rng.bounded(4));
    const int gap = 1 + static_cast<int>(rng.bounded(4));
    const int num_ads = static_cast<int>(rng.bounded(5));
    Request r = random_sorted_request(rng, length, num_ads, tas, gap);
    SlotExposureModel q(oracle::geometric_q(length, rng.uniform(0.6, 0.99)));
    TradeoffParams p{rng.uniform(0.0, 1.5), rng.uniform(0.0, 2.5)};

    SearchConfig cfg;
    cfg.beam_size = 1 << length;
    SearchResult beam = ets_search(r, q, p, cfg);
    SearchResult oracle_res = exhaustive_oracle(r, q, p);

    REQUIRE(beam.best.slots == oracle_res.best.slots);
    REQUIRE(beam.score.value == oracle_res.score.value);
    REQUIRE(beam.score.weight == oracle_res.score.weight);
    REQUIRE(beam.score.vpw == oracle_res.score.vpw);
    REQUIRE(beam.score.kvi == oracle_res.score.kvi);
  }
}

TEST_CASE("beam search node budget and trace structure", "[search]") {
  Rng rng(109);
  Request r = random_sorted_request(rng, 4, 2, 2, 2);
  SlotExposureModel q(oracle::geometric_q(4, 0.5));
  TradeoffParams p{0.5, 0.0};
  SearchConfig cfg;
  cfg.beam_size = 2;

  SearchTrace trace;
  SearchResult res = ets_search(r, q, p, cfg, &trace);

  REQUIRE(trace.layers.size() == 4);
  for (std::size_t layer = 0; layer < trace.layers.size(); ++layer) {
    CHECK(trace.layers[layer].size() <= 2);
    CHECK_FALSE(trace.layers[layer].empty());
    for (const ExposureTemplate& t : trace.layers[layer]) {
      CHECK(t.length() == static_cast<int>(layer) + 1);
      CHECK(prefix_feasible(t.slots, r.constraints, static_cast<int>(r.ad_list.size())));
    }
  }
  // 2 children per surviving node per layer is the hard ceiling.
  CHECK(res.nodes_evaluated <= 2ull * 2ull * 4ull);
  CHECK(res.nodes_evaluated >= 4);  // at least one child per layer

  SECTION("node budget holds across widths and sizes") {
    for (int beam_size : {1, 3, 5}) {
      for (int trial = 0; trial < 20; ++trial) {
        const int length = 2 + static_cast<int>(rng.bounded(10));
        Request rr = random_sorted_request(rng, length, static_cast<int>(rng.bounded(5)),
                                           1 + static_cast<int>(rng.bounded(4)),
                                           1 + static_cast<int>(rng.bounded(3)));
        SlotExposureModel qq(oracle::geometric_q(length, 0.9));
        SearchConfig c2;
        c2.beam_size = beam_size;
        SearchResult rr_res = ets_search(rr, qq, p, c2);
        CHECK(rr_res.nodes_evaluated <=
              2ull * static_cast<std::uint64_t>(beam_size) * static_cast<std::uint64_t>(length));
      }
    }
  }
}

TEST_CASE("beam search always returns a feasible template with a consistent score",
          "[search][property]") {
  Rng rng(113);
  for (int beam_size : {1, 3}) {
    for (int trial = 0; trial < 60; ++trial) {
      const int length = 1 + static_cast<int>(rng.bounded(12));
      const int tas = 1 + static_cast<int>(rng.bounded(5));
      const int gap = 1 + static_cast<int>(rng.bounded(4));
      Request r = random_sorted_request(rng, length, static_cast<int>(rng.bounded(6)), tas, gap);
      SlotExposureModel q(oracle::geometric_q(length, rng.uniform(0.5, 1.0)));
      TradeoffParams p{rng.uniform(0.0, 1.2), rng.uniform(0.0, 2.0)};
      SearchConfig cfg;
      cfg.beam_size = beam_size;

      SearchResult res = ets_search(r, q, p, cfg);
      REQUIRE(validate_template(res.best, r.constraints, static_cast<int>(r.ad_list.size())));

      TemplateScore rescore = score_template(r, res.best, q, p);
      REQUIRE(res.score.value == rescore.value);
      REQUIRE(res.score.weight == rescore.weight);
      REQUIRE(res.score.kvi == rescore.kvi);

      // The all-organic fallback is always in the comparison set, so the
      // returned margin can never be negative... unless a zero-kvi tie is won
      // by something smaller, which the preference order forbids.
      REQUIRE(res.score.kvi >= 0.0);

      // A pruned search can never beat the enumeration optimum.
      if (length <= 10) {
        SearchResult opt = exhaustive_oracle(r, q, p);
        REQUIRE(res.score.kvi <= opt.score.kvi);
      }
    }
  }
}

TEST_CASE("beam search degenerate inputs fall back to the all-organic page", "[search]") {
  SlotExposureModel q(oracle::geometric_q(6, 0.8));
  TradeoffParams p{0.5, 0.0};
  SearchConfig cfg;

  SECTION("no ads available") {
    Rng rng(127);
    Request r = random_sorted_request(rng, 6, 0, 2, 2);
    SearchResult res = ets_search(r, q, p, cfg);
    CHECK(res.best.ad_count() == 0);
    CHECK(res.score.kvi == 0.0);
  }
  SECTION("top ad slot beyond the page") {
    Rng rng(131);
    Request r = random_sorted_request(rng, 6, 3, 9, 2);
    SearchResult res = ets_search(r, q, p, cfg);
    CHECK(res.best.ad_count() == 0);
  }
  SECTION("worthless ads lose to the organic page") {
    Rng rng(137);
    Request r = random_sorted_request(rng, 6, 3, 1, 1);
    for (Candidate& ad : r.ad_list) {
      ad.utility_ad = 0.0;
      ad.utility_rec = 0.0;
    }
    SearchResult res = ets_search(r, q, p, cfg);
    CHECK(res.best.ad_count() == 0);
  }
  SECTION("invalid inputs throw") {
    Rng rng(139);
    Request r = random_sorted_request(rng, 6, 2, 2, 2);
    SearchConfig bad;
    bad.beam_size = 0;
    CHECK_THROWS_AS(ets_search(r, q, p, bad), ConfigError);
    SlotExposureModel wrong(oracle::geometric_q(5, 0.8));
    CHECK_THROWS_AS(ets_search(r, wrong, p, cfg), DataError);
    Request short_recs = r;
    short_recs.rec_list.resize(3);
    CHECK_THROWS_AS(ets_search(short_recs, q, p, cfg), DataError);
  }
}

TEST_CASE("finalization keeps the template only above the threshold", "[search]") {
  SearchResult res;
  res.best.slots = {0, 1};
  res.score = TemplateScore{1.25, 0.5, 2.5, 0.25};

  SECTION("value rate above the threshold keeps the searched template") {
    CHECK(finalize_template(res, 2.0).slots == std::vector<std::uint8_t>{0, 1});
  }
  SECTION("the comparison is strict: equality demotes to all-organic") {
    CHECK(finalize_template(res, 2.5).ad_count() == 0);
  }
  SECTION("an all-organic winner stays all-organic at any threshold") {
    SearchResult organic;
    organic.best = ExposureTemplate::all_organic(2);
    organic.score = TemplateScore{};
    CHECK(finalize_template(organic, 0.0).ad_count() == 0);
    CHECK(finalize_template(organic, 5.0).ad_count() == 0);
  }
}

TEST_CASE("raising the threshold never buys more ad exposure", "[search][property]") {
  // Exchange argument: if the argmax at a higher threshold carried more
  // weight, swapping the two winners would improve one of the two optima.
  Rng rng(149);
  for (int trial = 0; trial < 100; ++trial) {
    const int length = 2 + static_cast<int>(rng.bounded(9));
    Request r = random_sorted_request(rng, length, static_cast<int>(rng.bounded(5)),
                                      1 + static_cast<int>(rng.bounded(3)),
                                      1 + static_cast<int>(rng.bounded(3)));
    SlotExposureModel q(oracle::geometric_q(length, rng.uniform(0.6, 1.0)));
    const double alpha = rng.uniform(0.0, 1.2);
    double rho1 = rng.uniform(0.0, 2.0);
    double rho2 = rng.uniform(0.0, 2.0);
    if (rho1 > rho2) std::swap(rho1, rho2);
    if (rho1 == rho2) rho2 += 0.5;

    SearchResult low = exhaustive_oracle(r, q, TradeoffParams{alpha, rho1});
    SearchResult high = exhaustive_oracle(r, q, TradeoffParams{alpha, rho2});
    REQUIRE(high.score.weight <= low.score.weight);
  }
}

TEST_CASE("scaling utilities and threshold together preserves the winner", "[search][property]") {
  Rng rng(151);
  for (int trial = 0; trial < 40; ++trial) {
    const int length = 2 + static_cast<int>(rng.bounded(8));
    Request r = random_sorted_request(rng, length, static_cast<int>(rng.bounded(4)),
                                      1 + static_cast<int>(rng.bounded(3)), 2);
    SlotExposureModel q(oracle::geometric_q(length, 0.85));
    const double alpha = rng.uniform(0.1, 1.0);
    const double rho = rng.uniform(0.0, 1.5);

    Request scaled = r;
    for (Candidate& c : scaled.rec_list) {
      c.utility_rec *= 4.0;
      c.utility_ad *= 4.0;
    }
    for (Candidate& c : scaled.ad_list) {
      c.utility_rec *= 4.0;
      c.utility_ad *= 4.0;
    }

    SearchResult base = exhaustive_oracle(r, q, TradeoffParams{alpha, rho});
    SearchResult big = exhaustive_oracle(scaled, q, TradeoffParams{alpha, 4.0 * rho});
    // Power-of-two scaling is exact, so kvi ordering (and ties) are unchanged.
    REQUIRE(base.best.slots == big.best.slots);
    REQUIRE(big.score.value == 4.0 * base.score.value);
  }
}
