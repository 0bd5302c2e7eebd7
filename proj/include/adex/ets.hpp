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
#include <vector>

#include "adex/core.hpp"
#include "adex/evaluator.hpp"

namespace adex {

struct SearchConfig {
  int beam_size = 5;
  // exhaustive_oracle enumerates 2^L templates; refuse lengths above this cap.
  int oracle_max_length = 16;
};

struct SearchResult {
  ExposureTemplate best;           // argmax-kvi template; all-organic always considered
  TemplateScore score;
  std::uint64_t nodes_evaluated = 0;  // in-search child evaluations (<= 2 * B * L)
};

// Per-layer survivor templates, recorded only when a trace sink is passed in.
struct SearchTrace {
  std::vector<std::vector<ExposureTemplate>> layers;
};

namespace detail {

// One beam node = one slot-type prefix.  Prefixes share storage through
// parent links; templates are materialized only for the final comparison set,
// tie-breaks, and traces.
struct BeamNode {
  std::int32_t parent = -1;
  std::uint8_t ad = 0;        // this node's slot type
  std::int32_t ads_used = 0;
  std::int32_t last_ad = 0;   // 1-based slot of the latest ad, 0 = none
  double utility = 0.0;       // raw discounted prefix utility
  double weight = 0.0;        // discounted ad exposure mass of the prefix
  double kvi = 0.0;           // prefix margin over the all-organic prefix
};

inline ExposureTemplate materialize(const std::vector<BeamNode>& arena, std::int32_t idx,
                                    int depth) {
  ExposureTemplate t;
  t.slots.assign(static_cast<std::size_t>(depth), 0);
  for (int l = depth - 1; l >= 0; --l) {
    t.slots[static_cast<std::size_t>(l)] = arena[static_cast<std::size_t>(idx)].ad;
    idx = arena[static_cast<std::size_t>(idx)].parent;
  }
  return t;
}

// Lexicographic comparison of two same-depth prefixes without allocating.
inline bool lex_less_nodes(const std::vector<BeamNode>& arena, std::int32_t a,
                           std::int32_t b, int depth) {
  thread_local std::vector<std::uint8_t> bits_a, bits_b;
  bits_a.assign(static_cast<std::size_t>(depth), 0);
  bits_b.assign(static_cast<std::size_t>(depth), 0);
  for (int l = depth - 1; l >= 0; --l) {
    bits_a[static_cast<std::size_t>(l)] = arena[static_cast<std::size_t>(a)].ad;
    bits_b[static_cast<std::size_t>(l)] = arena[static_cast<std::size_t>(b)].ad;
    a = arena[static_cast<std::size_t>(a)].parent;
    b = arena[static_cast<std::size_t>(b)].parent;
  }
  return bits_a < bits_b;
}

}  // namespace detail

// Layered beam search over slot-type prefixes.  Layer l extends every
// surviving prefix with an organic slot and, where the constraints allow one,
// an ad slot; children are ranked by prefix kvi and the top beam_size survive.
// Prefix scores accumulate with the same arithmetic as the full evaluator, so
// a full-depth prefix score is bit-identical to score_template's kvi.  The
// final winner is chosen among the surviving full templates plus the
// all-organic fallback, rescored definitionally.
inline SearchResult ets_search(const Request& r, const SlotExposureModel& q,
                               const TradeoffParams& p, const SearchConfig& cfg,
                               SearchTrace* trace = nullptr) {
  const int length = r.constraints.page_length;
  if (cfg.beam_size < 1) throw ConfigError("search: beam_size must be >= 1");
  if (q.length() != length)
    throw DataError("search: exposure model length mismatch on request " + r.id);
  if (static_cast<int>(r.rec_list.size()) < length)
    throw DataError("search: request " + r.id + " has fewer organics than slots");
  const int ads_available = static_cast<int>(r.ad_list.size());
  const RequestConstraints& c = r.constraints;

  // Prefix utilities of the all-organic reference, phi0[l] = utility of the
  // first l slots.  Same accumulation order and expression as page_utility.
  std::vector<double> phi0(static_cast<std::size_t>(length) + 1, 0.0);
  {
    double acc = 0.0;
    for (int l = 0; l < length; ++l) {
      const Candidate& rec = r.rec_list[static_cast<std::size_t>(l)];
      acc += q.q[static_cast<std::size_t>(l)] *
             (rec.utility_ad + p.alpha * rec.utility_rec);
      phi0[static_cast<std::size_t>(l) + 1] = acc;
    }
  }

  std::vector<detail::BeamNode> arena;
  arena.reserve(std::min<std::uint64_t>(
      1 + 2ull * static_cast<std::uint64_t>(cfg.beam_size) * static_cast<std::uint64_t>(length),
      1ull << 22));
  arena.push_back(detail::BeamNode{});  // root: empty prefix

  std::vector<std::int32_t> beam{0};
  std::vector<std::int32_t> children;
  std::uint64_t evals = 0;
  if (trace) trace->layers.clear();

  for (int l = 0; l < length; ++l) {
    const double ql = q.q[static_cast<std::size_t>(l)];
    const int slot1 = l + 1;
    children.clear();
    for (std::int32_t idx : beam) {
      const detail::BeamNode node = arena[static_cast<std::size_t>(idx)];  // copy: arena grows

      // Organic extension is always feasible.
      {
        const Candidate& rec = r.rec_list[static_cast<std::size_t>(l - node.ads_used)];
        detail::BeamNode child;
        child.parent = idx;
        child.ad = 0;
        child.ads_used = node.ads_used;
        child.last_ad = node.last_ad;
        child.utility = node.utility + ql * (rec.utility_ad + p.alpha * rec.utility_rec);
        child.weight = node.weight;
        child.kvi = (child.utility - phi0[static_cast<std::size_t>(slot1)]) -
                    p.rho_thres * child.weight;
        ++evals;
        children.push_back(static_cast<std::int32_t>(arena.size()));
        arena.push_back(child);
      }

      // Ad extension, only where placement rules allow one.
      if (node.ads_used < ads_available && slot1 >= c.top_ad_slot &&
          (node.last_ad == 0 || slot1 - node.last_ad >= c.min_ad_gap)) {
        const Candidate& ad = r.ad_list[static_cast<std::size_t>(node.ads_used)];
        detail::BeamNode child;
        child.parent = idx;
        child.ad = 1;
        child.ads_used = node.ads_used + 1;
        child.last_ad = slot1;
        child.utility = node.utility + ql * (ad.utility_ad + p.alpha * ad.utility_rec);
        child.weight = node.weight + ql;
        child.kvi = (child.utility - phi0[static_cast<std::size_t>(slot1)]) -
                    p.rho_thres * child.weight;
        ++evals;
        children.push_back(static_cast<std::int32_t>(arena.size()));
        arena.push_back(child);
      }
    }

    const int depth = slot1;
    std::sort(children.begin(), children.end(),
              [&arena, depth](std::int32_t a, std::int32_t b) {
                const detail::BeamNode& na = arena[static_cast<std::size_t>(a)];
                const detail::BeamNode& nb = arena[static_cast<std::size_t>(b)];
                if (na.kvi != nb.kvi) return na.kvi > nb.kvi;
                if (na.ads_used != nb.ads_used) return na.ads_used < nb.ads_used;
                return detail::lex_less_nodes(arena, a, b, depth);
              });
    if (static_cast<int>(children.size()) > cfg.beam_size)
      children.resize(static_cast<std::size_t>(cfg.beam_size));
    beam = children;

    if (trace) {
      std::vector<ExposureTemplate> survivors;
      survivors.reserve(beam.size());
      for (std::int32_t idx : beam) survivors.push_back(detail::materialize(arena, idx, depth));
      trace->layers.push_back(std::move(survivors));
    }
  }

  // Final comparison set: full-depth survivors plus the all-organic fallback,
  // all rescored through the definitional evaluator path.
  SearchResult out;
  out.nodes_evaluated = evals;
  bool have = false;
  for (std::int32_t idx : beam) {
    ExposureTemplate t = detail::materialize(arena, idx, length);
    TemplateScore s = score_template(r, t, q, p);
    if (!have || score_preferred(s, t, out.score, out.best)) {
      out.best = std::move(t);
      out.score = s;
      have = true;
    }
  }
  {
    ExposureTemplate t0 = ExposureTemplate::all_organic(length);
    TemplateScore s0 = score_template(r, t0, q, p);
    if (!have || score_preferred(s0, t0, out.score, out.best)) {
      out.best = std::move(t0);
      out.score = s0;
    }
  }
  return out;
}

// Final exposure decision: adopt the searched template only when its value
// rate strictly clears the threshold; otherwise serve the all-organic page.
inline ExposureTemplate finalize_template(const SearchResult& res, double rho_thres) {
  if (res.score.vpw > rho_thres) return res.best;
  return ExposureTemplate::all_organic(res.best.length());
}

// Reference optimum by full enumeration: every slot-type combination is
// screened and scored, and the argmax under the shared preference order is
// returned.  Exponential in page length, hence the hard cap.
inline SearchResult exhaustive_oracle(const Request& r, const SlotExposureModel& q,
                                      const TradeoffParams& p, int max_length = 16) {
  const int length = r.constraints.page_length;
  if (length > max_length)
    throw ConfigError("exhaustive_oracle: page length " + std::to_string(length) +
                      " exceeds cap " + std::to_string(max_length));
  if (q.length() != length)
    throw DataError("exhaustive_oracle: exposure model length mismatch on request " + r.id);
  const int ads_available = static_cast<int>(r.ad_list.size());

  SearchResult out;
  bool have = false;
  ExposureTemplate t;
  t.slots.assign(static_cast<std::size_t>(length), 0);
  const std::uint64_t limit = 1ull << length;
  for (std::uint64_t mask = 0; mask < limit; ++mask) {
    for (int l = 0; l < length; ++l)
      t.slots[static_cast<std::size_t>(l)] = static_cast<std::uint8_t>((mask >> l) & 1u);
    if (!validate_template(t, r.constraints, ads_available)) continue;
    TemplateScore s = score_template(r, t, q, p);
    ++out.nodes_evaluated;
    if (!have || score_preferred(s, t, out.score, out.best)) {
      out.best = t;
      out.score = s;
      have = true;
    }
  }
  return out;
}

}  // namespace adex
