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
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "adex/baselines.hpp"
#include "adex/controller.hpp"
#include "adex/core.hpp"
#include "adex/ets.hpp"
#include "adex/evaluator.hpp"
#include "adex/generator.hpp"
#include "adex/metrics.hpp"
#include "adex/rng.hpp"
#include "adex/user_model.hpp"

namespace adex {

// Everything needed to turn one request into one template.
struct StrategySpec {
  StrategyKind kind = StrategyKind::kHca2e;
  double alpha = 0.5;
  int beam_size = 5;                 // hca2e
  double beta = 1.0;                 // wpo / gea, usually calibrated
  double gap_decay = 0.8;            // gea
  std::vector<int> fixed_positions;  // fixed
};

struct RunOptions {
  double m_star = 0.10;
  bool use_controller = true;  // threshold feedback; hca2e only
  double initial_rho = 0.0;
  double gamma = 0.1;
  int window_size = 2000;
  double rho_min = 0.0;
  double rho_max = -1.0;
  std::uint64_t user_seed = 7;
  int jobs = 1;
  SearchConfig search;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<WindowReport> windows;
  double final_rho = 0.0;
};

// Called once per request after simulation, in stream order.
using EventSink = std::function<void(std::uint64_t index, const Request&, const MergedPage&,
                                     const UserEvent&)>;

namespace detail {

inline ExposureTemplate choose_template(const Request& r, const StrategySpec& s,
                                        const SlotExposureModel& q, double rho,
                                        const SearchConfig& search,
                                        const ExposureTemplate* fixed_tmpl) {
  switch (s.kind) {
    case StrategyKind::kFixed:
      return clip_to_availability(*fixed_tmpl, static_cast<int>(r.ad_list.size()));
    case StrategyKind::kWpo:
      return wpo_blend(r, s.beta, s.alpha);
    case StrategyKind::kGea:
      return gea_blend(r, s.beta, s.alpha, s.gap_decay);
    case StrategyKind::kHca2e: {
      TradeoffParams p{s.alpha, rho};
      SearchResult res = ets_search(r, q, p, search);
      return finalize_template(res, rho);
    }
  }
  throw ConfigError("choose_template: unknown strategy");
}

// Run fn(i) for i in [begin, end) across `jobs` workers.  Results land in
// per-index slots, so parallelism never changes what later folds observe.
template <typename Fn>
void parallel_for(std::uint64_t begin, std::uint64_t end, int jobs, const Fn& fn) {
  const std::uint64_t count = end - begin;
  if (jobs <= 1 || count < 2) {
    for (std::uint64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  const std::uint64_t workers = std::min<std::uint64_t>(static_cast<std::uint64_t>(jobs), count);
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  threads.reserve(workers);
  for (std::uint64_t w = 0; w < workers; ++w) {
    const std::uint64_t lo = begin + count * w / workers;
    const std::uint64_t hi = begin + count * (w + 1) / workers;
    threads.emplace_back([&fn, &errors, w, lo, hi] {
      try {
        for (std::uint64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Replay a request stream under one strategy.  Requests are processed in
// segments (one controller window, or a flat chunk when no controller runs):
// templates and user feedback are computed per request — possibly in
// parallel, from per-request derived RNG substreams — and then folded
// strictly in stream order.  Output is therefore byte-stable for a given
// (stream, options) regardless of the jobs setting.
inline RunResult run_stream(const std::vector<Request>& stream, const StrategySpec& strategy,
                            const SlotExposureModel& q, const RunOptions& opt,
                            const EventSink& sink = {}) {
  q.validate();
  RunResult out;

  ExposureTemplate fixed_tmpl;
  if (strategy.kind == StrategyKind::kFixed) {
    if (strategy.fixed_positions.empty())
      throw ConfigError("run: fixed strategy needs fixed_positions");
    if (stream.empty()) return out;
    fixed_tmpl = fixed_template(stream.front().constraints, strategy.fixed_positions);
  }
  if (stream.empty()) return out;

  const bool controlled = strategy.kind == StrategyKind::kHca2e && opt.use_controller;
  ThresholdController controller(
      opt.initial_rho,
      ControllerConfig{opt.m_star, opt.gamma, opt.window_size, opt.rho_min, opt.rho_max});
  double rho = strategy.kind == StrategyKind::kHca2e ? opt.initial_rho : 0.0;

  const std::uint64_t n = stream.size();
  const std::uint64_t segment =
      controlled ? static_cast<std::uint64_t>(opt.window_size) : std::uint64_t{8192};

  struct Slot {
    MergedPage page;
    UserEvent event;
  };
  std::vector<Slot> slots;

  for (std::uint64_t base = 0; base < n; base += segment) {
    const std::uint64_t end = std::min(n, base + segment);
    slots.resize(end - base);
    const double rho_segment = controlled ? controller.rho_thres() : rho;

    detail::parallel_for(base, end, opt.jobs, [&](std::uint64_t i) {
      const Request& r = stream[i];
      ExposureTemplate t =
          detail::choose_template(r, strategy, q, rho_segment, opt.search, &fixed_tmpl);
      Slot& slot = slots[i - base];
      slot.page = merge_rpp(r, t);
      Rng user_rng(derive_seed(opt.user_seed, i));
      slot.event = simulate_user(slot.page, q, user_rng);
    });

    for (std::uint64_t i = base; i < end; ++i) {
      Slot& slot = slots[i - base];
      out.metrics.add(slot.page, slot.event, q);
      if (sink) sink(i, stream[i], slot.page, slot.event);
      if (controlled) {
        controller.observe(slot.page, q);
        if (auto report = controller.maybe_update()) out.windows.push_back(*report);
      }
    }
  }

  out.final_rho = controlled ? controller.rho_thres() : rho;
  return out;
}

// ------------------------------ sweeps ------------------------------

struct SweepOptions {
  double m_star = 0.10;
  int calibration_requests = 2000;
  double gamma = 0.1;
  int window_size = 2000;
  double gap_decay = 0.8;
  std::uint64_t user_seed = 7;
  int jobs = 1;
  SearchConfig search;
  std::vector<int> fixed_positions;  // empty: derive from the exposure model
};

// One (strategy, alpha) table row: headline metrics plus the advantage
// columns against the matched fixed reference.
struct SweepRow {
  std::string strategy;
  double alpha = 0.0;
  int beam = 0;  // 0 for strategies without a beam
  double m_star = 0.0;
  RunMetrics metrics;
  std::vector<WindowReport> windows;
  double calibrated_beta = 0.0;
  double initial_rho = 0.0;
  double d_rev = 0.0, d_gmv = 0.0, d_clk = 0.0, d_ctr = 0.0;
};

inline std::vector<Request> calibration_slice(const std::vector<Request>& stream, int want) {
  const std::size_t n = std::min<std::size_t>(stream.size(), static_cast<std::size_t>(want));
  return std::vector<Request>(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(n));
}

// Run one sweep cell.  Baselines run open-loop with their knob calibrated on
// a stream slice and frozen; the adaptive strategy runs closed-loop from a
// bisected initial threshold.  fixed_ref supplies the advantage denominator
// (pass the cell's own metrics for the fixed row itself).
inline SweepRow run_sweep_cell(const std::vector<Request>& stream, StrategyKind kind,
                               int beam, double alpha, const SlotExposureModel& q,
                               const SweepOptions& opt, const RunMetrics* fixed_ref) {
  if (stream.empty()) throw DataError("sweep: empty stream");
  SweepRow row;
  row.strategy = to_string(kind);
  row.alpha = alpha;
  row.beam = kind == StrategyKind::kHca2e ? beam : 0;
  row.m_star = opt.m_star;

  StrategySpec spec;
  spec.kind = kind;
  spec.alpha = alpha;
  spec.beam_size = beam;
  spec.gap_decay = opt.gap_decay;

  RunOptions run_opt;
  run_opt.m_star = opt.m_star;
  run_opt.gamma = opt.gamma;
  run_opt.window_size = opt.window_size;
  run_opt.user_seed = opt.user_seed;
  run_opt.jobs = opt.jobs;
  run_opt.search = opt.search;
  run_opt.search.beam_size = beam > 0 ? beam : run_opt.search.beam_size;

  const std::vector<Request> slice = calibration_slice(stream, opt.calibration_requests);
  switch (kind) {
    case StrategyKind::kFixed:
      spec.fixed_positions =
          opt.fixed_positions.empty()
              ? calibrate_fixed_positions(stream.front().constraints, q, opt.m_star)
              : opt.fixed_positions;
      run_opt.use_controller = false;
      break;
    case StrategyKind::kWpo:
    case StrategyKind::kGea: {
      BetaCalibration cal =
          calibrate_beta(kind, slice, q, alpha, opt.m_star, opt.gap_decay);
      spec.beta = cal.beta;
      row.calibrated_beta = cal.beta;
      run_opt.use_controller = false;
      break;
    }
    case StrategyKind::kHca2e: {
      RhoCalibration cal =
          calibrate_rho(slice, q, alpha, run_opt.search, opt.m_star);
      run_opt.initial_rho = cal.rho;
      row.initial_rho = cal.rho;
      run_opt.use_controller = true;
      break;
    }
  }

  RunResult res = run_stream(stream, spec, q, run_opt);
  row.metrics = res.metrics;
  row.windows = std::move(res.windows);

  const RunMetrics& ref = fixed_ref ? *fixed_ref : row.metrics;
  row.d_rev = advantage(row.metrics.revenue, ref.revenue);
  row.d_gmv = advantage(row.metrics.gmv, ref.gmv);
  row.d_clk = advantage(static_cast<double>(row.metrics.clicks),
                        static_cast<double>(ref.clicks));
  row.d_ctr = advantage(row.metrics.ctr(), ref.ctr());
  return row;
}

// Full trade-off sweep: the fixed reference runs once per alpha (its metrics
// do not depend on alpha, but rows stay one-per-cell for a regular table),
// then every requested strategy sweeps the alpha grid.
inline std::vector<SweepRow> pareto_sweep(const std::vector<Request>& stream,
                                          const std::vector<StrategyKind>& strategies,
                                          const std::vector<int>& beams,
                                          const std::vector<double>& alphas,
                                          const SlotExposureModel& q,
                                          const SweepOptions& opt) {
  if (alphas.empty()) throw ConfigError("sweep: alphas must be non-empty");
  for (double a : alphas)
    if (!(a > 0.0) || a > 1.0) throw ConfigError("sweep: alphas must lie in (0, 1]");
  std::vector<SweepRow> rows;

  SweepRow fixed_row = run_sweep_cell(stream, StrategyKind::kFixed, 0, alphas.front(), q,
                                      opt, nullptr);
  const RunMetrics fixed_ref = fixed_row.metrics;

  for (StrategyKind kind : strategies) {
    const std::vector<int> beam_grid =
        kind == StrategyKind::kHca2e ? beams : std::vector<int>{0};
    for (int beam : beam_grid) {
      for (double alpha : alphas) {
        if (kind == StrategyKind::kFixed) {
          SweepRow row = fixed_row;
          row.alpha = alpha;
          row.d_rev = row.d_gmv = row.d_clk = row.d_ctr = 0.0;
          rows.push_back(std::move(row));
          continue;
        }
        rows.push_back(run_sweep_cell(stream, kind, beam, alpha, q, opt, &fixed_ref));
      }
    }
  }
  return rows;
}

}  // namespace adex
