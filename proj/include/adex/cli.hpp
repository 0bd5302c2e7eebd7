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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "adex/baselines.hpp"
#include "adex/config.hpp"
#include "adex/core.hpp"
#include "adex/generator.hpp"
#include "adex/log_io.hpp"
#include "adex/metrics.hpp"
#include "adex/runner.hpp"

namespace adex {
namespace clidetail {

namespace fs = std::filesystem;

inline std::string join_command(const std::vector<std::string>& args) {
  std::string command = "adex";
  for (const std::string& a : args) command += " " + a;
  return command;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

// Full-precision metrics snapshot; JSON doubles round-trip exactly, so a
// resumed sweep reproduces advantage columns bit-for-bit.
inline json metrics_to_json(const RunMetrics& m) {
  return json{{"requests", m.requests},
              {"revenue", m.revenue},
              {"gmv", m.gmv},
              {"clicks", m.clicks},
              {"conversions", m.conversions},
              {"expected_ad_exposures", m.expected_ad_exposures},
              {"expected_total_exposures", m.expected_total_exposures},
              {"realized_ad_exposures", m.realized_ad_exposures},
              {"realized_total_exposures", m.realized_total_exposures},
              {"ad_position_sum", m.ad_position_sum},
              {"ad_position_counts", m.ad_position_counts}};
}

inline RunMetrics metrics_from_json(const json& j) {
  RunMetrics m;
  m.requests = j.at("requests").get<std::uint64_t>();
  m.revenue = j.at("revenue").get<double>();
  m.gmv = j.at("gmv").get<double>();
  m.clicks = j.at("clicks").get<std::uint64_t>();
  m.conversions = j.at("conversions").get<std::uint64_t>();
  m.expected_ad_exposures = j.at("expected_ad_exposures").get<double>();
  m.expected_total_exposures = j.at("expected_total_exposures").get<double>();
  m.realized_ad_exposures = j.at("realized_ad_exposures").get<std::uint64_t>();
  m.realized_total_exposures = j.at("realized_total_exposures").get<std::uint64_t>();
  m.ad_position_sum = j.at("ad_position_sum").get<std::uint64_t>();
  m.ad_position_counts = j.at("ad_position_counts").get<std::vector<std::uint64_t>>();
  return m;
}

inline std::string alpha_key(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", alpha);
  return std::string(buf);
}

inline std::string cell_key(StrategyKind kind, int beam, double alpha) {
  std::string key = to_string(kind);
  if (kind == StrategyKind::kHca2e) key += "-b" + std::to_string(beam);
  return key + "-a" + alpha_key(alpha);
}

// Advantage column that tolerates a degenerate (all-zero) reference; the
// library-level advantage() keeps its strict positive-baseline contract.
inline double table_delta(double metric, double baseline) {
  return baseline > 0.0 ? advantage(metric, baseline) : 0.0;
}

inline std::vector<Request> acquire_stream(const AppConfig& cfg, const std::string& log_path,
                                           const SlotExposureModel& q) {
  std::vector<Request> stream =
      log_path.empty() ? generate_stream(cfg.generator) : read_request_log(log_path);
  for (const Request& r : stream) {
    if (r.constraints.page_length != q.length())
      throw DataError("request " + r.id + ": page_length " +
                      std::to_string(r.constraints.page_length) +
                      " does not match the exposure curve length " +
                      std::to_string(q.length()) +
                      " (adjust generator.page_length or exposure.q)");
  }
  return stream;
}

// ------------------------------ generate ------------------------------

inline void cmd_generate(const LoadedConfig& lc, const std::string& out_dir,
                         const std::string& command, std::ostream& out) {
  fs::create_directories(out_dir);
  const std::vector<Request> stream = generate_stream(lc.config.generator);
  const fs::path log_path = fs::path(out_dir) / "requests.jsonl";
  write_request_log(log_path.string(), stream);
  write_manifest(out_dir, lc.effective, command);
  out << "generate: wrote " << stream.size() << " requests to " << log_path.string() << "\n";
}

// -------------------------------- run --------------------------------


inline void cmd_run(const LoadedConfig& lc, const std::string& log_path,
                    const std::string& out_dir, bool write_events,
                    const std::string& command, std::ostream& out) {
  const AppConfig& cfg = lc.config;
  fs::create_directories(out_dir);
  const SlotExposureModel q = exposure_model(cfg);
  const std::vector<Request> stream = acquire_stream(cfg, log_path, q);
  if (stream.empty()) throw DataError("run: request stream is empty");

  // The fixed strategy always runs first: it is the advantage denominator.
  std::vector<StrategyKind> kinds{StrategyKind::kFixed};
  for (StrategyKind k : parse_strategy_list(cfg.strategy))
    if (k != StrategyKind::kFixed) kinds.push_back(k);

  const std::vector<Request> slice = calibration_slice(stream, cfg.calibration_requests);
  const std::vector<int> positions =
      cfg.fixed_positions.empty()
          ? calibrate_fixed_positions(stream.front().constraints, q, cfg.m_star)
          : cfg.fixed_positions;

  std::vector<SweepRow> rows;
  RunMetrics fixed_ref;
  for (StrategyKind kind : kinds) {
    StrategySpec spec;
    spec.kind = kind;
    spec.alpha = cfg.alpha;
    spec.beam_size = cfg.beam;
    spec.gap_decay = cfg.gap_decay;
    spec.fixed_positions = positions;

    RunOptions ropt;
    ropt.m_star = cfg.m_star;
    ropt.use_controller = kind == StrategyKind::kHca2e && cfg.controller_enabled;
    ropt.gamma = cfg.gamma;
    ropt.window_size = cfg.window;
    ropt.rho_min = cfg.rho_min;
    ropt.rho_max = cfg.rho_max;
    ropt.user_seed = cfg.run_seed;
    ropt.jobs = cfg.jobs;
    ropt.search.beam_size = cfg.beam;

    SweepRow row;
    row.strategy = to_string(kind);
    row.alpha = cfg.alpha;
    row.beam = kind == StrategyKind::kHca2e ? cfg.beam : 0;
    row.m_star = cfg.m_star;

    if (kind == StrategyKind::kWpo || kind == StrategyKind::kGea) {
      spec.beta = cfg.beta >= 0.0
                      ? cfg.beta
                      : calibrate_beta(kind, slice, q, cfg.alpha, cfg.m_star, cfg.gap_decay)
                            .beta;
      row.calibrated_beta = spec.beta;
    } else if (kind == StrategyKind::kHca2e) {
      ropt.initial_rho =
          cfg.initial_rho >= 0.0
              ? cfg.initial_rho
              : calibrate_rho(slice, q, cfg.alpha, ropt.search, cfg.m_star).rho;
      row.initial_rho = ropt.initial_rho;
    }

    const std::string label = to_string(kind);
    std::ofstream events;
    EventSink sink;
    if (write_events) {
      const fs::path events_path = fs::path(out_dir) / ("events-" + label + ".jsonl");
      events.open(events_path, std::ios::binary);
      if (!events) throw DataError("cannot open for writing: " + events_path.string());
      sink = [&events](std::uint64_t index, const Request& r, const MergedPage& page,
                       const UserEvent& ev) {
        events << event_to_json(index, r, page, ev).dump() << '\n';
      };
    }

    RunResult res = run_stream(stream, spec, q, ropt, sink);
    if (write_events && !events) throw DataError("event log write failed for " + label);
    row.metrics = res.metrics;
    row.windows = std::move(res.windows);
    if (kind == StrategyKind::kFixed) fixed_ref = row.metrics;
    row.d_rev = table_delta(row.metrics.revenue, fixed_ref.revenue);
    row.d_gmv = table_delta(row.metrics.gmv, fixed_ref.gmv);
    row.d_clk = table_delta(static_cast<double>(row.metrics.clicks),
                            static_cast<double>(fixed_ref.clicks));
    row.d_ctr = table_delta(row.metrics.ctr(), fixed_ref.ctr());

    write_histogram((fs::path(out_dir) / ("histogram-" + label + ".tsv")).string(),
                    ad_position_report(row.metrics, stream.front().constraints));
    if (!row.windows.empty())
      write_window_reports((fs::path(out_dir) / ("windows-" + label + ".tsv")).string(),
                           row.windows);

    out << "run[" << label << "]: revenue=" << detail::fmt_double(row.metrics.revenue, 4)
        << " gmv=" << detail::fmt_double(row.metrics.gmv, 4)
        << " clicks=" << row.metrics.clicks
        << " realized_m=" << detail::fmt_double(row.metrics.realized_m(), 6);
    if (kind == StrategyKind::kHca2e)
      out << " final_rho=" << detail::fmt_general(res.final_rho);
    out << "\n";

    rows.push_back(std::move(row));
  }

  write_metrics_table((fs::path(out_dir) / "metrics.tsv").string(), rows);
  write_manifest(out_dir, lc.effective, command);
}

// ------------------------------- sweep -------------------------------

inline void cmd_sweep(const LoadedConfig& lc, const std::string& log_path,
                      const std::string& out_dir, const std::string& command,
                      std::ostream& out) {
  const AppConfig& cfg = lc.config;
  const fs::path cells_dir = fs::path(out_dir) / "cells";
  fs::create_directories(cells_dir);

  // A resumed sweep must continue the same experiment: the manifest written
  // at start pins the config hash, and a mismatch refuses to mix cells.
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  const std::string config_hash = fnv1a64_hex(lc.effective.dump());
  if (fs::exists(manifest_path)) {
    json manifest;
    try {
      manifest = json::parse(read_text(manifest_path));
    } catch (const json::exception& e) {
      throw DataError("unreadable manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("config_hash") ||
        manifest["config_hash"].get<std::string>() != config_hash)
      throw ConfigError("output dir " + out_dir +
                        " holds a sweep for a different config; use a fresh --out");
  } else {
    write_manifest(out_dir, lc.effective, command);
  }

  const SlotExposureModel q = exposure_model(cfg);
  const std::vector<Request> stream = acquire_stream(cfg, log_path, q);
  if (stream.empty()) throw DataError("sweep: request stream is empty");

  SweepOptions sopt;
  sopt.m_star = cfg.m_star;
  sopt.calibration_requests = cfg.calibration_requests;
  sopt.gamma = cfg.gamma;
  sopt.window_size = cfg.window;
  sopt.gap_decay = cfg.gap_decay;
  sopt.user_seed = cfg.run_seed;
  sopt.jobs = cfg.jobs;
  sopt.search.beam_size = cfg.beam;
  sopt.fixed_positions = cfg.fixed_positions;

  // Fixed reference: computed once, cached at full precision.
  const fs::path ref_path = cells_dir / "reference.json";
  RunMetrics ref;
  if (fs::exists(ref_path)) {
    try {
      ref = metrics_from_json(json::parse(read_text(ref_path)).at("metrics"));
    } catch (const json::exception& e) {
      throw DataError("unreadable sweep reference " + ref_path.string() + ": " + e.what());
    }
    out << "sweep reference: cached\n";
  } else {
    const SweepRow row =
        run_sweep_cell(stream, StrategyKind::kFixed, 0, cfg.alphas.front(), q, sopt, nullptr);
    ref = row.metrics;
    write_text(ref_path, json{{"metrics", metrics_to_json(ref)}}.dump(2) + "\n");
    out << "sweep reference: done\n";
  }

  std::vector<std::string> lines;
  for (const std::string& name : cfg.sweep_strategies) {
    const StrategyKind kind = parse_strategy(name);
    const std::vector<int> beam_grid =
        kind == StrategyKind::kHca2e ? cfg.beams : std::vector<int>{0};
    for (int beam : beam_grid) {
      for (double alpha : cfg.alphas) {
        if (kind == StrategyKind::kFixed) {
          SweepRow row;
          row.strategy = to_string(kind);
          row.alpha = alpha;
          row.m_star = cfg.m_star;
          row.metrics = ref;
          lines.push_back(metrics_row_line(row));
          continue;
        }
        const std::string key = cell_key(kind, beam, alpha);
        const fs::path cell_path = cells_dir / (key + ".tsv");
        std::string line;
        if (fs::exists(cell_path)) {
          const std::string cached = read_text(cell_path);
          const std::size_t nl = cached.find('\n');
          line = nl == std::string::npos ? cached : cached.substr(0, nl);
        }
        if (line.empty()) {
          const SweepRow row = run_sweep_cell(stream, kind, beam, alpha, q, sopt, &ref);
          line = metrics_row_line(row);
          write_text(cell_path, line + "\n");
          out << "sweep cell " << key << ": done\n";
        } else {
          out << "sweep cell " << key << ": cached\n";
        }
        lines.push_back(line);
      }
    }
  }

  std::ostringstream table;
  const auto& header = metrics_table_header();
  for (std::size_t i = 0; i < header.size(); ++i)
    table << header[i] << (i + 1 < header.size() ? '\t' : '\n');
  for (const std::string& line : lines) table << line << '\n';
  write_text(fs::path(out_dir) / "sweep.tsv", table.str());
  out << "sweep: wrote " << lines.size() << " rows to "
      << (fs::path(out_dir) / "sweep.tsv").string() << "\n";
}

// ------------------------------- report -------------------------------

inline std::string render_aligned(const std::vector<std::string>& header,
                                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  std::ostringstream s;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string& cell = i < cells.size() ? cells[i] : std::string();
      s << cell << std::string(width[i] - cell.size(), ' ')
        << (i + 1 < width.size() ? "  " : "");
    }
    s << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return s.str();
}

inline void select_columns(const TableData& table, const std::vector<std::string>& names,
                           std::vector<std::string>& header_out,
                           std::vector<std::vector<std::string>>& rows_out,
                           const std::string& path) {
  std::vector<int> idx;
  for (const std::string& name : names) {
    const int i = table.column(name);
    if (i < 0) throw DataError(path + ": missing column '" + name + "'");
    idx.push_back(i);
  }
  header_out = names;
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    for (int i : idx)
      cells.push_back(static_cast<std::size_t>(i) < row.size() ? row[static_cast<std::size_t>(i)]
                                                               : std::string());
    rows_out.push_back(std::move(cells));
  }
}

inline std::vector<fs::path> list_matching(const fs::path& dir, const std::string& prefix,
                                           const std::string& suffix) {
  std::vector<fs::path> found;
  if (!fs::exists(dir)) return found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > prefix.size() + suffix.size() && name.rfind(prefix, 0) == 0 &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      found.push_back(entry.path());
  }
  std::sort(found.begin(), found.end());
  return found;
}

inline void cmd_report(const std::string& in_dir, const std::string& out_dir,
                       std::ostream& out) {
  const fs::path in(in_dir);
  const fs::path sweep_path = in / "sweep.tsv";
  const fs::path metrics_path = in / "metrics.tsv";
  fs::path table_path;
  if (fs::exists(sweep_path)) {
    table_path = sweep_path;
  } else if (fs::exists(metrics_path)) {
    table_path = metrics_path;
  } else {
    throw DataError("no metrics found: looked for " + sweep_path.string() + " and " +
                    metrics_path.string());
  }

  std::ostringstream report;
  const TableData table = read_table(table_path.string());

  // Strategy comparison with advantage columns against fixed placement.
  {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    select_columns(table,
                   {"strategy", "alpha", "beam", "m_star", "revenue", "gmv", "ctr",
                    "realized_m", "d_rev_pct", "d_gmv_pct", "d_clk_pct", "d_ctr_pct"},
                   header, rows, table_path.string());
    report << "== strategy comparison vs fixed placement (" << table_path.string() << ") ==\n"
           << render_aligned(header, rows) << "\n";
  }

  // Where ads landed on the page.
  for (const fs::path& path : list_matching(in, "histogram-", ".tsv")) {
    const TableData hist = read_table(path.string());
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    select_columns(hist, {"start_slot", "end_slot", "count", "share"}, header, rows,
                   path.string());
    std::vector<std::vector<std::string>> rendered;
    for (const auto& row : rows) {
      const double share = std::strtod(row[3].c_str(), nullptr);
      const int bar = static_cast<int>(share * 40.0 + 0.5);
      rendered.push_back({row[0] + "-" + row[1], row[2], row[3],
                          std::string(static_cast<std::size_t>(std::max(bar, 0)), '#')});
    }
    report << "== ad position distribution: " << path.filename().string() << " ==\n"
           << render_aligned({"slots", "count", "share", ""}, rendered) << "\n";
  }

  // Ad-share deviation from target, window by window.
  double m_star = 0.0;
  {
    const int col = table.column("m_star");
    if (col >= 0 && !table.rows.empty())
      m_star = std::strtod(table.rows.front()[static_cast<std::size_t>(col)].c_str(), nullptr);
  }
  for (const fs::path& path : list_matching(in, "windows-", ".tsv")) {
    const TableData wins = read_table(path.string());
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    select_columns(wins, {"window_index", "realized_m", "rho_before", "rho_after"}, header,
                   rows, path.string());
    std::vector<std::vector<std::string>> rendered;
    double sum_abs = 0.0, max_abs = 0.0;
    for (const auto& row : rows) {
      const double m = std::strtod(row[1].c_str(), nullptr);
      const double rel = m_star > 0.0 ? (m - m_star) / m_star * 100.0 : 0.0;
      sum_abs += std::abs(rel);
      max_abs = std::max(max_abs, std::abs(rel));
      rendered.push_back({row[0], row[1], detail::fmt_double(rel, 3), row[3]});
    }
    report << "== ad share deviation by window: " << path.filename().string()
           << " (target m_star=" << detail::fmt_double(m_star, 4) << ") ==\n"
           << render_aligned({"window", "realized_m", "rel_dev_pct", "rho_after"}, rendered);
    if (!rendered.empty())
      report << "summary: windows=" << rendered.size()
             << " mean|rel_dev|=" << detail::fmt_double(sum_abs / rendered.size(), 3)
             << "% max|rel_dev|=" << detail::fmt_double(max_abs, 3) << "%\n";
    report << "\n";
  }

  out << report.str();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "report.txt", report.str());
  }
}

}  // namespace clidetail

// Parse and dispatch one CLI invocation; args exclude the program name.
// Exit codes: 0 success, 2 configuration/usage error, 3 data error.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"synthetic feed ad-placement benchmark: stream generation, strategy runs, "
               "trade-off sweeps, reports"};
  app.name("adex");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::string in_dir;
  std::string log_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool no_events = false;

  auto add_common = [&](CLI::App* sub, bool with_log, bool out_required) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--set", sets, "override a config key (key=value, repeatable)");
    auto* o = sub->add_option("--out", out_dir, "output directory");
    if (out_required) o->required();
    sub->add_option("--seed", seed, "shorthand for generator.seed and run.seed");
    sub->add_option("--jobs", jobs, "worker threads (shorthand for run.jobs)");
    if (with_log)
      sub->add_option("--log", log_path,
                      "request log to replay (generated in memory when absent)");
  };

  CLI::App* generate = app.add_subcommand("generate", "generate a synthetic request log");
  add_common(generate, /*with_log=*/false, /*out_required=*/true);

  CLI::App* run = app.add_subcommand(
      "run", "replay a stream under one or more placement strategies");
  add_common(run, /*with_log=*/true, /*out_required=*/true);
  run->add_flag("--no-events", no_events, "skip the per-request event log");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "alpha x strategy x beam grid sweep with resumable cells");
  add_common(sweep, /*with_log=*/true, /*out_required=*/true);

  CLI::App* report =
      app.add_subcommand("report", "render tables from a run or sweep directory");
  report->add_option("--in", in_dir, "run or sweep output directory")->required();
  report->add_option("--out", out_dir, "directory for report.txt (optional)");

  const std::string command = clidetail::join_command(args);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    if (sub == report) {
      clidetail::cmd_report(in_dir, out_dir, out);
      return 0;
    }

    std::vector<std::string> effective_sets = sets;
    if (sub->count("--seed")) {
      effective_sets.push_back("generator.seed=" + std::to_string(seed));
      effective_sets.push_back("run.seed=" + std::to_string(seed));
    }
    if (sub->count("--jobs"))
      effective_sets.push_back("run.jobs=" + std::to_string(jobs));
    const LoadedConfig lc = load_config(config_path, effective_sets);
    if (sub == generate) {
      clidetail::cmd_generate(lc, out_dir, command, out);
    } else if (sub == run) {
      clidetail::cmd_run(lc, log_path, out_dir, !no_events, command, out);
    } else {
      clidetail::cmd_sweep(lc, log_path, out_dir, command, out);
    }
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(std::move(args));
}

}  // namespace adex
