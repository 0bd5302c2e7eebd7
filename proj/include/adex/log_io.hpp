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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adex/controller.hpp"
#include "adex/core.hpp"
#include "adex/metrics.hpp"
#include "adex/runner.hpp"
#include "adex/user_model.hpp"

namespace adex {

using json = nlohmann::json;

inline constexpr int kRequestLogSchemaVersion = 1;

// FNV-1a, 64-bit: stable content hash for manifests and byte comparisons.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char byte : data) {
    h ^= byte;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

// ---------------------------- request logs ----------------------------
//
// One request per line.  Candidate lists are stored as parallel arrays under
// "rec" and "ads"; organic-only fields that are zero by definition
// (utility_ad, price_per_click) are not stored for organics.

namespace detail {

template <typename T>
json field_array(const std::vector<Candidate>& items, T Candidate::*member) {
  json arr = json::array();
  for (const Candidate& c : items) arr.push_back(c.*member);
  return arr;
}

inline json candidate_block(const std::vector<Candidate>& items, bool ads) {
  json block;
  block["id"] = field_array(items, &Candidate::id);
  block["rank"] = field_array(items, &Candidate::upstream_rank);
  block["utility_rec"] = field_array(items, &Candidate::utility_rec);
  block["pctr"] = field_array(items, &Candidate::pctr);
  block["pcvr"] = field_array(items, &Candidate::pcvr);
  block["item_price"] = field_array(items, &Candidate::item_price);
  if (ads) {
    block["utility_ad"] = field_array(items, &Candidate::utility_ad);
    block["price_per_click"] = field_array(items, &Candidate::price_per_click);
  }
  return block;
}

inline void require(bool ok, std::uint64_t lineno, const std::string& what) {
  if (!ok)
    throw DataError("request log line " + std::to_string(lineno) + ": " + what);
}

inline std::vector<Candidate> parse_candidates(const json& block, bool ads,
                                               std::uint64_t lineno) {
  require(block.is_object(), lineno, "candidate block must be an object");
  const char* required[] = {"id", "rank", "utility_rec", "pctr", "pcvr", "item_price"};
  for (const char* key : required)
    require(block.contains(key) && block[key].is_array(), lineno,
            std::string("candidate block missing array '") + key + "'");
  const std::size_t n = block["id"].size();
  for (auto it = block.begin(); it != block.end(); ++it)
    require(it.value().is_array() && it.value().size() == n, lineno,
            "candidate arrays must have equal length");
  if (ads) {
    require(block.contains("utility_ad") && block.contains("price_per_click"), lineno,
            "ad block missing utility_ad/price_per_click");
  } else {
    require(!block.contains("utility_ad") && !block.contains("price_per_click"), lineno,
            "organic block must not carry ad-side fields");
  }

  std::vector<Candidate> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    Candidate& c = items[i];
    c.kind = ads ? ItemKind::kAd : ItemKind::kOrganic;
    c.id = block["id"][i].get<std::string>();
    c.upstream_rank = block["rank"][i].get<int>();
    c.utility_rec = block["utility_rec"][i].get<double>();
    c.pctr = block["pctr"][i].get<double>();
    c.pcvr = block["pcvr"][i].get<double>();
    c.item_price = block["item_price"][i].get<double>();
    if (ads) {
      c.utility_ad = block["utility_ad"][i].get<double>();
      c.price_per_click = block["price_per_click"][i].get<double>();
    }
    require(c.upstream_rank == static_cast<int>(i) + 1, lineno,
            "ranks must be contiguous 1..n");
    require(c.pctr >= 0.0 && c.pctr <= 1.0, lineno, "pctr outside [0, 1]");
    require(c.pcvr >= 0.0 && c.pcvr <= 1.0, lineno, "pcvr outside [0, 1]");
    require(c.item_price >= 0.0 && c.utility_rec >= 0.0 && c.utility_ad >= 0.0 &&
                c.price_per_click >= 0.0,
            lineno, "prices and utilities must be >= 0");
  }
  return items;
}

}  // namespace detail

inline json request_to_json(const Request& r) {
  json line;
  line["schema_version"] = kRequestLogSchemaVersion;
  line["id"] = r.id;
  line["constraints"] = {{"page_length", r.constraints.page_length},
                         {"top_ad_slot", r.constraints.top_ad_slot},
                         {"min_ad_gap", r.constraints.min_ad_gap}};
  line["rec"] = detail::candidate_block(r.rec_list, /*ads=*/false);
  line["ads"] = detail::candidate_block(r.ad_list, /*ads=*/true);
  return line;
}

inline Request request_from_json(const json& line, std::uint64_t lineno) {
  detail::require(line.is_object(), lineno, "record must be an object");
  detail::require(line.contains("schema_version"), lineno, "missing schema_version");
  const int version = line["schema_version"].get<int>();
  detail::require(version == kRequestLogSchemaVersion, lineno,
                  "unsupported schema_version " + std::to_string(version));
  for (const char* key : {"id", "constraints", "rec", "ads"})
    detail::require(line.contains(key), lineno, std::string("missing field '") + key + "'");

  Request r;
  r.id = line["id"].get<std::string>();
  const json& c = line["constraints"];
  for (const char* key : {"page_length", "top_ad_slot", "min_ad_gap"})
    detail::require(c.contains(key), lineno, std::string("constraints missing '") + key + "'");
  r.constraints.page_length = c["page_length"].get<int>();
  r.constraints.top_ad_slot = c["top_ad_slot"].get<int>();
  r.constraints.min_ad_gap = c["min_ad_gap"].get<int>();
  detail::require(r.constraints.page_length >= 1, lineno, "page_length must be >= 1");
  detail::require(r.constraints.top_ad_slot >= 1, lineno, "top_ad_slot must be >= 1");
  detail::require(r.constraints.min_ad_gap >= 0, lineno, "min_ad_gap must be >= 0");
  r.rec_list = detail::parse_candidates(line["rec"], /*ads=*/false, lineno);
  r.ad_list = detail::parse_candidates(line["ads"], /*ads=*/true, lineno);
  detail::require(static_cast<int>(r.rec_list.size()) >= r.constraints.page_length, lineno,
                  "rec list shorter than page_length");
  return r;
}

inline void write_request_log(const std::string& path, const std::vector<Request>& stream) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const Request& r : stream) out << request_to_json(r).dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

inline std::vector<Request> read_request_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open request log: " + path);
  std::vector<Request> stream;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("request log line " + std::to_string(lineno) +
                      ": malformed record (" + e.what() + ")");
    }
    stream.push_back(request_from_json(parsed, lineno));
  }
  return stream;
}

// ----------------------------- event logs -----------------------------

inline json event_to_json(std::uint64_t index, const Request& r, const MergedPage& page,
                          const UserEvent& ev) {
  json clicks = json::array();
  for (const ClickEvent& c : ev.clicks)
    clicks.push_back({{"slot", c.slot1}, {"ad", c.is_ad}, {"price", c.price_per_click}});
  json convs = json::array();
  for (const ConversionEvent& c : ev.conversions)
    convs.push_back({{"slot", c.slot1}, {"price", c.item_price}});
  return json{{"index", index},
              {"request_id", r.id},
              {"template", to_string(page.tmpl)},
              {"depth", ev.scroll_depth},
              {"ad_exposures", ev.ad_exposures},
              {"clicks", clicks},
              {"conversions", convs},
              {"revenue", ev.revenue},
              {"gmv", ev.gmv}};
}

// ------------------------------- tables -------------------------------

namespace detail {

inline std::string fmt_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return std::string(buf);
}

inline std::string fmt_general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::string(buf);
}

}  // namespace detail

inline const std::vector<std::string>& metrics_table_header() {
  static const std::vector<std::string> header = {
      "strategy",     "alpha",      "beam",       "m_star",         "revenue",
      "gmv",          "clicks",     "ctr",        "expected_m",     "realized_m",
      "avg_ad_position", "d_rev_pct", "d_gmv_pct", "d_clk_pct",     "d_ctr_pct",
      "requests",     "conversions", "calibrated_beta", "initial_rho"};
  return header;
}

inline std::string metrics_row_line(const SweepRow& row) {
  const RunMetrics& m = row.metrics;
  std::ostringstream out;
  out << row.strategy << '\t' << detail::fmt_double(row.alpha, 3) << '\t' << row.beam << '\t'
      << detail::fmt_double(row.m_star, 4) << '\t' << detail::fmt_double(m.revenue, 4) << '\t'
      << detail::fmt_double(m.gmv, 4) << '\t' << m.clicks << '\t'
      << detail::fmt_double(m.ctr(), 6) << '\t' << detail::fmt_double(m.expected_m(), 6)
      << '\t' << detail::fmt_double(m.realized_m(), 6) << '\t'
      << detail::fmt_double(m.avg_ad_position(), 4) << '\t'
      << detail::fmt_double(row.d_rev, 4) << '\t' << detail::fmt_double(row.d_gmv, 4) << '\t'
      << detail::fmt_double(row.d_clk, 4) << '\t' << detail::fmt_double(row.d_ctr, 4) << '\t'
      << m.requests << '\t' << m.conversions << '\t'
      << detail::fmt_general(row.calibrated_beta) << '\t'
      << detail::fmt_general(row.initial_rho);
  return out.str();
}

inline void write_metrics_table(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  const auto& header = metrics_table_header();
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? '\t' : '\n');
  for (const SweepRow& row : rows) out << metrics_row_line(row) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

// Generic tab-separated table with a header row, the parse-side twin of
// write_metrics_table (the report command renders from strings).
struct TableData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline TableData read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open table: " + path);
  TableData table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', pos);
      cells.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

// ---------------------------- window reports ----------------------------

inline void write_window_reports(const std::string& path,
                                 const std::vector<WindowReport>& windows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "window_index\trealized_m\trho_before\trho_after\n";
  for (const WindowReport& w : windows)
    out << w.window_index << '\t' << detail::fmt_double(w.realized_m, 6) << '\t'
        << detail::fmt_general(w.rho_before) << '\t' << detail::fmt_general(w.rho_after)
        << '\n';
  if (!out) throw DataError("write failed: " + path);
}

// ----------------------------- histograms -----------------------------

inline void write_histogram(const std::string& path,
                            const std::vector<HistogramBucket>& buckets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << "start_slot\tend_slot\tcount\tshare\n";
  for (const HistogramBucket& b : buckets)
    out << b.start_slot << '\t' << b.end_slot << '\t' << b.count << '\t'
        << detail::fmt_double(b.share, 6) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

// ------------------------------ manifests ------------------------------

inline void write_manifest(const std::string& dir, const json& effective_config,
                           const std::string& command) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = effective_config;
  manifest["config_hash"] = fnv1a64_hex(effective_config.dump());
  std::ofstream out((std::filesystem::path(dir) / "manifest.json").string(),
                    std::ios::binary);
  if (!out) throw DataError("cannot write manifest in: " + dir);
  out << manifest.dump(2) << '\n';
}

}  // namespace adex
