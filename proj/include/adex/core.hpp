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
#include <stdexcept>
#include <string>
#include <vector>

namespace adex {

// Error taxonomy.  The CLI maps ConfigError to exit code 2 and DataError to
// exit code 3; everything else is a plain failure.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

enum class ItemKind : std::uint8_t { kOrganic = 0, kAd = 1 };

// One rankable item (organic recommendation or ad).  Utilities are expected
// per-exposure quantities; prices are monetary.
struct Candidate {
  std::string id;
  ItemKind kind = ItemKind::kOrganic;
  int upstream_rank = 0;        // 1-based rank inside its source list
  double utility_rec = 0.0;     // recommendation-side expected utility
  double utility_ad = 0.0;      // advertising-side expected utility; 0 for organics
  double pctr = 0.0;            // predicted click-through rate, in [0, 1]
  double pcvr = 0.0;            // predicted conversion rate given click, in [0, 1]
  double item_price = 0.0;      // order value on conversion
  double price_per_click = 0.0; // auction price; 0 for organics
};

// Per-request placement constraints.  Slot indices are 1-based everywhere
// they appear in configs, reports, and these fields.
struct RequestConstraints {
  int page_length = 50;  // L: slots on the page
  int top_ad_slot = 5;   // first slot allowed to carry an ad
  int min_ad_gap = 4;    // minimum index distance between adjacent ads
};

// One blending request: an organic list and an ad list, both already ranked
// by their upstream systems, plus the constraints to blend under.
struct Request {
  std::string id;
  std::vector<Candidate> rec_list;  // upstream order, rank 1..n
  std::vector<Candidate> ad_list;   // auction order, rank 1..k
  RequestConstraints constraints;
};

// Exposure template: one flag per slot, true = ad slot.  Storage is 0-based;
// the 1-based accessors below match the slot numbering used in constraints.
struct ExposureTemplate {
  std::vector<std::uint8_t> slots;

  ExposureTemplate() = default;
  explicit ExposureTemplate(std::vector<std::uint8_t> s) : slots(std::move(s)) {}

  static ExposureTemplate all_organic(int length) {
    return ExposureTemplate(std::vector<std::uint8_t>(static_cast<std::size_t>(length), 0));
  }

  int length() const { return static_cast<int>(slots.size()); }

  bool is_ad(int slot1) const { return slots[static_cast<std::size_t>(slot1 - 1)] != 0; }

  int ad_count() const {
    int n = 0;
    for (auto s : slots) n += (s != 0);
    return n;
  }

  // 1-based index of the first ad slot, or 0 if the template is all-organic.
  int first_ad_slot() const {
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i]) return static_cast<int>(i) + 1;
    return 0;
  }

  friend bool operator==(const ExposureTemplate& a, const ExposureTemplate& b) {
    return a.slots == b.slots;
  }
  friend bool operator!=(const ExposureTemplate& a, const ExposureTemplate& b) {
    return !(a == b);
  }
};

// Deterministic order used by every tie-break in the code base: templates are
// compared as slot sequences with organic (0) before ad (1).
inline bool lex_less(const ExposureTemplate& a, const ExposureTemplate& b) {
  return a.slots < b.slots;
}

inline std::string to_string(const ExposureTemplate& t) {
  std::string s;
  s.reserve(t.slots.size());
  for (auto v : t.slots) s.push_back(v ? '1' : '0');
  return s;
}

// Positional exposure model: q[l-1] is the probability that slot l is seen.
// Must be non-increasing in l and within [0, 1].
struct SlotExposureModel {
  std::vector<double> q;

  SlotExposureModel() = default;
  explicit SlotExposureModel(std::vector<double> probs) : q(std::move(probs)) {}

  // Geometric decay q_l = decay^(l-1), the default position model.
  static SlotExposureModel geometric(int length, double decay) {
    if (length < 1) throw ConfigError("exposure model: length must be >= 1");
    if (!(decay > 0.0) || decay > 1.0)
      throw ConfigError("exposure model: decay must be in (0, 1]");
    std::vector<double> probs(static_cast<std::size_t>(length));
    double v = 1.0;
    for (int l = 0; l < length; ++l) {
      probs[static_cast<std::size_t>(l)] = v;
      v *= decay;
    }
    return SlotExposureModel(std::move(probs));
  }

  int length() const { return static_cast<int>(q.size()); }

  // Expected exposures of a fully organic page: sum of all q_l.
  double total() const {
    double s = 0.0;
    for (double v : q) s += v;
    return s;
  }

  void validate() const {
    if (q.empty()) throw ConfigError("exposure model: q must be non-empty");
    double prev = 1.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (!(q[i] >= 0.0) || q[i] > 1.0)
        throw ConfigError("exposure model: q[" + std::to_string(i + 1) + "] outside [0, 1]");
      if (q[i] > prev)
        throw ConfigError("exposure model: q must be non-increasing (violated at slot " +
                          std::to_string(i + 1) + ")");
      prev = q[i];
    }
  }
};

// Template feasibility screen: length match, first ad not above top_ad_slot,
// adjacent ads at least min_ad_gap apart, and no more ads than available.
// The all-organic template is feasible under any constraints.
inline bool validate_template(const ExposureTemplate& t, const RequestConstraints& c,
                              int ads_available) {
  if (t.length() != c.page_length) return false;
  int ads = 0;
  int last_ad = 0;  // 1-based; 0 = none yet
  for (int l = 1; l <= c.page_length; ++l) {
    if (!t.is_ad(l)) continue;
    if (l < c.top_ad_slot) return false;
    if (last_ad != 0 && l - last_ad < c.min_ad_gap) return false;
    last_ad = l;
    if (++ads > ads_available) return false;
  }
  return true;
}

// A blended page.  Holds non-owning views into the request's candidate lists;
// the request must outlive the page.
struct MergedPage {
  ExposureTemplate tmpl;
  std::vector<const Candidate*> items;  // size L, slot order

  int length() const { return static_cast<int>(items.size()); }
};

// Rank-preserving merge: the k-th ad slot takes the k-th ad, the k-th organic
// slot takes the k-th organic.  Neither list is ever reordered and auction
// prices are untouched, so upstream guarantees survive blending.
inline MergedPage merge_rpp(const Request& r, const ExposureTemplate& t) {
  const int length = r.constraints.page_length;
  if (t.length() != length)
    throw DataError("merge: template length " + std::to_string(t.length()) +
                    " != page length " + std::to_string(length));
  if (!validate_template(t, r.constraints, static_cast<int>(r.ad_list.size())))
    throw DataError("merge: infeasible template " + to_string(t) + " for request " + r.id);
  const int organic_slots = length - t.ad_count();
  if (organic_slots > static_cast<int>(r.rec_list.size()))
    throw DataError("merge: request " + r.id + " has " +
                    std::to_string(r.rec_list.size()) + " organics for " +
                    std::to_string(organic_slots) + " organic slots");

  MergedPage page;
  page.tmpl = t;
  page.items.resize(static_cast<std::size_t>(length));
  std::size_t next_rec = 0, next_ad = 0;
  for (int l = 0; l < length; ++l) {
    if (t.slots[static_cast<std::size_t>(l)])
      page.items[static_cast<std::size_t>(l)] = &r.ad_list[next_ad++];
    else
      page.items[static_cast<std::size_t>(l)] = &r.rec_list[next_rec++];
  }
  return page;
}

}  // namespace adex
