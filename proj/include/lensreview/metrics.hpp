// Copyright 2026 The lensreview Authors
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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lensreview/finding.hpp"
#include "lensreview/ingest.hpp"
#include "lensreview/match.hpp"

namespace lensreview {

inline constexpr double kZ95 = 1.96;
inline constexpr int kMetricsSchemaVersion = 1;

/// Wilson score interval, clamped to [0, 1]. Throws ZeroDenominator for n = 0
/// and std::invalid_argument for successes > n or z <= 0.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n, double z = kZ95);

struct RateWithCI {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 1;
    double rate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double z = kZ95;

    friend bool operator==(const RateWithCI&, const RateWithCI&) = default;
};

/// Empty when the denominator is zero.
std::optional<RateWithCI> make_rate(std::uint64_t numerator, std::uint64_t denominator, double z = kZ95);

struct MetricsReport {
    std::size_t prs = 0;
    Tally totals;
    std::optional<RateWithCI> convergence;  // convergence / human
    std::optional<RateWithCI> unique;       // unique / dispo
    std::optional<RateWithCI> miss;         // miss / human
    std::optional<RateWithCI> fp;           // false_positive / dispo
    std::optional<RateWithCI> matched;      // matched / dispo

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport metrics_from_tally(const Tally& t, std::size_t prs, double z = kZ95);

/// Totals come from the records; `runs` supplies the PR count.
MetricsReport overall_metrics(const std::vector<MatchRecord>& records, const std::vector<ReviewRun>& runs,
                              double z = kZ95);

struct LensBreakdown {
    std::size_t total = 0;
    std::size_t matched = 0;
    std::size_t unique = 0;
    std::optional<double> unique_rate;

    friend bool operator==(const LensBreakdown&, const LensBreakdown&) = default;
};

/// Lens of each dispo-side record, looked up in the runs by PR and finding id.
std::map<Source, LensBreakdown> per_disposition_breakdown(const std::vector<MatchRecord>& records,
                                                          const std::vector<ReviewRun>& runs);

enum class Dimension { repository, era, visibility, language, depth_bin };

std::string_view to_string(Dimension d);
std::optional<Dimension> dimension_from_string(std::string_view s);

struct PrMeta {
    std::string repo;
    std::string language;
    Era era = Era::post_ai;
    Visibility visibility = Visibility::public_repo;
};

/// "light" (<= 3 substantive human findings), "medium" (4-9), "heavy" (>= 10).
std::string_view depth_bin(std::size_t human_findings);

/// Per-stratum reports; PRs without metadata fall under "unknown".
std::map<std::string, MetricsReport> stratify(const std::vector<MatchRecord>& records,
                                              const std::vector<ReviewRun>& runs, Dimension dimension,
                                              const std::map<PrKey, PrMeta>& meta, double z = kZ95);

struct KappaResult {
    double kappa = 0.0;
    // Both raters used one identical label; kappa is undefined and reported as 1.
    bool degenerate_marginals = false;
};

/// Throws std::invalid_argument on empty or unequal-length input.
KappaResult cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Smallest n with z * sqrt(p (1 - p) / n) <= half_width.
std::uint64_t required_sample_size(double p, double half_width, double z = kZ95);

/// "46.0%" style, one decimal.
std::string format_percent(double fraction);

void to_json(json& j, const RateWithCI& r);
void from_json(const json& j, RateWithCI& r);
void to_json(json& j, const Tally& t);
void from_json(const json& j, Tally& t);
void to_json(json& j, const MetricsReport& m);
void from_json(const json& j, MetricsReport& m);
void to_json(json& j, const LensBreakdown& b);

}  // namespace lensreview
