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

#include "lensreview/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "lensreview/error.hpp"

namespace lensreview {

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t n, double z) {
    if (n == 0) throw ZeroDenominator("wilson interval with n = 0");
    if (successes > n) throw std::invalid_argument("wilson interval: successes exceed n");
    if (!(z > 0.0)) throw std::invalid_argument("wilson interval: z must be positive");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    double low = std::clamp(center - half, 0.0, 1.0);
    double high = std::clamp(center + half, 0.0, 1.0);
    if (successes == 0) low = 0.0;
    if (successes == n) high = 1.0;
    return {low, high};
}

std::optional<RateWithCI> make_rate(std::uint64_t numerator, std::uint64_t denominator, double z) {
    if (denominator == 0) return std::nullopt;
    auto [lo, hi] = wilson_interval(numerator, denominator, z);
    RateWithCI r;
    r.numerator = numerator;
    r.denominator = denominator;
    r.rate = static_cast<double>(numerator) / static_cast<double>(denominator);
    r.ci_low = std::min(lo, r.rate);
    r.ci_high = std::max(hi, r.rate);
    r.z = z;
    return r;
}

MetricsReport metrics_from_tally(const Tally& t, std::size_t prs, double z) {
    MetricsReport m;
    m.prs = prs;
    m.totals = t;
    m.convergence = make_rate(t.convergence, t.human, z);
    m.unique = make_rate(t.unique, t.dispo, z);
    m.miss = make_rate(t.miss, t.human, z);
    m.fp = make_rate(t.false_positive, t.dispo, z);
    m.matched = make_rate(t.matched, t.dispo, z);
    return m;
}

MetricsReport overall_metrics(const std::vector<MatchRecord>& records, const std::vector<ReviewRun>& runs, double z) {
    std::set<PrKey> prs;
    for (const auto& r : runs) prs.insert(r.pr);
    return metrics_from_tally(tally(records), prs.size(), z);
}

std::map<Source, LensBreakdown> per_disposition_breakdown(const std::vector<MatchRecord>& records,
                                                          const std::vector<ReviewRun>& runs) {
    std::map<std::pair<PrKey, std::string>, Source> lens_of;
    for (const auto& run : runs) {
        if (run.condition != Condition::disposition) continue;
        for (const auto& f : run.findings) lens_of[{run.pr, f.id}] = f.source;
    }
    std::map<Source, LensBreakdown> out;
    for (auto s : kReviewerLenses) out[s];
    for (const auto& r : records) {
        if (r.side != RecordSide::dispo) continue;
        auto it = lens_of.find({r.pr, r.left_id});
        if (it == lens_of.end()) throw Error("no run holds " + r.pr.str() + " " + r.left_id);
        auto& b = out[it->second];
        ++b.total;
        if (r.classification == Classification::convergence) ++b.matched;
        else ++b.unique;
    }
    for (auto& [s, b] : out) {
        if (b.total) b.unique_rate = static_cast<double>(b.unique) / static_cast<double>(b.total);
    }
    return out;
}

namespace {
constexpr std::pair<Dimension, std::string_view> kDimNames[] = {
    {Dimension::repository, "repository"}, {Dimension::era, "era"},         {Dimension::visibility, "visibility"},
    {Dimension::language, "language"},     {Dimension::depth_bin, "depth_bin"}};
}  // namespace

std::string_view to_string(Dimension d) {
    for (const auto& [k, v] : kDimNames) {
        if (k == d) return v;
    }
    return "repository";
}

std::optional<Dimension> dimension_from_string(std::string_view s) {
    for (const auto& [k, v] : kDimNames) {
        if (v == s) return k;
    }
    return std::nullopt;
}

std::string_view depth_bin(std::size_t human_findings) {
    if (human_findings <= 3) return "light";
    if (human_findings <= 9) return "medium";
    return "heavy";
}

std::map<std::string, MetricsReport> stratify(const std::vector<MatchRecord>& records,
                                              const std::vector<ReviewRun>& runs, Dimension dimension,
                                              const std::map<PrKey, PrMeta>& meta, double z) {
    std::set<PrKey> prs;
    for (const auto& r : runs) prs.insert(r.pr);
    std::map<PrKey, std::size_t> human_count;
    std::map<PrKey, Tally> per_pr;
    for (const auto& r : records) {
        prs.insert(r.pr);
        if (r.side == RecordSide::human) ++human_count[r.pr];
    }
    for (const auto& pr : prs) per_pr[pr];
    {
        std::map<PrKey, std::vector<MatchRecord>> grouped;
        for (const auto& r : records) grouped[r.pr].push_back(r);
        for (const auto& [pr, rs] : grouped) per_pr[pr] = tally(rs);
    }

    auto key_of = [&](const PrKey& pr) -> std::string {
        if (dimension == Dimension::depth_bin) return std::string(depth_bin(human_count[pr]));
        auto it = meta.find(pr);
        if (it == meta.end()) return dimension == Dimension::repository ? pr.repo : "unknown";
        switch (dimension) {
            case Dimension::repository: return it->second.repo;
            case Dimension::era: return std::string(to_string(it->second.era));
            case Dimension::visibility: return std::string(to_string(it->second.visibility));
            case Dimension::language: return it->second.language;
            case Dimension::depth_bin: break;
        }
        return "unknown";
    };

    std::map<std::string, std::pair<Tally, std::size_t>> acc;
    for (const auto& [pr, t] : per_pr) {
        auto& slot = acc[key_of(pr)];
        slot.first += t;
        ++slot.second;
    }
    std::map<std::string, MetricsReport> out;
    for (const auto& [k, v] : acc) out[k] = metrics_from_tally(v.first, v.second, z);
    return out;
}

KappaResult cohen_kappa(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || a.size() != b.size()) {
        throw std::invalid_argument("cohen_kappa needs two non-empty label sequences of equal length");
    }
    const double n = static_cast<double>(a.size());
    std::map<std::string, double> ca, cb;
    double agree = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1;
        cb[b[i]] += 1;
        if (a[i] == b[i]) agree += 1;
    }
    double pe = 0;
    for (const auto& [label, count] : ca) {
        auto it = cb.find(label);
        if (it != cb.end()) pe += (count / n) * (it->second / n);
    }
    const double po = agree / n;
    if (ca.size() == 1 && cb.size() == 1 && ca.begin()->first == cb.begin()->first) {
        return KappaResult{1.0, true};
    }
    return KappaResult{(po - pe) / (1.0 - pe), false};
}

std::uint64_t required_sample_size(double p, double half_width, double z) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("required_sample_size: p must lie in (0, 1)");
    if (!(half_width > 0.0)) throw std::invalid_argument("required_sample_size: half_width must be positive");
    if (!(z > 0.0)) throw std::invalid_argument("required_sample_size: z must be positive");
    const double var = p * (1.0 - p);
    // Relative slack absorbs rounding in inputs such as half_width = 0.5 * 1.96.
    auto ok = [&](std::uint64_t n) { return z * std::sqrt(var / static_cast<double>(n)) <= half_width * (1 + 1e-12); };
    auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(z * z * var / (half_width * half_width))));
    while (n > 1 && ok(n - 1)) --n;
    while (!ok(n)) ++n;
    return n;
}

std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
    return buf;
}

void to_json(json& j, const RateWithCI& r) {
    j = json{{"numerator", r.numerator}, {"denominator", r.denominator}, {"rate", r.rate},
             {"ci_low", r.ci_low},       {"ci_high", r.ci_high},         {"z", r.z}};
}

void from_json(const json& j, RateWithCI& r) {
    r.numerator = j.at("numerator").get<std::uint64_t>();
    r.denominator = j.at("denominator").get<std::uint64_t>();
    r.rate = j.at("rate").get<double>();
    r.ci_low = j.at("ci_low").get<double>();
    r.ci_high = j.at("ci_high").get<double>();
    r.z = j.at("z").get<double>();
}

void to_json(json& j, const Tally& t) {
    j = json{{"dispo_findings", t.dispo},   {"human_findings", t.human}, {"convergence", t.convergence},
             {"matched", t.matched},        {"unique", t.unique},        {"miss", t.miss},
             {"false_positive", t.false_positive}, {"excluded_style", t.excluded_style}};
}

void from_json(const json& j, Tally& t) {
    t.dispo = j.at("dispo_findings").get<std::size_t>();
    t.human = j.at("human_findings").get<std::size_t>();
    t.convergence = j.at("convergence").get<std::size_t>();
    t.matched = j.at("matched").get<std::size_t>();
    t.unique = j.at("unique").get<std::size_t>();
    t.miss = j.at("miss").get<std::size_t>();
    t.false_positive = j.at("false_positive").get<std::size_t>();
    t.excluded_style = j.at("excluded_style").get<std::size_t>();
}

namespace {
json opt_rate(const std::optional<RateWithCI>& r) { return r ? json(*r) : json(nullptr); }
std::optional<RateWithCI> rate_from(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<RateWithCI>();
}
}  // namespace

void to_json(json& j, const MetricsReport& m) {
    j = json{{"schema_version", kMetricsSchemaVersion},
             {"prs", m.prs},
             {"totals", m.totals},
             {"rates",
              {{"convergence", opt_rate(m.convergence)},
               {"unique", opt_rate(m.unique)},
               {"miss", opt_rate(m.miss)},
               {"fp", opt_rate(m.fp)},
               {"matched", opt_rate(m.matched)}}}};
}

void from_json(const json& j, MetricsReport& m) {
    m = MetricsReport{};
    m.prs = j.at("prs").get<std::size_t>();
    m.totals = j.at("totals").get<Tally>();
    const auto& r = j.at("rates");
    m.convergence = rate_from(r, "convergence");
    m.unique = rate_from(r, "unique");
    m.miss = rate_from(r, "miss");
    m.fp = rate_from(r, "fp");
    m.matched = rate_from(r, "matched");
}

void to_json(json& j, const LensBreakdown& b) {
    j = json{{"total", b.total},
             {"matched", b.matched},
             {"unique", b.unique},
             {"unique_rate", b.unique_rate ? json(*b.unique_rate) : json(nullptr)}};
}

}  // namespace lensreview
