#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "lensreview/error.hpp"
#include "lensreview/metrics.hpp"

using namespace lensreview;

namespace {

// Wilson bounds as the roots of (p - x)^2 = z^2 x (1 - x) / n.
std::pair<double, double> wilson_roots(double k, double n, double z) {
    double p = k / n, z2 = z * z;
    double a = 1 + z2 / n, b = -(2 * p + z2 / n), c = p * p;
    double disc = std::sqrt(b * b - 4 * a * c);
    return {(-b - disc) / (2 * a), (-b + disc) / (2 * a)};
}

MatchRecord rec(PrKey pr, RecordSide side, std::string id, Classification c) {
    MatchRecord r;
    r.pr = std::move(pr);
    r.side = side;
    r.left_id = std::move(id);
    r.classification = c;
    return r;
}

}  // namespace

TEST(Wilson, AgreesWithQuadraticRoots) {
    std::mt19937 rng(5);
    for (int i = 0; i < 500; ++i) {
        std::uint64_t n = 1 + rng() % 1000;
        std::uint64_t k = rng() % (n + 1);
        auto [lo, hi] = wilson_interval(k, n);
        auto [rlo, rhi] = wilson_roots(static_cast<double>(k), static_cast<double>(n), 1.96);
        EXPECT_NEAR(lo, std::max(0.0, rlo), 1e-9) << k << "/" << n;
        EXPECT_NEAR(hi, std::min(1.0, rhi), 1e-9) << k << "/" << n;
        EXPECT_LE(lo, static_cast<double>(k) / n);
        EXPECT_GE(hi, static_cast<double>(k) / n);
    }
}

TEST(Wilson, EdgesAndErrors) {
    EXPECT_EQ(wilson_interval(0, 10).first, 0.0);
    EXPECT_EQ(wilson_interval(10, 10).second, 1.0);
    EXPECT_THROW(wilson_interval(0, 0), ZeroDenominator);
    EXPECT_THROW(wilson_interval(3, 2), std::invalid_argument);
    EXPECT_THROW(wilson_interval(1, 2, 0.0), std::invalid_argument);
    EXPECT_FALSE(make_rate(1, 0));
    auto r = make_rate(1, 4);
    ASSERT_TRUE(r);
    EXPECT_DOUBLE_EQ(r->rate, 0.25);
}

TEST(Metrics, RatesFromTally) {
    Tally t;
    t.human = 10;
    t.convergence = 4;
    t.miss = 5;
    t.excluded_style = 1;
    t.dispo = 20;
    t.matched = 6;
    t.unique = 14;
    t.false_positive = 2;
    auto m = metrics_from_tally(t, 3);
    EXPECT_EQ(m.prs, 3u);
    EXPECT_DOUBLE_EQ(m.convergence->rate, 0.4);
    EXPECT_DOUBLE_EQ(m.miss->rate, 0.5);
    EXPECT_DOUBLE_EQ(m.unique->rate, 0.7);
    EXPECT_DOUBLE_EQ(m.fp->rate, 0.1);
    EXPECT_DOUBLE_EQ(m.matched->rate, 0.3);

    auto empty = metrics_from_tally(Tally{}, 0);
    EXPECT_FALSE(empty.convergence);
    EXPECT_FALSE(empty.unique);

    json j = m;
    EXPECT_EQ(j.get<MetricsReport>(), m);
    EXPECT_EQ(j["schema_version"], kMetricsSchemaVersion);
}

TEST(Metrics, PerDispositionAndStrata) {
    PrKey a{"org/a", 1}, b{"org/b", 2};
    ReviewRun ra, rb;
    ra.pr = a;
    rb.pr = b;
    Finding f1, f2;
    f1.id = "D-1";
    f1.source = Source::cynic;
    f2.id = "D-2";
    f2.source = Source::skeptic;
    ra.findings = {f1, f2};
    rb.findings = {f1};
    std::vector<MatchRecord> rs = {
        rec(a, RecordSide::human, "H-1", Classification::convergence),
        rec(a, RecordSide::dispo, "D-1", Classification::convergence),
        rec(a, RecordSide::dispo, "D-2", Classification::false_positive),
        rec(b, RecordSide::human, "H-1", Classification::miss),
        rec(b, RecordSide::dispo, "D-1", Classification::unique),
    };
    for (int i = 2; i <= 11; ++i) rs.push_back(rec(b, RecordSide::human, "H-" + std::to_string(i), Classification::miss));

    auto lens = per_disposition_breakdown(rs, {ra, rb});
    EXPECT_EQ(lens.size(), 4u);
    EXPECT_EQ(lens[Source::cynic].total, 2u);
    EXPECT_DOUBLE_EQ(*lens[Source::cynic].unique_rate, 0.5);
    EXPECT_DOUBLE_EQ(*lens[Source::skeptic].unique_rate, 1.0);
    EXPECT_FALSE(lens[Source::confucian].unique_rate);

    std::map<PrKey, PrMeta> meta{{a, {"org/a", "go", Era::pre_ai, Visibility::public_repo}}};
    auto by_lang = stratify(rs, {ra, rb}, Dimension::language, meta);
    EXPECT_EQ(by_lang.at("go").totals.human, 1u);
    EXPECT_EQ(by_lang.at("unknown").totals.human, 11u);
    auto by_depth = stratify(rs, {ra, rb}, Dimension::depth_bin, meta);
    EXPECT_EQ(by_depth.at("light").prs, 1u);
    EXPECT_EQ(by_depth.at("heavy").prs, 1u);
    auto by_repo = stratify(rs, {ra, rb}, Dimension::repository, meta);
    EXPECT_EQ(by_repo.count("org/b"), 1u);

    rs.push_back(rec(a, RecordSide::dispo, "D-9", Classification::unique));
    EXPECT_THROW(per_disposition_breakdown(rs, {ra, rb}), Error);
}

TEST(Metrics, DepthBins) {
    EXPECT_EQ(depth_bin(0), "light");
    EXPECT_EQ(depth_bin(3), "light");
    EXPECT_EQ(depth_bin(4), "medium");
    EXPECT_EQ(depth_bin(9), "medium");
    EXPECT_EQ(depth_bin(10), "heavy");
    EXPECT_EQ(dimension_from_string("era"), Dimension::era);
    EXPECT_FALSE(dimension_from_string("mood"));
}

TEST(Kappa, KnownValues) {
    auto k = cohen_kappa({"y", "y", "n", "n"}, {"y", "n", "n", "n"});
    EXPECT_DOUBLE_EQ(k.kappa, 0.5);
    EXPECT_FALSE(k.degenerate_marginals);
    EXPECT_DOUBLE_EQ(cohen_kappa({"a", "b"}, {"b", "a"}).kappa, -1.0);
    auto d = cohen_kappa({"x", "x"}, {"x", "x"});
    EXPECT_TRUE(d.degenerate_marginals);
    EXPECT_EQ(d.kappa, 1.0);
    EXPECT_THROW(cohen_kappa({}, {}), std::invalid_argument);
    EXPECT_THROW(cohen_kappa({"a"}, {"a", "b"}), std::invalid_argument);
}

TEST(SampleSize, SmallestSufficientN) {
    for (double p : {0.1, 0.3, 0.45, 0.5}) {
        for (double h : {0.03, 0.05, 0.07}) {
            auto n = required_sample_size(p, h);
            EXPECT_LE(1.96 * std::sqrt(p * (1 - p) / n), h + 1e-12);
            EXPECT_GT(1.96 * std::sqrt(p * (1 - p) / (n - 1)), h);
        }
    }
    EXPECT_EQ(required_sample_size(0.45, 0.07), 195u);
    EXPECT_THROW(required_sample_size(0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(required_sample_size(0.5, 0.0), std::invalid_argument);
}

TEST(Format, OneDecimalPercent) {
    EXPECT_EQ(format_percent(0.46), "46.0%");
    EXPECT_EQ(format_percent(451.0 / 601.0), "75.0%");
    EXPECT_EQ(format_percent(0.0), "0.0%");
}
