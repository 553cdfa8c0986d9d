#include <gtest/gtest.h>

#include <sstream>

#include "lensreview/cli.hpp"
#include "lensreview/error.hpp"
#include "test_support.hpp"

using namespace lensreview;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

const std::string kFixtures = LENSREVIEW_FIXTURE_DIR;

// Three PRs, two mock models, all paths absolute so the manifest can live anywhere.
json two_model_manifest() {
    auto j = json::parse(slurp(kFixtures + "/study2/manifest.json"));
    for (auto& e : j["dataset"]) e["fixture"] = kFixtures + "/study2/" + e["fixture"].get<std::string>();
    for (auto& mdl : j["models"]) mdl["script"] = kFixtures + "/study2/" + mdl["script"].get<std::string>();
    return j;
}

struct Harness {
    TempDir dir;
    std::ostringstream out, err;

    std::filesystem::path write_manifest(json j) {
        j["output_dir"] = (dir / "out").string();
        auto p = dir / "manifest.json";
        spit(p, j.dump(2));
        return p;
    }

    CliOptions opts(const std::filesystem::path& manifest) {
        CliOptions o;
        o.manifest = manifest;
        o.out_stream = &out;
        o.err_stream = &err;
        return o;
    }
};

}  // namespace

TEST(Manifest, LoadsAndResolvesPaths) {
    auto m = load_manifest(kFixtures + "/study2/manifest.json");
    EXPECT_EQ(m.dataset.size(), 3u);
    EXPECT_EQ(m.models.size(), 2u);
    EXPECT_EQ(m.role_key, "reviewer");
    EXPECT_TRUE(m.dataset[0].fixture->is_absolute());
    EXPECT_EQ(m.output_dir.filename(), "out");
    EXPECT_EQ(m.run_store, m.output_dir / "runs");
    EXPECT_EQ(m.digest.size(), 64u);
    auto p = review_path(m, Condition::generic, "gpt/x", PrKey{"kubernetes/kubernetes", 5});
    EXPECT_EQ(p.parent_path().parent_path().filename(), "generic");
}

TEST(Manifest, InvalidManifestsExitWithConfigError) {
    Harness h;
    auto base = two_model_manifest();
    std::vector<json> bad;
    bad.push_back(json::object());
    {
        auto j = base;
        j["models"] = json::array();
        bad.push_back(j);
    }
    {
        auto j = base;
        j["dataset"].push_back(j["dataset"][0]);
        bad.push_back(j);
    }
    {
        auto j = base;
        j["role_key"] = "auditor";
        bad.push_back(j);
    }
    {
        auto j = base;
        j["match_config"] = {{"line_window", 0}};
        bad.push_back(j);
    }
    for (const auto& j : bad) {
        auto path = h.write_manifest(j);
        EXPECT_EQ(run_command("review", h.opts(path)), kExitConfigError) << j.dump();
    }
    spit(h.dir / "broken.json", "{");
    EXPECT_EQ(run_command("review", h.opts(h.dir / "broken.json")), kExitConfigError);

    auto good = h.write_manifest(base);
    EXPECT_EQ(run_command("bogus", h.opts(good)), kExitConfigError);
    auto o = h.opts(good);
    o.format = "xml";
    EXPECT_EQ(run_command("metrics", o), kExitConfigError);
}

TEST(Cli, ReviewThenReplay) {
    Harness h;
    auto manifest = h.write_manifest(two_model_manifest());
    auto o = h.opts(manifest);
    ASSERT_EQ(run_command("review", o), kExitOk) << h.err.str();
    EXPECT_NE(h.out.str().find("adherence 4/4"), std::string::npos) << h.out.str();

    auto m = load_manifest(manifest);
    auto path = review_path(m, Condition::disposition, "claude-opus", m.dataset[0].key());
    auto first = slurp(path);
    ASSERT_FALSE(first.empty());

    o.replay = true;
    ASSERT_EQ(run_command("review", o), kExitOk) << h.err.str();
    EXPECT_EQ(slurp(path), first);

    auto fresh = h.opts(manifest);
    fresh.replay = true;
    fresh.out = h.dir / "elsewhere";
    EXPECT_EQ(run_command("review", fresh), kExitPartialFailure);
    EXPECT_NE(h.err.str().find("missing runs"), std::string::npos);
}

TEST(Cli, MetricsNeedReviews) {
    Harness h;
    auto manifest = h.write_manifest(two_model_manifest());
    EXPECT_EQ(run_command("metrics", h.opts(manifest)), kExitPartialFailure);
}

TEST(Cli, ReportIsDeterministic) {
    Harness h;
    auto manifest = h.write_manifest(two_model_manifest());
    std::string outputs[2];
    for (int i = 0; i < 2; ++i) {
        auto o = h.opts(manifest);
        o.out = h.dir / ("run" + std::to_string(i));
        o.parallel = i == 0 ? 1 : 4;
        ASSERT_EQ(run_command("review", o), kExitOk) << h.err.str();
        ASSERT_EQ(run_command("report", o), kExitOk) << h.err.str();
        outputs[i] = slurp(*o.out / "reports" / "metrics.json") + slurp(*o.out / "reports" / "compare.json");
    }
    EXPECT_EQ(outputs[0], outputs[1]);

    auto metrics = json::parse(slurp(h.dir / "run0" / "reports" / "metrics.json"));
    const auto& acc = metrics["accounting"];
    EXPECT_TRUE(acc["human_partition"].get<bool>());
    EXPECT_TRUE(acc["dispo_partition"].get<bool>());
    auto compare = json::parse(slurp(h.dir / "run0" / "reports" / "compare.json"));
    EXPECT_EQ(compare["per_pr"].size(), 3u);
    EXPECT_DOUBLE_EQ(compare["average"]["adherence"].get<double>(), 1.0);
    EXPECT_NE(slurp(h.dir / "run0" / "reports" / "metrics.md").find("| "), std::string::npos);
}

TEST(Cli, CompareNeedsTwoModels) {
    Harness h;
    auto j = two_model_manifest();
    j["models"].erase(1);
    auto manifest = h.write_manifest(j);
    ASSERT_EQ(run_command("review", h.opts(manifest)), kExitOk);
    EXPECT_EQ(run_command("compare-models", h.opts(manifest)), kExitConfigError);
    EXPECT_EQ(run_command("report", h.opts(manifest)), kExitOk) << h.err.str();
}

TEST(Cli, AdjudicateAppendsOverridesAndMetricsApplyThem) {
    Harness h;
    auto j = two_model_manifest();
    j["models"].erase(1);
    auto manifest = h.write_manifest(j);
    ASSERT_EQ(run_command("review", h.opts(manifest)), kExitOk);

    auto o = h.opts(manifest);
    o.adjudications = h.dir / "adj.jsonl";
    std::istringstream answers("y\ny\nq\n");
    o.in_stream = &answers;
    ASSERT_EQ(run_command("adjudicate", o), kExitOk) << h.err.str();
    EXPECT_NE(h.out.str().find("2 override(s) appended"), std::string::npos) << h.out.str();
    auto overrides = load_overrides(*o.adjudications);
    ASSERT_EQ(overrides.size(), 2u);
    EXPECT_TRUE(overrides[0].pr);

    auto mo = h.opts(manifest);
    mo.adjudications = o.adjudications;
    ASSERT_EQ(run_command("metrics", mo), kExitOk) << h.err.str();
    auto report = json::parse(slurp(h.dir / "out" / "reports" / "metrics.json"));
    EXPECT_EQ(report["adjudications_applied"], 2);

    spit(h.dir / "dangling.jsonl",
         R"({"pr":{"repo":"nowhere","number":1},"left_id":"H-1","forced_classification":"miss"})"
         "\n");
    mo.adjudications = h.dir / "dangling.jsonl";
    EXPECT_EQ(run_command("metrics", mo), kExitConfigError);
}

TEST(Cli, HumanAndMatchWriteArtifacts) {
    Harness h;
    auto j = two_model_manifest();
    j["models"].erase(1);
    auto manifest = h.write_manifest(j);
    ASSERT_EQ(run_command("human", h.opts(manifest)), kExitOk) << h.err.str();
    EXPECT_EQ(std::distance(std::filesystem::directory_iterator(h.dir / "out" / "human"),
                            std::filesystem::directory_iterator{}),
              3);
    ASSERT_EQ(run_command("review", h.opts(manifest)), kExitOk);
    ASSERT_EQ(run_command("match", h.opts(manifest)), kExitOk) << h.err.str();
    auto recs = json::parse(slurp(h.dir / "out" / "match" / "records.json"));
    EXPECT_FALSE(recs["records"].empty());
}
