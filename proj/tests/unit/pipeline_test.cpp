#include <gtest/gtest.h>

#include <random>

#include "lensreview/error.hpp"
#include "lensreview/pipeline.hpp"

using namespace lensreview;

namespace {

RawResponse resp(std::string text) { return RawResponse{std::move(text), "m", "digest", 0, "run-1", false}; }

const DiffDocument& diff() {
    static const auto d = parse_unified_diff(
        "--- a/src/app.py\n+++ b/src/app.py\n@@ -1,1 +1,2 @@\n-a\n+b\n+c\n"
        "--- a/old.go\n+++ /dev/null\n@@ -1,1 +0,0 @@\n-x\n");
    return d;
}

constexpr const char* kFourLenses =
    "## LENS 1: CYNIC (Ruthless Subtractor)\n"
    "- [dead-code] `src/app.py:12` helper is never called. Confidence: high\n"
    "- Remove the flag in src/app.py line 30\n"
    "\n"
    "## LENS 2: SKEPTIC\n"
    "1. Claim in the description is untested (app.py:4)\n"
    "   - detail on the same claim\n"
    "\n"
    "### Nyaya\n"
    "* vendor/lib.py:3 is touched but not in the diff\n"
    "\n"
    "**Confucian**\n"
    "- Naming is inconsistent with the module, medium confidence\n"
    "\n"
    "## Synthesis\n"
    "- Overall the change is fine\n";

ReviewRun lens_run(std::map<Source, int> counts) {
    ReviewRun run;
    int n = 0;
    for (auto [s, c] : counts) {
        for (int i = 0; i < c; ++i) {
            Finding f;
            f.id = "D-" + std::to_string(++n);
            f.source = s;
            f.claim = "c" + std::to_string(n);
            run.findings.push_back(f);
        }
    }
    return run;
}

}  // namespace

TEST(LensHeading, NamesExactlyOneLens) {
    EXPECT_EQ(lens_in_heading("LENS 3: NYĀYA (Epistemic Auditor)"), Source::nyaya);
    EXPECT_EQ(lens_in_heading("Cynicism pass"), Source::cynic);
    EXPECT_EQ(lens_in_heading("Sceptic findings"), Source::skeptic);
    EXPECT_FALSE(lens_in_heading("Cynic and Skeptic agree"));
    EXPECT_FALSE(lens_in_heading("Synthesis"));
}

TEST(ParseFindings, AttributesItemsToSections) {
    auto run = parse_findings(resp(kFourLenses), Condition::disposition, &diff());
    ASSERT_EQ(run.findings.size(), 5u);
    EXPECT_EQ(run.unattributed_items, 1u);
    EXPECT_TRUE(run.adherence.adherent);

    const auto& a = run.findings[0];
    EXPECT_EQ(a.id, "D-1");
    EXPECT_EQ(a.source, Source::cynic);
    EXPECT_EQ(a.category, "dead-code");
    EXPECT_EQ(a.confidence, "high");
    ASSERT_TRUE(a.location);
    EXPECT_EQ(a.location->file_path, "src/app.py");
    EXPECT_EQ(a.location->line, 12u);

    EXPECT_EQ(run.findings[1].location->line, 30u);

    const auto& s = run.findings[2];
    EXPECT_EQ(s.source, Source::skeptic);
    EXPECT_EQ(s.location->file_path, "src/app.py");  // suffix match
    EXPECT_NE(s.claim.find("detail on the same claim"), std::string::npos);

    const auto& n = run.findings[3];
    EXPECT_EQ(n.source, Source::nyaya);
    EXPECT_FALSE(n.specific);
    EXPECT_FALSE(n.location);

    EXPECT_EQ(run.findings[4].source, Source::confucian);
    EXPECT_EQ(run.findings[4].confidence, "medium");
    EXPECT_EQ(run.model_id, "m");
    EXPECT_EQ(run.request_id, "run-1");
}

TEST(ParseFindings, UppercaseDiacriticHeading) {
    auto run = parse_findings(resp("LENS 3: NY\xc4\x80YA\n- a.go:3 claim assumes sorted input\n"), Condition::disposition);
    ASSERT_EQ(run.findings.size(), 1u);
    EXPECT_EQ(run.findings[0].source, Source::nyaya);
}

TEST(ParseFindings, DeletedFileResolvesToOldSide) {
    auto run = parse_findings(resp("# Cynic\n- old.go:1 removed too eagerly\n"), Condition::disposition, &diff());
    ASSERT_EQ(run.findings.size(), 1u);
    EXPECT_EQ(run.findings[0].location->side, Side::old_file);
}

TEST(ParseFindings, KeepsModelIdsWhenWellFormed) {
    auto run = parse_findings(resp("## Cynic\nD-7: first in a.py:1\nD-9: second\n"), Condition::disposition);
    ASSERT_EQ(run.findings.size(), 2u);
    EXPECT_EQ(run.findings[0].id, "D-7");
    EXPECT_EQ(run.findings[1].id, "D-9");
    EXPECT_EQ(run.findings[0].location->file_path, "a.py");

    auto dup = parse_findings(resp("## Cynic\nD-7: first\nD-7: second\n"), Condition::disposition);
    EXPECT_EQ(dup.findings[1].id, "D-2");
}

TEST(ParseFindings, GenericListAndParagraphFallback) {
    auto list = parse_findings(resp("Review:\n1. src/app.py:2 missing check\n2. style nit\n"), Condition::generic,
                               &diff());
    ASSERT_EQ(list.findings.size(), 2u);
    EXPECT_EQ(list.findings[0].id, "G-1");
    EXPECT_EQ(list.findings[0].source, Source::generic);
    EXPECT_FALSE(list.adherence.applicable);

    auto para = parse_findings(resp("# Review\nThe change in src/app.py:2 drops a check.\n\nLooks good otherwise.\n"),
                               Condition::generic, &diff());
    ASSERT_EQ(para.findings.size(), 1u);
    EXPECT_EQ(para.findings[0].location->line, 2u);
}

TEST(ParseFindings, UnparseableOutput) {
    EXPECT_THROW(parse_findings(resp("   \n"), Condition::disposition), UnparseableOutput);
    EXPECT_THROW(parse_findings(resp("- item with no lens\n"), Condition::disposition), UnparseableOutput);
    EXPECT_THROW(parse_findings(resp("Looks fine to me."), Condition::generic), UnparseableOutput);
    try {
        parse_findings(resp("nothing"), Condition::generic);
    } catch (const UnparseableOutput& e) {
        EXPECT_EQ(e.raw_text(), "nothing");
    }
}

TEST(Adherence, MissingLensIsNonAdherent) {
    auto run = parse_findings(resp("## Cynic\n- a\n## Skeptic\n- b\n## Nyaya\n- c\n"), Condition::disposition);
    EXPECT_FALSE(run.adherence.adherent);
    EXPECT_EQ(run.adherence.per_lens_counts.at(Source::cynic), 1u);

    // An empty but present section still counts.
    auto empty = parse_findings(resp("## Cynic\n- a\n## Skeptic\n## Nyaya\n## Confucian\nnone\n"),
                                Condition::disposition);
    EXPECT_TRUE(empty.adherence.adherent);
}

TEST(HamartiaGate, KeepsFirstFourWhenTriggered) {
    auto run = apply_hamartia_gate(lens_run({{Source::cynic, 9}, {Source::skeptic, 7}}), 100);
    EXPECT_EQ(run.findings.size(), 11u);
    ASSERT_EQ(run.gated_out.size(), 5u);
    EXPECT_EQ(run.gated_out.front().id, "D-5");
    EXPECT_EQ(run.findings[3].id, "D-4");

    auto large = apply_hamartia_gate(lens_run({{Source::cynic, 9}}), 300);
    EXPECT_TRUE(large.gated_out.empty());
}

TEST(HamartiaGate, PerLensTriggers) {
    std::map<Source, FindingVolumeTrigger> t{{Source::skeptic, FindingVolumeTrigger{2, 300, 1}}};
    auto run = apply_hamartia_gate(lens_run({{Source::cynic, 3}, {Source::skeptic, 3}}), 10, t);
    EXPECT_EQ(run.gated_out.size(), 2u);
}

TEST(HamartiaGate, GenericRunsUntouched) {
    auto run = lens_run({{Source::generic, 12}});
    run.condition = Condition::generic;
    EXPECT_TRUE(apply_hamartia_gate(run, 1).gated_out.empty());
}

TEST(HamartiaGate, RandomProperties) {
    std::mt19937 rng(3);
    for (int i = 0; i < 300; ++i) {
        std::map<Source, int> counts;
        for (auto s : kReviewerLenses) counts[s] = static_cast<int>(rng() % 12);
        auto lines = static_cast<std::size_t>(rng() % 600);
        auto original = lens_run(counts);
        auto once = apply_hamartia_gate(original, lines);
        EXPECT_EQ(apply_hamartia_gate(once, lines).findings, once.findings);
        EXPECT_EQ(once.findings.size() + once.gated_out.size(), original.findings.size());
        for (auto [s, c] : counts) {
            if (c <= 7 || lines >= 300) {
                for (const auto& g : once.gated_out) EXPECT_NE(g.source, s);
            }
        }
    }
}
