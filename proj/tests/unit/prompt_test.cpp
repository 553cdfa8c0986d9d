#include <gtest/gtest.h>

#include "lensreview/error.hpp"
#include "lensreview/hash.hpp"
#include "lensreview/prompt.hpp"
#include "test_support.hpp"

using namespace lensreview;
using testing_support::slurp;

namespace {

const std::string kAssets = LENSREVIEW_ASSET_DIR;

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

DiffDocument small_diff() { return parse_unified_diff("--- a/x.py\n+++ b/x.py\n@@ -1,1 +1,2 @@\n-a\n+b\n+c\n"); }

}  // namespace

TEST(Sha256, KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
              "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Prompt, EmbeddedTemplatesEqualAssetFiles) {
    auto t = TemplateSet::embedded();
    EXPECT_EQ(t.disposition, slurp(kAssets + "/disposition_review.txt"));
    EXPECT_EQ(t.generic, slurp(kAssets + "/generic_review.txt"));
    auto from_dir = TemplateSet::from_directory(kAssets);
    EXPECT_EQ(from_dir.disposition_pin, t.disposition_pin);
}

TEST(Prompt, DispositionPromptEmbedsTemplateAndDiff) {
    PromptForge forge;
    auto role = LensRegistry::builtin().resolve_role("reviewer");
    auto diff = small_diff();
    auto p = forge.render_disposition_prompt(role, diff);
    auto tmpl = slurp(kAssets + "/disposition_review.txt");
    auto marker = tmpl.find("[DIFF INSERTED HERE]");
    ASSERT_NE(marker, std::string::npos);
    EXPECT_EQ(p.body, tmpl.substr(0, marker) + diff.raw_text + tmpl.substr(marker + 20));
    EXPECT_EQ(count(p.body, "### LENS "), 4u);
    EXPECT_EQ(p.digest, sha256_hex(p.body));
    EXPECT_EQ(p.diff_changed_lines, 3u);
    EXPECT_EQ(p.condition, Condition::disposition);
}

TEST(Prompt, GenericPrompt) {
    PromptForge forge;
    auto p = forge.render_generic_prompt(small_diff());
    EXPECT_EQ(p.condition, Condition::generic);
    EXPECT_EQ(p.body.rfind("You are an expert code reviewer.", 0), 0u);
    EXPECT_EQ(count(p.body, "### LENS "), 0u);
    EXPECT_NE(p.body.find("+++ b/x.py"), std::string::npos);
}

TEST(Prompt, DigestDependsOnDiff) {
    PromptForge forge;
    auto role = LensRegistry::builtin().resolve_role("reviewer");
    auto a = forge.render_disposition_prompt(role, small_diff());
    auto b = forge.render_disposition_prompt(role, parse_unified_diff("--- a/y\n+++ b/y\n@@ -1 +1 @@\n-a\n+b\n"));
    EXPECT_NE(a.digest, b.digest);
    EXPECT_EQ(a.digest, forge.render_disposition_prompt(role, small_diff()).digest);
}

TEST(Prompt, CustomRoleRenumbersSections) {
    PromptForge forge;
    RoleProtocol role{"pair", {"nyaya", "cynic"}, SynthesisPolicy::preserve_disagreement};
    auto p = forge.render_disposition_prompt(role, small_diff());
    EXPECT_EQ(count(p.body, "### LENS "), 2u);
    EXPECT_NE(p.body.find("### LENS 1: NYAYA"), std::string::npos);
    EXPECT_NE(p.body.find("### LENS 2: CYNIC"), std::string::npos);
    EXPECT_NE(p.body.find("using\n2 philosophical disposition lenses"), std::string::npos);
    EXPECT_EQ(p.body.find("Skeptic: \""), std::string::npos);
}

TEST(Prompt, NonExecutableLens) {
    PromptForge forge;
    RoleProtocol role{"r", {"cynic", "stoic"}, SynthesisPolicy::preserve_disagreement};
    EXPECT_THROW(forge.render_disposition_prompt(role, small_diff()), NonExecutableLens);
}

TEST(Prompt, TamperedTemplateRejected) {
    auto t = TemplateSet::embedded();
    t.disposition += " ";
    EXPECT_THROW(PromptForge{t}, TemplateIntegrityError);

    auto g = TemplateSet::embedded();
    g.generic = "no marker here";
    g.generic_pin = sha256_hex(g.generic);
    EXPECT_THROW(PromptForge{g}, TemplateIntegrityError);

    EXPECT_THROW(TemplateSet::from_directory("/nonexistent/prompts"), TemplateIntegrityError);
}

TEST(Prompt, TemplateHashesArePins) {
    PromptForge forge;
    auto h = forge.template_hashes();
    EXPECT_EQ(h.at("disposition_review.txt"), sha256_hex(slurp(kAssets + "/disposition_review.txt")));
    EXPECT_EQ(h.at("generic_review.txt"), sha256_hex(slurp(kAssets + "/generic_review.txt")));
}
