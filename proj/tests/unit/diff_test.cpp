#include <gtest/gtest.h>

#include <random>
#include <stdexcept>

#include "lensreview/diff.hpp"
#include "lensreview/error.hpp"

using namespace lensreview;

namespace {

constexpr const char* kTwoFiles =
    "diff --git a/src/app.py b/src/app.py\n"
    "index 1111111..2222222 100644\n"
    "--- a/src/app.py\n"
    "+++ b/src/app.py\n"
    "@@ -10,4 +10,5 @@ def handler(event):\n"
    "     payload = event.body\n"
    "-    return process(payload)\n"
    "+    checked = validate(payload)\n"
    "+    return process(checked)\n"
    "     # done\n"
    " \n"
    "diff --git a/old/name.go b/new/name.go\n"
    "similarity index 90%\n"
    "rename from old/name.go\n"
    "rename to new/name.go\n"
    "--- a/old/name.go\n"
    "+++ b/new/name.go\n"
    "@@ -1,2 +1,2 @@\n"
    "-package old\n"
    "+package renamed\n"
    " import \"fmt\"\n";

}  // namespace

TEST(DiffParse, FilesHunksAndCounts) {
    auto doc = parse_unified_diff(kTwoFiles);
    ASSERT_EQ(doc.files.size(), 2u);
    const auto& a = doc.files[0];
    EXPECT_EQ(a.new_path, "src/app.py");
    ASSERT_EQ(a.hunks.size(), 1u);
    EXPECT_EQ(a.hunks[0].old_start, 10u);
    EXPECT_EQ(a.hunks[0].new_count, 5u);
    EXPECT_EQ(a.hunks[0].section, "def handler(event):");
    EXPECT_EQ(a.added(), 2u);
    EXPECT_EQ(a.removed(), 1u);

    const auto& b = doc.files[1];
    EXPECT_TRUE(b.is_rename());
    EXPECT_EQ(b.old_path, "old/name.go");
    EXPECT_EQ(b.path(), "new/name.go");
    EXPECT_EQ(doc.total_changed_lines, 5u);
    EXPECT_EQ(changed_line_count(doc), 5u);
    EXPECT_TRUE(doc.has_file("new/name.go"));
    EXPECT_TRUE(doc.has_file("old/name.go"));  // either side of a rename
    EXPECT_FALSE(doc.has_file("name.go"));
}

TEST(DiffParse, NewAndDeletedFiles) {
    auto doc = parse_unified_diff(
        "diff --git a/added.txt b/added.txt\n"
        "new file mode 100644\n"
        "--- /dev/null\n"
        "+++ b/added.txt\n"
        "@@ -0,0 +1,1 @@\n"
        "+hello\n"
        "diff --git a/gone.txt b/gone.txt\n"
        "deleted file mode 100644\n"
        "--- a/gone.txt\n"
        "+++ /dev/null\n"
        "@@ -1,1 +0,0 @@\n"
        "-bye\n");
    ASSERT_EQ(doc.files.size(), 2u);
    EXPECT_TRUE(doc.files[0].is_new);
    EXPECT_EQ(doc.files[0].old_path, "added.txt");
    EXPECT_TRUE(doc.files[1].is_deleted);
    EXPECT_EQ(doc.files[1].new_path, "gone.txt");
}

TEST(DiffParse, BinaryFileCarriesNoHunks) {
    auto doc = parse_unified_diff(
        "diff --git a/logo.png b/logo.png\n"
        "index 1..2 100644\n"
        "Binary files a/logo.png and b/logo.png differ\n");
    ASSERT_EQ(doc.files.size(), 1u);
    EXPECT_TRUE(doc.files[0].is_binary);
    EXPECT_EQ(changed_line_count(doc), 0u);
}

TEST(DiffParse, NoNewlineMarker) {
    auto doc = parse_unified_diff(
        "--- a/f.txt\n+++ b/f.txt\n@@ -1 +1 @@\n-a\n\\ No newline at end of file\n+b\n\\ No newline at end of file\n");
    ASSERT_EQ(doc.files[0].hunks[0].lines.size(), 2u);
    EXPECT_TRUE(doc.files[0].hunks[0].lines[0].no_newline_at_end);
    EXPECT_TRUE(doc.files[0].hunks[0].lines[1].no_newline_at_end);
}

TEST(DiffParse, EmptyInput) {
    auto doc = parse_unified_diff("");
    EXPECT_TRUE(doc.files.empty());
    EXPECT_EQ(doc.total_changed_lines, 0u);
}

TEST(DiffParse, MalformedInputsReportOffset) {
    try {
        parse_unified_diff("--- a/x\n+++ b/x\n@@ -1,3 +1,3 @@\n a\n");
        FAIL() << "expected MalformedDiff";
    } catch (const MalformedDiff& e) {
        EXPECT_EQ(e.byte_offset(), 35u);  // input ends inside the hunk
        EXPECT_EQ(e.file(), "x");
    }
    EXPECT_THROW(parse_unified_diff("@@ -1 +1 @@\n-a\n+b\n"), MalformedDiff);
    EXPECT_THROW(parse_unified_diff("--- a/x\n+++ b/x\n@@ -1,z +1 @@\n"), MalformedDiff);
    EXPECT_THROW(parse_unified_diff("--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n-a\n+b\n+c\n"), MalformedDiff);
}

TEST(DiffSerialize, RoundTripIsStructurallyEqual) {
    auto doc = parse_unified_diff(kTwoFiles);
    auto again = parse_unified_diff(serialize(doc));
    EXPECT_TRUE(doc.same_structure(again));
    EXPECT_EQ(doc.raw_text, kTwoFiles);
}

TEST(DiffSerialize, RandomDiffsRoundTrip) {
    std::mt19937 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        std::string text;
        int files = 1 + static_cast<int>(rng() % 3);
        for (int f = 0; f < files; ++f) {
            auto name = "dir/f" + std::to_string(f) + ".c";
            text += "--- a/" + name + "\n+++ b/" + name + "\n";
            std::uint32_t start = 1;
            int hunks = 1 + static_cast<int>(rng() % 3);
            for (int h = 0; h < hunks; ++h) {
                std::string body;
                std::uint32_t oc = 0, nc = 0;
                int lines = 1 + static_cast<int>(rng() % 6);
                for (int l = 0; l < lines; ++l) {
                    switch (rng() % 3) {
                        case 0: body += " ctx\n"; ++oc; ++nc; break;
                        case 1: body += "-old\n"; ++oc; break;
                        default: body += "+new\n"; ++nc; break;
                    }
                }
                text += "@@ -" + std::to_string(start) + "," + std::to_string(oc) + " +" + std::to_string(start) + "," +
                        std::to_string(nc) + " @@\n" + body;
                start += 20;
            }
        }
        auto doc = parse_unified_diff(text);
        EXPECT_TRUE(doc.same_structure(parse_unified_diff(serialize(doc)))) << text;
    }
}

TEST(LineRefTest, MakeValidates) {
    EXPECT_THROW(LineRef::make("", 1), std::invalid_argument);
    EXPECT_THROW(LineRef::make("a.c", 0), std::invalid_argument);
    EXPECT_THROW(LineRef::make(std::string("a\0b", 3), 1), std::invalid_argument);
    auto r = LineRef::make("a.c", 3, Side::old_file);
    EXPECT_EQ(r.side, Side::old_file);
}

TEST(WithinWindow, InclusiveBoundaryAndSameFileOnly) {
    auto a = LineRef::make("a.go", 50);
    EXPECT_TRUE(within_window(a, LineRef::make("a.go", 60)));
    EXPECT_TRUE(within_window(a, LineRef::make("a.go", 40)));
    EXPECT_FALSE(within_window(a, LineRef::make("a.go", 61)));
    EXPECT_FALSE(within_window(a, LineRef::make("b.go", 50)));
    EXPECT_TRUE(within_window(a, LineRef::make("a.go", 50, Side::old_file)));
    EXPECT_TRUE(within_window(a, LineRef::make("a.go", 53), 3));
    EXPECT_THROW(within_window(a, a, 0), std::invalid_argument);
}

TEST(WithinWindow, Symmetric) {
    std::mt19937 rng(11);
    for (int i = 0; i < 500; ++i) {
        auto a = LineRef::make(rng() % 2 ? "x" : "y", 1 + rng() % 40);
        auto b = LineRef::make(rng() % 2 ? "x" : "y", 1 + rng() % 40);
        EXPECT_EQ(within_window(a, b), within_window(b, a));
    }
}
