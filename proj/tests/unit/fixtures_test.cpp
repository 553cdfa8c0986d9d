#include <gtest/gtest.h>

#include <cstdlib>

#include "test_support.hpp"

namespace fs = std::filesystem;

// The checked-in fixtures are exactly what the generator produces.
TEST(StudyFixtures, RegenerateByteIdentical) {
    testing_support::TempDir dir;
    auto cmd = std::string("\"") + MAKE_STUDY_FIXTURES + "\" \"" + dir.path().string() + "\" > /dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);

    const fs::path committed = testing_support::fixture_dir();
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path())) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), dir.path());
        ASSERT_TRUE(fs::exists(committed / rel)) << rel;
        EXPECT_EQ(testing_support::slurp(e.path()), testing_support::slurp(committed / rel)) << rel;
        ++files;
    }
    EXPECT_GT(files, 50u);
}
