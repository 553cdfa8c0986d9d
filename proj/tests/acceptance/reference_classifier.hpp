#pragma once

#include <optional>
#include <string>
#include <vector>

namespace reference {

// A finding reduced to what the classification rules look at.
struct Item {
    std::string id;
    std::string file;  // empty: no location
    unsigned line = 0;
    std::string concern;
};

struct Verdict {
    bool human_side = false;
    std::string id;
    std::optional<std::string> partner;
    std::string label;  // convergence | miss | excluded_style | unique
};

// Brute force over every pair: same file, lines at most `window` apart, same
// concern. Partner is the nearest line, then the lowest id.
std::vector<Verdict> classify(const std::vector<Item>& dispo, const std::vector<Item>& human, unsigned window = 10);

}  // namespace reference
