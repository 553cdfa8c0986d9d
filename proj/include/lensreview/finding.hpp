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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lensreview/diff.hpp"

namespace lensreview {

using json = nlohmann::json;

enum class Source { cynic, skeptic, nyaya, confucian, generic, human };

std::string_view to_string(Source s);
std::optional<Source> source_from_string(std::string_view s);

/// The four lenses with published prompts, in reviewer order.
inline constexpr std::array<Source, 4> kReviewerLenses = {Source::cynic, Source::skeptic, Source::nyaya,
                                                          Source::confucian};

inline bool is_lens(Source s) {
    return s == Source::cynic || s == Source::skeptic || s == Source::nyaya || s == Source::confucian;
}

enum class Condition { disposition, generic };

std::string_view to_string(Condition c);
std::optional<Condition> condition_from_string(std::string_view s);

struct PrKey {
    std::string repo;
    std::uint32_t number = 0;

    std::string str() const { return repo + "#" + std::to_string(number); }
    friend auto operator<=>(const PrKey&, const PrKey&) = default;
};

struct Finding {
    std::string id;  // "D-n", "G-n" or "H-n"; unique within a run
    Source source = Source::generic;
    std::optional<LineRef> location;
    std::string category;  // free label at parse time, may be empty
    std::string claim;
    std::optional<std::string> confidence;
    // False when the item names no file, or names one outside the diff.
    bool specific = true;

    friend bool operator==(const Finding&, const Finding&) = default;
};

/// Natural order on ids: prefix, then numeric suffix ("H-2" < "H-10").
bool id_less(std::string_view a, std::string_view b);

struct AdherenceReport {
    bool applicable = true;
    std::set<Source> lenses_present;
    std::map<Source, std::size_t> per_lens_counts;
    bool adherent = false;

    friend bool operator==(const AdherenceReport&, const AdherenceReport&) = default;
};

struct ReviewRun {
    PrKey pr;
    Condition condition = Condition::disposition;
    std::string model_id;
    std::string prompt_digest;
    std::string request_id;
    std::vector<Finding> findings;
    AdherenceReport adherence;
    std::vector<Finding> gated_out;
    // List items that appeared outside any lens section (dropped).
    std::size_t unattributed_items = 0;

    friend bool operator==(const ReviewRun&, const ReviewRun&) = default;
};

void to_json(json& j, const LineRef& r);
void from_json(const json& j, LineRef& r);
void to_json(json& j, const Finding& f);
void from_json(const json& j, Finding& f);
void to_json(json& j, const AdherenceReport& a);
void from_json(const json& j, AdherenceReport& a);
void to_json(json& j, const ReviewRun& r);
void from_json(const json& j, ReviewRun& r);

}  // namespace lensreview
