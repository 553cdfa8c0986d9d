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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lensreview/finding.hpp"

namespace lensreview {

/// Maps free category labels onto a small closed vocabulary.
struct Taxonomy {
    struct Rule {
        std::string category;
        std::vector<std::string> keywords;  // single words or space-separated phrases
    };
    std::map<std::string, std::string> aliases;  // normalised label -> category
    std::vector<Rule> rules;                     // first rule with a keyword hit wins

    static Taxonomy defaults();

    /// Canonical category for a finding: its label if given (via aliases),
    /// otherwise the first rule whose keyword appears in the claim, otherwise "".
    std::string categorize(std::string_view label, std::string_view claim) const;
};

enum class ConcernRule { category_and_overlap, category_only };

struct MatchConfig {
    std::uint32_t line_window = kDefaultLineWindow;
    ConcernRule concern_rule = ConcernRule::category_and_overlap;
    double overlap_threshold = 0.2;
    std::set<std::string> style_categories = {"style"};
    Taxonomy taxonomy = Taxonomy::defaults();

    /// Throws ConfigError.
    void validate() const;
};

void to_json(json& j, const MatchConfig& c);
void from_json(const json& j, MatchConfig& c);

enum class Classification {
    convergence,
    unique,
    miss,
    false_positive,
    excluded_style,
    shared,
    left_only,
    right_only,
};

std::string_view to_string(Classification c);
std::optional<Classification> classification_from_string(std::string_view s);

enum class Basis { automatic, adjudicated };

/// Which finding set a record accounts for. For human/dispo records the
/// left id is the finding on that side and the right id its best match.
enum class RecordSide { human, dispo, left, right };

enum class Agreement { strict, partial };

struct MatchRecord {
    PrKey pr;
    RecordSide side = RecordSide::dispo;
    std::string left_id;
    std::optional<std::string> right_id;
    Classification classification = Classification::unique;
    Basis basis = Basis::automatic;
    std::optional<Agreement> agreement;  // tool-vs-tool pairs only
    std::string rationale;

    friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

void to_json(json& j, const MatchRecord& r);
void from_json(const json& j, MatchRecord& r);

struct AdjudicationOverride {
    std::optional<PrKey> pr;  // required in adjudication files
    std::string left_id;
    std::optional<std::string> right_id;
    Classification forced_classification = Classification::convergence;
    std::string rater;
    std::string note;

    friend bool operator==(const AdjudicationOverride&, const AdjudicationOverride&) = default;
};

void to_json(json& j, const AdjudicationOverride& o);
void from_json(const json& j, AdjudicationOverride& o);

/// JSON lines, one override per line; blank lines skipped.
std::vector<AdjudicationOverride> load_overrides(const std::filesystem::path& path);
std::vector<AdjudicationOverride> parse_overrides(std::string_view jsonl);
void append_override(const std::filesystem::path& path, const AdjudicationOverride& o);

/// Content words of a claim: lower-cased, with path references, numbers and
/// stopwords removed.
std::set<std::string> content_tokens(std::string_view claim);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Concern half of the match test, ignoring location.
bool same_concern(const Finding& a, const Finding& b, const MatchConfig& cfg);

/// Same file within cfg.line_window lines AND same concern. Findings without
/// a location never match automatically.
bool match_pair(const Finding& a, const Finding& b, const MatchConfig& cfg);

/// Human-side records (convergence / miss / excluded_style) followed by
/// dispo-side records (convergence / unique / false_positive), each in id order.
/// Throws DanglingOverride for an override naming an unknown finding.
std::vector<MatchRecord> classify_against_human(const ReviewRun& dispo, const std::vector<Finding>& human,
                                                const MatchConfig& cfg,
                                                const std::vector<AdjudicationOverride>& overrides = {});

struct SplitResult {
    std::size_t shared = 0;
    std::size_t left_only = 0;
    std::size_t right_only = 0;
    std::vector<MatchRecord> records;

    std::size_t union_size() const { return shared + left_only + right_only; }
};

/// One-to-one pairing of disposition and generic findings for one PR.
SplitResult three_way_split(const ReviewRun& dispo, const ReviewRun& generic, const MatchConfig& cfg);

struct ClusterResult {
    std::vector<std::vector<std::string>> clusters;  // finding ids
    std::size_t multi_lens = 0;                      // clusters spanning >= 2 lenses

    std::optional<double> multi_lens_rate() const;
};

ClusterResult cluster_inter_disposition(const ReviewRun& run, const MatchConfig& cfg);

struct ModelComparison {
    std::size_t strict = 0;
    std::size_t partial = 0;  // location agrees, concern does not
    std::size_t a_only = 0;
    std::size_t b_only = 0;
    std::vector<MatchRecord> records;

    std::size_t union_size() const { return strict + partial + a_only + b_only; }
    std::optional<double> strict_rate() const;
    std::optional<double> partial_plus_rate() const;
};

ModelComparison cross_model_compare(const ReviewRun& a, const ReviewRun& b, const MatchConfig& cfg);

struct Tally {
    std::size_t human = 0;
    std::size_t convergence = 0;
    std::size_t miss = 0;
    std::size_t excluded_style = 0;
    std::size_t dispo = 0;
    std::size_t matched = 0;
    std::size_t unique = 0;  // unmatched dispo findings, false positives included
    std::size_t false_positive = 0;

    Tally& operator+=(const Tally& o);
    friend bool operator==(const Tally&, const Tally&) = default;
};

Tally tally(const std::vector<MatchRecord>& records);

}  // namespace lensreview
