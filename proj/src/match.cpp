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

#include "lensreview/match.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <regex>
#include <sstream>
#include <tuple>

#include "lensreview/error.hpp"

namespace lensreview {

namespace {

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '_' || u >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string normalize_label(std::string_view label) {
    std::string out;
    for (const auto& w : words(label)) {
        if (!out.empty()) out.push_back('-');
        out += w;
    }
    return out;
}

// Space-padded word string so phrase keywords match on word boundaries.
std::string padded(const std::vector<std::string>& ws) {
    std::string out = " ";
    for (const auto& w : ws) out += w + " ";
    return out;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> s = {
        "a",     "an",    "the",   "and",   "or",    "but",   "of",    "on",    "in",     "at",    "to",
        "from",  "by",    "for",   "with",  "as",    "is",    "are",   "was",   "were",   "be",    "been",
        "being", "it",    "its",   "this",  "that",  "these", "those", "there", "here",   "line",  "lines",
        "file",  "files", "should", "could", "would", "can",   "may",   "might", "will",   "do",    "does",
        "did",   "not",   "no",    "if",    "then",  "so",    "we",    "you",   "i",      "our",   "your",
        "they",  "them",  "he",    "she",   "which", "what",  "when",  "where", "why",    "how",   "also",
        "just",  "than",  "into",  "onto",  "about", "has",   "have",  "had",   "l",      "see",   "please",
        "maybe", "any",   "all",   "some",  "such",  "more",  "most",  "very",  "still",  "only",  "too",
    };
    return s;
}

struct Keyed {
    const Finding* f;
    std::string category;
    std::set<std::string> tokens;
};

Keyed keyed(const Finding& f, const MatchConfig& cfg) {
    return Keyed{&f, cfg.taxonomy.categorize(f.category, f.claim), content_tokens(f.claim)};
}

bool concern_match(const Keyed& a, const Keyed& b, const MatchConfig& cfg) {
    if (a.category != b.category) return false;
    if (cfg.concern_rule == ConcernRule::category_only) return true;
    return jaccard(a.tokens, b.tokens) >= cfg.overlap_threshold;
}

bool location_match(const Finding& a, const Finding& b, const MatchConfig& cfg) {
    return a.location && b.location && within_window(*a.location, *b.location, cfg.line_window);
}

bool keyed_match(const Keyed& a, const Keyed& b, const MatchConfig& cfg) {
    return location_match(*a.f, *b.f, cfg) && concern_match(a, b, cfg);
}

std::uint32_t distance(const Finding& a, const Finding& b) {
    if (!a.location || !b.location || a.location->file_path != b.location->file_path) {
        return std::numeric_limits<std::uint32_t>::max();
    }
    auto x = a.location->line, y = b.location->line;
    return x > y ? x - y : y - x;
}

std::vector<const Finding*> sorted_by_id(const std::vector<Finding>& in) {
    std::vector<const Finding*> out;
    for (const auto& f : in) out.push_back(&f);
    std::stable_sort(out.begin(), out.end(), [](const Finding* a, const Finding* b) { return id_less(a->id, b->id); });
    return out;
}

struct Pair {
    std::size_t left;
    std::size_t right;
};

// Deterministic one-to-one pairing: nearest lines first, then lowest ids.
std::vector<Pair> greedy_pairs(const std::vector<Keyed>& left, const std::vector<Keyed>& right,
                               const std::function<bool(const Keyed&, const Keyed&)>& ok, std::vector<bool>& left_used,
                               std::vector<bool>& right_used) {
    std::vector<std::tuple<std::uint32_t, std::size_t, std::size_t>> cand;
    for (std::size_t i = 0; i < left.size(); ++i) {
        if (left_used[i]) continue;
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (!right_used[j] && ok(left[i], right[j])) cand.emplace_back(distance(*left[i].f, *right[j].f), i, j);
        }
    }
    // left/right are already id-sorted, so index order is id order
    std::sort(cand.begin(), cand.end());
    std::vector<Pair> out;
    for (const auto& [d, i, j] : cand) {
        if (left_used[i] || right_used[j]) continue;
        left_used[i] = right_used[j] = true;
        out.push_back({i, j});
    }
    return out;
}

std::vector<Keyed> keyed_sorted(const std::vector<Finding>& in, const MatchConfig& cfg) {
    std::vector<Keyed> out;
    for (const auto* f : sorted_by_id(in)) out.push_back(keyed(*f, cfg));
    return out;
}

std::string fmt_overlap(double v) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(2);
    ss << v;
    return ss.str();
}

std::string pair_rationale(const Keyed& a, const Keyed& b) {
    auto d = distance(*a.f, *b.f);
    return "matched " + b.f->id + ": " + std::to_string(d) + " line(s) apart, category '" + a.category +
           "', overlap " + fmt_overlap(jaccard(a.tokens, b.tokens));
}

}  // namespace

// -- taxonomy ---------------------------------------------------------------

Taxonomy Taxonomy::defaults() {
    Taxonomy t;
    t.aliases = {
        {"dead-code", "dead-code"},         {"unused-code", "dead-code"},       {"unused-variable", "dead-code"},
        {"unused", "dead-code"},            {"redundancy", "dead-code"},        {"subtraction", "dead-code"},
        {"race-condition", "concurrency"},  {"thread-safety", "concurrency"},   {"concurrency", "concurrency"},
        {"error-handling", "error-handling"}, {"errors", "error-handling"},     {"null-check", "error-handling"},
        {"security", "security"},           {"vulnerability", "security"},      {"naming", "naming"},
        {"naming-accuracy", "naming"},      {"rename", "naming"},               {"migration", "migration"},
        {"compatibility", "migration"},     {"breaking-change", "migration"},   {"logic", "logic"},
        {"logic-error", "logic"},           {"inference", "logic"},             {"correctness", "logic"},
        {"validation", "validation"},       {"calibration", "validation"},      {"testing", "testing"},
        {"tests", "testing"},               {"test-coverage", "testing"},       {"performance", "performance"},
        {"perf", "performance"},            {"documentation", "documentation"}, {"docs", "documentation"},
        {"style", "style"},                 {"formatting", "style"},            {"import-order", "style"},
        {"typo", "style"},                  {"whitespace", "style"},            {"lint", "style"},
        {"configuration", "configuration"}, {"config", "configuration"},        {"dependency", "dependency"},
        {"dependencies", "dependency"},     {"observability", "observability"}, {"logging", "observability"},
    };
    t.rules = {
        {"style", {"formatting", "import order", "whitespace", "indentation", "indent", "typo", "nit", "lint",
                   "trailing space", "code style"}},
        {"dead-code", {"unused", "dead code", "dead", "unreachable", "redundant", "obsolete", "leftover",
                       "hollow", "never called", "never used"}},
        {"concurrency", {"race", "race condition", "concurrent", "concurrency", "mutex", "deadlock", "goroutine",
                         "thread", "threads", "atomic", "lock"}},
        {"security", {"security", "injection", "secret", "secrets", "credential", "credentials", "vulnerability",
                      "privilege", "xss", "csrf", "sanitize", "escaping"}},
        {"migration", {"migration", "migrate", "backward compatibility", "backwards compatibility", "breaking",
                       "dangle", "dangling", "deprecated"}},
        {"error-handling", {"error handling", "exception", "exceptions", "panic", "nil", "null", "unchecked error",
                            "swallowed", "swallows", "err", "retry", "retries"}},
        {"naming", {"name", "names", "naming", "rename", "renamed", "renaming", "misnamed", "misleading name"}},
        {"testing", {"test", "tests", "testing", "coverage", "assertion", "assertions", "flaky"}},
        {"performance", {"performance", "slow", "allocation", "allocations", "latency", "quadratic", "cache",
                         "memory", "n+1"}},
        {"validation", {"validation", "validate", "unverified", "unvalidated", "assumption", "assumes", "confidence",
                        "bounds", "input"}},
        {"logic", {"logic", "inference", "incorrect", "wrong", "condition", "off by one", "invariant", "bug",
                   "inverted", "edge case"}},
        {"documentation", {"doc", "docs", "documentation", "docstring", "comment", "comments", "readme"}},
        {"configuration", {"config", "configuration", "flag", "flags", "setting", "settings", "default"}},
        {"dependency", {"dependency", "dependencies", "version", "pin", "pinned", "upgrade"}},
    };
    return t;
}

std::string Taxonomy::categorize(std::string_view label, std::string_view claim) const {
    auto norm = normalize_label(label);
    if (!norm.empty()) {
        auto it = aliases.find(norm);
        if (it != aliases.end()) return it->second;
    }
    auto text = padded(words(norm.empty() ? claim : label));
    for (const auto& rule : rules) {
        for (const auto& kw : rule.keywords) {
            if (text.find(padded(words(kw))) != std::string::npos) return rule.category;
        }
    }
    return norm;
}

// -- config -----------------------------------------------------------------

void MatchConfig::validate() const {
    if (line_window < 1) throw ConfigError("match_config.line_window must be >= 1");
    if (!(overlap_threshold >= 0.0 && overlap_threshold <= 1.0)) {
        throw ConfigError("match_config.overlap_threshold must lie in [0, 1]");
    }
}

void to_json(json& j, const MatchConfig& c) {
    json rules = json::array();
    for (const auto& r : c.taxonomy.rules) rules.push_back({{"category", r.category}, {"keywords", r.keywords}});
    j = json{{"line_window", c.line_window},
             {"concern_rule", c.concern_rule == ConcernRule::category_only ? "category_only" : "category_and_overlap"},
             {"overlap_threshold", c.overlap_threshold},
             {"style_categories", c.style_categories},
             {"taxonomy", {{"aliases", c.taxonomy.aliases}, {"rules", rules}}}};
}

void from_json(const json& j, MatchConfig& c) {
    c = MatchConfig{};
    if (j.contains("line_window")) c.line_window = j["line_window"].get<std::uint32_t>();
    if (j.contains("concern_rule")) {
        auto r = j["concern_rule"].get<std::string>();
        if (r == "category_only") c.concern_rule = ConcernRule::category_only;
        else if (r == "category_and_overlap") c.concern_rule = ConcernRule::category_and_overlap;
        else throw ConfigError("unknown concern_rule '" + r + "'");
    }
    if (j.contains("overlap_threshold")) c.overlap_threshold = j["overlap_threshold"].get<double>();
    if (j.contains("style_categories")) c.style_categories = j["style_categories"].get<std::set<std::string>>();
    if (j.contains("taxonomy")) {
        const auto& t = j["taxonomy"];
        if (t.contains("aliases")) c.taxonomy.aliases = t["aliases"].get<std::map<std::string, std::string>>();
        if (t.contains("rules")) {
            c.taxonomy.rules.clear();
            for (const auto& r : t["rules"]) {
                c.taxonomy.rules.push_back(
                    {r.at("category").get<std::string>(), r.at("keywords").get<std::vector<std::string>>()});
            }
        }
    }
    c.validate();
}

// -- records ----------------------------------------------------------------

namespace {
constexpr std::pair<Classification, std::string_view> kClassNames[] = {
    {Classification::convergence, "convergence"}, {Classification::unique, "unique"},
    {Classification::miss, "miss"},               {Classification::false_positive, "false_positive"},
    {Classification::excluded_style, "excluded_style"}, {Classification::shared, "shared"},
    {Classification::left_only, "left_only"},     {Classification::right_only, "right_only"},
};
constexpr std::pair<RecordSide, std::string_view> kSideNames[] = {
    {RecordSide::human, "human"}, {RecordSide::dispo, "dispo"}, {RecordSide::left, "left"}, {RecordSide::right, "right"}};
}  // namespace

std::string_view to_string(Classification c) {
    for (const auto& [k, v] : kClassNames) {
        if (k == c) return v;
    }
    return "unique";
}

std::optional<Classification> classification_from_string(std::string_view s) {
    for (const auto& [k, v] : kClassNames) {
        if (v == s) return k;
    }
    return std::nullopt;
}

void to_json(json& j, const MatchRecord& r) {
    std::string_view side;
    for (const auto& [k, v] : kSideNames) {
        if (k == r.side) side = v;
    }
    j = json{{"pr", {{"repo", r.pr.repo}, {"number", r.pr.number}}},
             {"side", side},
             {"left_id", r.left_id},
             {"right_id", r.right_id ? json(*r.right_id) : json(nullptr)},
             {"classification", to_string(r.classification)},
             {"basis", r.basis == Basis::adjudicated ? "adjudicated" : "auto"},
             {"rationale", r.rationale}};
    if (r.agreement) j["agreement"] = *r.agreement == Agreement::strict ? "strict" : "partial";
}

void from_json(const json& j, MatchRecord& r) {
    r = MatchRecord{};
    r.pr.repo = j.at("pr").at("repo").get<std::string>();
    r.pr.number = j.at("pr").at("number").get<std::uint32_t>();
    auto side = j.at("side").get<std::string>();
    bool found = false;
    for (const auto& [k, v] : kSideNames) {
        if (v == side) {
            r.side = k;
            found = true;
        }
    }
    if (!found) throw Error("match record: bad side '" + side + "'");
    r.left_id = j.at("left_id").get<std::string>();
    if (!j.at("right_id").is_null()) r.right_id = j["right_id"].get<std::string>();
    auto c = classification_from_string(j.at("classification").get<std::string>());
    if (!c) throw Error("match record: bad classification");
    r.classification = *c;
    r.basis = j.at("basis").get<std::string>() == "adjudicated" ? Basis::adjudicated : Basis::automatic;
    if (j.contains("agreement")) r.agreement = j["agreement"] == "strict" ? Agreement::strict : Agreement::partial;
    r.rationale = j.value("rationale", std::string());
}

void to_json(json& j, const AdjudicationOverride& o) {
    j = json::object();
    if (o.pr) j["pr"] = {{"repo", o.pr->repo}, {"number", o.pr->number}};
    j["left_id"] = o.left_id;
    j["right_id"] = o.right_id ? json(*o.right_id) : json(nullptr);
    j["forced_classification"] = to_string(o.forced_classification);
    j["rater"] = o.rater;
    j["note"] = o.note;
}

void from_json(const json& j, AdjudicationOverride& o) {
    o = AdjudicationOverride{};
    if (j.contains("pr") && !j["pr"].is_null()) {
        o.pr = PrKey{j["pr"].at("repo").get<std::string>(), j["pr"].at("number").get<std::uint32_t>()};
    }
    o.left_id = j.at("left_id").get<std::string>();
    if (j.contains("right_id") && !j["right_id"].is_null()) o.right_id = j["right_id"].get<std::string>();
    auto c = classification_from_string(j.at("forced_classification").get<std::string>());
    if (!c) throw ConfigError("override: unknown classification " + j["forced_classification"].dump());
    o.forced_classification = *c;
    o.rater = j.value("rater", std::string());
    o.note = j.value("note", std::string());
}

std::vector<AdjudicationOverride> parse_overrides(std::string_view jsonl) {
    std::vector<AdjudicationOverride> out;
    std::istringstream in{std::string(jsonl)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ConfigError("adjudication line " + std::to_string(lineno) + " is not JSON");
        try {
            out.push_back(j.get<AdjudicationOverride>());
        } catch (const json::exception& e) {
            throw ConfigError("adjudication line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<AdjudicationOverride> load_overrides(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read adjudication file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_overrides(ss.str());
}

void append_override(const std::filesystem::path& path, const AdjudicationOverride& o) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw ConfigError("cannot append to adjudication file " + path.string());
    out << json(o).dump() << '\n';
}

// -- matching ---------------------------------------------------------------

std::set<std::string> content_tokens(std::string_view claim) {
    static const std::regex location(
        "[A-Za-z0-9_./\\-]*[A-Za-z0-9_]\\.(?:py|go|java|kt|scala|c|cc|cpp|cxx|h|hh|hpp|rs|rb|js|ts|tsx|jsx|tf|hcl|"
        "bzl|bazel|proto|yaml|yml|json|toml|sh|md|txt|cfg|ini|sql|cs|swift|php|gradle|xml|mod|sum|tfvars)\\b"
        "(?::\\d+(?:-\\d+)?)?|\\S+/\\S+|\\bL\\d+\\b",
        std::regex::icase);
    // Every alternative needs a '.', a '/' or an L followed by a digit.
    bool may_match = claim.find_first_of("./") != std::string_view::npos;
    for (std::size_t i = 0; !may_match && i + 1 < claim.size(); ++i) {
        may_match = (claim[i] == 'L' || claim[i] == 'l') && std::isdigit(static_cast<unsigned char>(claim[i + 1]));
    }
    std::string text = may_match ? std::regex_replace(std::string(claim), location, " ") : std::string(claim);
    std::set<std::string> out;
    for (auto& w : words(text)) {
        if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
            continue;
        }
        if (stopwords().count(w)) continue;
        out.insert(std::move(w));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : a) inter += b.count(t);
    return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

bool same_concern(const Finding& a, const Finding& b, const MatchConfig& cfg) {
    return concern_match(keyed(a, cfg), keyed(b, cfg), cfg);
}

bool match_pair(const Finding& a, const Finding& b, const MatchConfig& cfg) {
    return location_match(a, b, cfg) && same_concern(a, b, cfg);
}

std::vector<MatchRecord> classify_against_human(const ReviewRun& dispo, const std::vector<Finding>& human,
                                                const MatchConfig& cfg,
                                                const std::vector<AdjudicationOverride>& overrides) {
    auto hs = keyed_sorted(human, cfg);
    auto ds = keyed_sorted(dispo.findings, cfg);
    std::map<std::string, std::size_t> h_index, d_index;
    for (std::size_t i = 0; i < hs.size(); ++i) h_index[hs[i].f->id] = i;
    for (std::size_t i = 0; i < ds.size(); ++i) d_index[ds[i].f->id] = i;

    std::vector<std::vector<bool>> edge(hs.size(), std::vector<bool>(ds.size(), false));
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (std::size_t k = 0; k < ds.size(); ++k) edge[i][k] = keyed_match(hs[i], ds[k], cfg);
    }

    // Overrides first edit pairs, then force classifications.
    std::set<std::string> adjudicated;
    for (const auto& o : overrides) {
        bool left_h = h_index.count(o.left_id) != 0, left_d = d_index.count(o.left_id) != 0;
        if (!left_h && !left_d) {
            throw DanglingOverride("override names unknown finding '" + o.left_id + "' on " + dispo.pr.str());
        }
        if (o.right_id) {
            bool right_ok = left_h ? d_index.count(*o.right_id) != 0 : h_index.count(*o.right_id) != 0;
            if (!right_ok) {
                throw DanglingOverride("override pairs '" + o.left_id + "' with unknown finding '" + *o.right_id +
                                       "' on " + dispo.pr.str());
            }
            auto hi = left_h ? h_index[o.left_id] : h_index[*o.right_id];
            auto di = left_h ? d_index[*o.right_id] : d_index[o.left_id];
            edge[hi][di] = o.forced_classification == Classification::convergence;
            adjudicated.insert(*o.right_id);
        }
        const auto c = o.forced_classification;
        bool valid = left_h ? (c == Classification::convergence || c == Classification::miss ||
                               c == Classification::excluded_style)
                            : (c == Classification::convergence || c == Classification::unique ||
                               c == Classification::false_positive);
        if (!valid) {
            throw ConfigError("override cannot classify '" + o.left_id + "' as " + std::string(to_string(c)));
        }
        adjudicated.insert(o.left_id);
    }

    std::vector<MatchRecord> out;
    out.reserve(hs.size() + ds.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        MatchRecord r;
        r.pr = dispo.pr;
        r.side = RecordSide::human;
        r.left_id = hs[i].f->id;
        std::optional<std::size_t> pick;
        for (std::size_t k = 0; k < ds.size(); ++k) {
            if (!edge[i][k]) continue;
            // ds is id-ordered, so strict '<' keeps the lowest id on ties
            if (!pick || distance(*hs[i].f, *ds[k].f) < distance(*hs[i].f, *ds[*pick].f)) pick = k;
        }
        if (pick) {
            r.classification = Classification::convergence;
            r.right_id = ds[*pick].f->id;
            r.rationale = pair_rationale(hs[i], ds[*pick]);
        } else if (cfg.style_categories.count(hs[i].category)) {
            r.classification = Classification::excluded_style;
            r.rationale = "unmatched style comment (category '" + hs[i].category + "')";
        } else {
            r.classification = Classification::miss;
            r.rationale = hs[i].f->location ? "no disposition finding with the same location and concern"
                                            : "no location; matchable only by adjudication";
        }
        r.basis = adjudicated.count(r.left_id) ? Basis::adjudicated : Basis::automatic;
        out.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < ds.size(); ++k) {
        MatchRecord r;
        r.pr = dispo.pr;
        r.side = RecordSide::dispo;
        r.left_id = ds[k].f->id;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < hs.size(); ++i) {
            if (!edge[i][k]) continue;
            if (!pick || distance(*ds[k].f, *hs[i].f) < distance(*ds[k].f, *hs[*pick].f)) pick = i;
        }
        if (pick) {
            r.classification = Classification::convergence;
            r.right_id = hs[*pick].f->id;
            r.rationale = pair_rationale(ds[k], hs[*pick]);
        } else {
            r.classification = Classification::unique;
            r.rationale = ds[k].f->location ? "no human finding with the same location and concern"
                                            : "no location; matchable only by adjudication";
        }
        r.basis = adjudicated.count(r.left_id) ? Basis::adjudicated : Basis::automatic;
        out.push_back(std::move(r));
    }

    for (const auto& o : overrides) {
        for (auto& r : out) {
            if (r.left_id != o.left_id) continue;
            r.classification = o.forced_classification;
            if (o.right_id) r.right_id = o.right_id;
            else if (o.forced_classification != Classification::convergence) r.right_id.reset();
            r.basis = Basis::adjudicated;
            r.rationale = "adjudicated" + (o.rater.empty() ? std::string() : " by " + o.rater) +
                          (o.note.empty() ? std::string() : ": " + o.note);
        }
    }
    return out;
}

SplitResult three_way_split(const ReviewRun& dispo, const ReviewRun& generic, const MatchConfig& cfg) {
    auto ds = keyed_sorted(dispo.findings, cfg);
    auto gs = keyed_sorted(generic.findings, cfg);
    std::vector<bool> d_used(ds.size()), g_used(gs.size());
    auto pairs = greedy_pairs(
        ds, gs, [&](const Keyed& a, const Keyed& b) { return keyed_match(a, b, cfg); }, d_used, g_used);

    SplitResult res;
    std::map<std::size_t, std::size_t> d_to_g, g_to_d;
    for (const auto& p : pairs) {
        d_to_g[p.left] = p.right;
        g_to_d[p.right] = p.left;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        MatchRecord r;
        r.pr = dispo.pr;
        r.side = RecordSide::left;
        r.left_id = ds[i].f->id;
        if (auto it = d_to_g.find(i); it != d_to_g.end()) {
            r.classification = Classification::shared;
            r.right_id = gs[it->second].f->id;
            r.agreement = Agreement::strict;
            r.rationale = pair_rationale(ds[i], gs[it->second]);
            ++res.shared;
        } else {
            r.classification = Classification::left_only;
            r.rationale = "not produced by the generic review";
            ++res.left_only;
        }
        res.records.push_back(std::move(r));
    }
    for (std::size_t j = 0; j < gs.size(); ++j) {
        MatchRecord r;
        r.pr = generic.pr;
        r.side = RecordSide::right;
        r.left_id = gs[j].f->id;
        if (auto it = g_to_d.find(j); it != g_to_d.end()) {
            r.classification = Classification::shared;
            r.right_id = ds[it->second].f->id;
            r.agreement = Agreement::strict;
            r.rationale = pair_rationale(gs[j], ds[it->second]);
        } else {
            r.classification = Classification::right_only;
            r.rationale = "not produced by the disposition review";
            ++res.right_only;
        }
        res.records.push_back(std::move(r));
    }
    return res;
}

std::optional<double> ClusterResult::multi_lens_rate() const {
    if (clusters.empty()) return std::nullopt;
    return static_cast<double>(multi_lens) / static_cast<double>(clusters.size());
}

ClusterResult cluster_inter_disposition(const ReviewRun& run, const MatchConfig& cfg) {
    auto fs = keyed_sorted(run.findings, cfg);
    std::vector<std::size_t> parent(fs.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t i = 0; i < fs.size(); ++i) {
        for (std::size_t k = i + 1; k < fs.size(); ++k) {
            if (!keyed_match(fs[i], fs[k], cfg)) continue;
            auto a = find(i), b = find(k);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < fs.size(); ++i) groups[find(i)].push_back(i);
    ClusterResult res;
    for (const auto& [root, members] : groups) {
        std::vector<std::string> ids;
        std::set<Source> lenses;
        for (auto m : members) {
            ids.push_back(fs[m].f->id);
            lenses.insert(fs[m].f->source);
        }
        if (lenses.size() >= 2) ++res.multi_lens;
        res.clusters.push_back(std::move(ids));
    }
    return res;
}

std::optional<double> ModelComparison::strict_rate() const {
    if (union_size() == 0) return std::nullopt;
    return static_cast<double>(strict) / static_cast<double>(union_size());
}

std::optional<double> ModelComparison::partial_plus_rate() const {
    if (union_size() == 0) return std::nullopt;
    return static_cast<double>(strict + partial) / static_cast<double>(union_size());
}

ModelComparison cross_model_compare(const ReviewRun& a, const ReviewRun& b, const MatchConfig& cfg) {
    auto as = keyed_sorted(a.findings, cfg);
    auto bs = keyed_sorted(b.findings, cfg);
    std::vector<bool> a_used(as.size()), b_used(bs.size());
    auto strict = greedy_pairs(
        as, bs, [&](const Keyed& x, const Keyed& y) { return keyed_match(x, y, cfg); }, a_used, b_used);
    auto partial = greedy_pairs(
        as, bs, [&](const Keyed& x, const Keyed& y) { return location_match(*x.f, *y.f, cfg); }, a_used, b_used);

    ModelComparison res;
    res.strict = strict.size();
    res.partial = partial.size();
    std::map<std::size_t, std::pair<std::size_t, Agreement>> a_pair, b_pair;
    for (const auto& p : strict) {
        a_pair[p.left] = {p.right, Agreement::strict};
        b_pair[p.right] = {p.left, Agreement::strict};
    }
    for (const auto& p : partial) {
        a_pair[p.left] = {p.right, Agreement::partial};
        b_pair[p.right] = {p.left, Agreement::partial};
    }
    auto emit = [&](const std::vector<Keyed>& self, const std::vector<Keyed>& other,
                    const std::map<std::size_t, std::pair<std::size_t, Agreement>>& pairs, RecordSide side,
                    Classification alone, const PrKey& pr, std::size_t& only) {
        for (std::size_t i = 0; i < self.size(); ++i) {
            MatchRecord r;
            r.pr = pr;
            r.side = side;
            r.left_id = self[i].f->id;
            if (auto it = pairs.find(i); it != pairs.end()) {
                const auto& o = other[it->second.first];
                r.classification = Classification::shared;
                r.right_id = o.f->id;
                r.agreement = it->second.second;
                r.rationale = (it->second.second == Agreement::strict ? "strict: " : "partial: ") +
                              pair_rationale(self[i], o);
            } else {
                r.classification = alone;
                r.rationale = "no finding at the same location in the other run";
                ++only;
            }
            res.records.push_back(std::move(r));
        }
    };
    emit(as, bs, a_pair, RecordSide::left, Classification::left_only, a.pr, res.a_only);
    emit(bs, as, b_pair, RecordSide::right, Classification::right_only, b.pr, res.b_only);
    return res;
}

Tally& Tally::operator+=(const Tally& o) {
    human += o.human;
    convergence += o.convergence;
    miss += o.miss;
    excluded_style += o.excluded_style;
    dispo += o.dispo;
    matched += o.matched;
    unique += o.unique;
    false_positive += o.false_positive;
    return *this;
}

Tally tally(const std::vector<MatchRecord>& records) {
    Tally t;
    for (const auto& r : records) {
        if (r.side == RecordSide::human) {
            ++t.human;
            if (r.classification == Classification::convergence) ++t.convergence;
            else if (r.classification == Classification::excluded_style) ++t.excluded_style;
            else ++t.miss;
        } else if (r.side == RecordSide::dispo) {
            ++t.dispo;
            if (r.classification == Classification::convergence) {
                ++t.matched;
            } else {
                ++t.unique;
                if (r.classification == Classification::false_positive) ++t.false_positive;
            }
        }
    }
    return t;
}

}  // namespace lensreview
