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

// Writes the study fixtures: synthetic PR records whose human comments and
// recorded model responses reproduce fixed target counts.
//
//   tests/fixtures/study/    50 PRs, disposition + generic responses
//   tests/fixtures/per_lens/ same PRs, per-lens variant of the responses
//   tests/fixtures/study2/   3 PRs, two models
//
// Usage: make_study_fixtures [OUT_DIR]   (default: tests/fixtures)
//
// Every emitted response is parsed and matched with the library before it is
// written; the tool exits non-zero if any target count is missed.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lensreview/diff.hpp"
#include "lensreview/ingest.hpp"
#include "lensreview/lens.hpp"
#include "lensreview/match.hpp"
#include "lensreview/pipeline.hpp"
#include "lensreview/prompt.hpp"

using namespace lensreview;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) {
    std::cerr << "make_study_fixtures: " << msg << "\n";
    std::exit(1);
}

void check(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

// -- issue themes -----------------------------------------------------------

struct Theme {
    std::string category;
    std::string human;    // reviewer comment
    std::string d1;       // disposition phrasing
    std::string d2;       // second lens, same concern
    std::string generic;  // generic-prompt phrasing
};

// "{f}" is replaced by the identifier under review.
const std::vector<Theme>& themes() {
    static const std::vector<Theme> t = {
        {"error-handling", "This swallows the error returned by {f}; a failed write is reported as success.",
         "{f} swallows the error from the write and reports success to the caller.",
         "a failed write inside {f} is swallowed, so the caller sees success.",
         "{f} swallows the write error and reports success."},
        {"concurrency", "Possible race: {f} mutates the shared map without holding the lock.",
         "{f} writes the shared map outside the lock; concurrent callers race.",
         "the shared map in {f} is mutated without the lock held, a race under concurrent calls.",
         "race condition: {f} mutates the shared map without the lock."},
        {"migration", "Renaming {f} leaves existing deployments pointing at the old resource; this needs a migration.",
         "{f} is renamed without a migration; production references to the old resource dangle.",
         "existing deployments still reference the old resource after {f} is renamed; no migration path.",
         "{f} rename needs a migration for deployments that reference the old resource."},
        {"security", "{f} passes user-controlled input into the shell command; this is an injection risk.",
         "{f} builds the shell command from user-controlled input; command injection risk.",
         "user-controlled input reaches the shell command in {f} unescaped, an injection vector.",
         "injection risk: {f} passes user-controlled input to the shell command."},
        {"logic", "The condition in {f} is inverted, so the fallback branch runs on success.",
         "the condition in {f} is inverted; the fallback branch executes on success instead of failure.",
         "{f} takes the fallback branch on success because its condition is inverted.",
         "inverted condition in {f} runs the fallback branch on success."},
        {"naming", "The name {f} says replace but the method appends; callers will misread it.",
         "{f} name implies replace while the behavior appends to the existing list.",
         "callers reading the name {f} expect replace semantics, but the method appends.",
         "the name {f} suggests replace but the method appends."},
        {"validation", "{f} assumes the header is always present; validate it before use.",
         "{f} assumes the header is present without validating it; unverified assumption.",
         "the header read by {f} is used without validation; the assumption that it is present is unverified.",
         "{f} assumes the header is present and never validates it."},
        {"testing", "No test covers the empty list path in {f}.",
         "no test exercises the empty list path through {f}.",
         "the empty list path in {f} has no test coverage.",
         "missing test for the empty list path in {f}."},
        {"performance", "{f} allocates a new buffer on every call inside the loop; this is slow for large batches.",
         "{f} allocates a fresh buffer per loop iteration; slow on large batches.",
         "buffer allocation inside the loop in {f} makes large batches slow.",
         "{f} allocates a buffer on every loop iteration, slow for large batches."},
        {"documentation", "The docstring on {f} still describes the previous return shape.",
         "docstring for {f} describes the previous return shape, not the current one.",
         "{f} docstring is stale: it documents the previous return shape.",
         "stale docstring on {f} describes the previous return shape."},
        {"configuration", "{f} hardcodes the timeout default instead of reading the setting.",
         "{f} hardcodes the timeout default rather than reading the configured setting.",
         "the timeout in {f} ignores the setting and uses a hardcoded default.",
         "{f} hardcodes the timeout default and ignores the setting."},
        {"dead-code", "{f} is never called after this change and can be deleted.",
         "{f} is never called after this change; delete it.",
         "nothing calls {f} after this change, so it is dead and can be deleted.",
         "{f} appears unused after this change and can be deleted."},
        {"dependency", "This bumps the {f} version without pinning the transitive dependency.",
         "{f} version bump leaves the transitive dependency unpinned.",
         "the transitive dependency of {f} is not pinned after the version bump.",
         "{f} version bump does not pin the transitive dependency."},
    };
    return t;
}

const std::vector<std::string>& style_comments() {
    static const std::vector<std::string> s = {
        "Formatting nit: the wrapping around {f} differs from the rest of the file.",
        "Typo in the {f} message text.",
        "Import order around {f} does not follow the project convention.",
        "nit: trailing space after {f}.",
    };
    return s;
}

std::string fill(std::string text, const std::string& f) {
    for (auto pos = text.find("{f}"); pos != std::string::npos; pos = text.find("{f}", pos + f.size())) {
        text.replace(pos, 3, f);
    }
    return text;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

// -- repositories -----------------------------------------------------------

struct RepoCounts {
    int u1, u2, c11, c21;      // issue kinds, see below
    int conv, style, miss;     // human side; conv == c11 + c21
};

struct Repo {
    std::string name;
    std::string short_name;
    std::string language;
    std::string era;
    std::string visibility;
    std::vector<std::uint32_t> numbers;
    std::vector<std::string> files;
    bool snake_case;
    RepoCounts counts;
};

// u1: one lens, no human match. u2: two lenses on the same unmatched issue.
// c11: one lens, matches a human comment. c21: two lenses, both match it.
std::vector<Repo> repos() {
    auto seq = [](std::vector<std::uint32_t> fixed, std::uint32_t start, std::uint32_t step, std::size_t n) {
        for (std::uint32_t v = start; fixed.size() < n; v += step) {
            if (std::find(fixed.begin(), fixed.end(), v) == fixed.end()) fixed.push_back(v);
        }
        return fixed;
    };
    return {
        {"python-sfdc-bazel", "python", "Python", "post_ai", "internal", seq({1852, 1105}, 1613, 17, 19),
         {"tools/bazel/resolver.py", "tools/bazel/headers.py", "services/edge/router.py"}, true,
         {151, 16, 60, 3, 63, 4, 43}},
        {"soter", "soter", "Go", "pre_ai", "internal", seq({}, 212, 23, 6),
         {"pkg/scanner/engine.go", "pkg/report/writer.go"}, false, {46, 5, 23, 1, 24, 1, 15}},
        {"go-sfdc-bazel", "go", "Go", "post_ai", "internal", seq({}, 318, 11, 2),
         {"internal/rules/graph.go", "internal/rules/emit.go"}, false, {11, 1, 6, 0, 6, 0, 4}},
        {"threatlock", "threatlock", "HCL", "post_ai", "internal", seq({32700}, 32688, 9, 2),
         {"modules/vault/main.tf", "modules/vault/variables.tf"}, true, {11, 1, 6, 0, 6, 1, 5}},
        {"kubernetes/kubernetes", "k8s", "Go", "post_ai", "public", seq({138852}, 137411, 233, 7),
         {"pkg/kubelet/volumemanager/reconciler.go", "pkg/controller/endpoints/endpoints_controller.go"}, false,
         {62, 6, 22, 2, 24, 2, 19}},
        {"envoyproxy/envoy", "envoy", "C++", "post_ai", "public", seq({44942}, 44877, 29, 2),
         {"source/extensions/filters/http/ext_proc/processor.cc", "source/common/router/router.cc"}, false,
         {27, 3, 0, 0, 0, 1, 13}},
        {"elastic/elasticsearch", "elastic", "Java", "post_ai", "public", seq({130706}, 129950, 61, 12),
         {"server/src/main/java/org/elasticsearch/index/mapper/FieldMapper.java",
          "server/src/main/java/org/elasticsearch/action/bulk/BulkProcessor.java"},
         false, {65, 7, 19, 1, 20, 3, 57}},
    };
}

// Per-lens totals and first-match counts (cynic, skeptic, nyaya, confucian).
constexpr std::array<int, 4> kLensTotal = {172, 152, 140, 137};
constexpr std::array<int, 4> kLensFirst = {42, 44, 31, 26};
// c21 second findings; any split summing to 7 keeps the totals above.
constexpr std::array<int, 4> kLensSecond = {1, 2, 2, 2};
constexpr int kMaxPerLens = 7;

constexpr std::string_view kBotHandles[] = {"dx-prizm[bot]", "sfci-github-app", "k8s-ci-robot", "elasticsearchmachine",
                                           "github-actions", "gemini-code-assist[bot]", "Copilot"};
constexpr std::string_view kAcks[] = {"Done.", "fixed, thanks", "good catch", "ack", "Updated."};

const std::array<std::string, 16>& verbs() {
    static const std::array<std::string, 16> v = {"parse", "load", "resolve", "flush", "merge", "emit", "build", "fetch",
                                                  "apply", "render", "sync", "encode", "index", "route", "scan", "store"};
    return v;
}
const std::array<std::string, 16>& nouns() {
    static const std::array<std::string, 16> n = {"header", "target", "payload", "record", "batch", "mapping",
                                                  "rule", "manifest", "shard", "session", "bucket", "digest",
                                                  "policy", "entry", "report", "snapshot"};
    return n;
}

std::string identifier(bool snake, std::size_t k) {
    const auto& v = verbs()[k % 16];
    const auto& n = nouns()[(k / 16 + k * 7) % 16];
    auto suffix = std::to_string(k / 256 + 1);
    if (snake) return v + "_" + n + (k >= 256 ? "_" + suffix : "");
    std::string cn = n;
    cn[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cn[0])));
    return v + cn + (k >= 256 ? suffix : "");
}

// Deterministic Fisher-Yates; std::shuffle's algorithm is unspecified.
template <typename T>
void shuffle(std::vector<T>& v, std::uint32_t seed) {
    std::mt19937 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

// Largest-remainder split of `total` over `weights`, each share capped at `caps`.
std::vector<int> apportion(int total, const std::vector<int>& weights, const std::vector<int>& caps) {
    std::vector<int> out(weights.size(), 0);
    long wsum = 0;
    for (int w : weights) wsum += w;
    std::vector<std::pair<double, std::size_t>> rem;
    int given = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double exact = wsum ? static_cast<double>(total) * weights[i] / static_cast<double>(wsum) : 0.0;
        out[i] = std::min(caps[i], static_cast<int>(exact));
        given += out[i];
        rem.push_back({exact - out[i], i});
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    while (given < total) {
        bool progressed = false;
        for (auto& [r, i] : rem) {
            if (given == total) break;
            if (out[i] < caps[i]) {
                ++out[i];
                ++given;
                progressed = true;
            }
        }
        check(progressed, "apportion: caps too small");
    }
    return out;
}

// -- PR model ---------------------------------------------------------------

enum class Kind { u1, u2, c11, c21, miss, style, generic_only };

struct Issue {
    Kind kind;
    std::size_t theme;
    std::string fn;
    std::size_t slot;
    std::size_t shifted_slot = 0;  // c21 only: where the per_lens variant moves the second finding
    std::vector<Source> lenses;    // empty for human-only and generic-only issues
    bool mirrored = false;         // a generic finding restates it
};

struct Slot {
    std::string file;
    std::uint32_t line;
};

struct PrPlan {
    const Repo* repo;
    std::uint32_t number;
    std::vector<Issue> issues;
    std::vector<Slot> slots;
    bool has_generic = false;
    int shared_target = 0;
    int generic_only_target = 0;
    PullRequestRecord record;
};

std::string fixture_name(const PrPlan& p) { return p.repo->short_name + "-" + std::to_string(p.number) + ".json"; }

std::string code_line(const Repo& r, const std::string& fn, int variant) {
    const auto& lang = r.language;
    if (lang == "Python") {
        return variant ? "    result = " + fn + "(payload, strict=True)" : "    result = " + fn + "(payload)";
    }
    if (lang == "HCL") {
        return variant ? "  " + fn + " = var." + fn + "_override" : "  " + fn + " = var." + fn;
    }
    if (lang == "Java") {
        return variant ? "        var result = " + fn + "(request, true);" : "        var result = " + fn + "(request);";
    }
    if (lang == "C++") {
        return variant ? "  auto result = " + fn + "(request, true);" : "  auto result = " + fn + "(request);";
    }
    return variant ? "\tresult, err := " + fn + "(ctx, req, true)" : "\tresult, err := " + fn + "(ctx, req)";
}

// One hunk per slot: three context lines, one removed, two added. The
// slot's line is the first added line.
std::string build_diff(const PrPlan& p, const std::map<std::size_t, std::string>& fn_at_slot) {
    std::map<std::string, std::vector<std::size_t>> by_file;
    for (std::size_t i = 0; i < p.slots.size(); ++i) by_file[p.slots[i].file].push_back(i);
    std::ostringstream d;
    for (const auto& file : p.repo->files) {
        auto it = by_file.find(file);
        if (it == by_file.end()) continue;
        d << "diff --git a/" << file << " b/" << file << "\n";
        d << "index 3f1c2aa..9be04d1 100644\n";
        d << "--- a/" << file << "\n+++ b/" << file << "\n";
        std::uint32_t shift = 0;  // each hunk adds one line
        for (auto idx : it->second) {
            const auto& s = p.slots[idx];
            auto fn = fn_at_slot.count(idx) ? fn_at_slot.at(idx) : "helper" + std::to_string(idx);
            auto start = s.line - 3;
            d << "@@ -" << start - shift++ << ",5 +" << start << ",6 @@\n";
            d << "     // context " << start << "\n";
            d << "     // context " << start + 1 << "\n";
            d << "     // context " << start + 2 << "\n";
            d << "-" << code_line(*p.repo, fn, 0) << "\n";
            d << "+" << code_line(*p.repo, fn, 1) << "\n";
            d << "+" << code_line(*p.repo, fn, 0) << "\n";
            d << "     // context " << start + 3 << "\n";
        }
    }
    return d.str();
}

std::string loc(const Slot& s, std::uint32_t offset = 0) { return s.file + ":" + std::to_string(s.line + offset); }

std::string iso_time(std::uint32_t number, std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "2025-%02u-%02uT%02zu:%02zu:00Z", number % 12 + 1, number % 27 + 1, 9 + i / 60,
                  i % 60);
    return buf;
}

// -- response rendering -----------------------------------------------------

constexpr std::array<std::string_view, 4> kLensHeadings = {"Lens 1: Cynic", "Lens 2: Skeptic", "Lens 3: Nyaya",
                                                           "Lens 4: Confucian"};

struct Emitted {
    Source lens;
    std::size_t order;  // slot-based order inside the lens section
    std::string text;
};

std::size_t lens_index(Source s) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (kReviewerLenses[i] == s) return i;
    }
    fail("not a lens");
}

std::string render_disposition(const std::vector<Emitted>& items) {
    std::array<std::vector<const Emitted*>, 4> sections;
    for (const auto& e : items) sections[lens_index(e.lens)].push_back(&e);
    std::ostringstream out;
    out << "# Disposition review\n\n";
    for (std::size_t i = 0; i < 4; ++i) {
        auto& sec = sections[i];
        std::stable_sort(sec.begin(), sec.end(), [](auto* a, auto* b) { return a->order < b->order; });
        out << "## " << kLensHeadings[i] << "\n\n";
        if (sec.empty()) out << "Nothing in this diff warrants a finding under this lens.\n";
        for (auto* e : sec) out << "- " << e->text << "\n";
        out << "\n";
    }
    out << "## Self-check\n\nNo lens exceeded seven findings; nothing was trimmed.\n";
    return out.str();
}

std::string dispo_item(const Theme& t, const std::string& phrasing, const std::string& fn, const std::string& where,
                       Source lens) {
    auto text = "[" + t.category + "] `" + where + "`: " + capitalize(fill(phrasing, fn));
    if (lens == Source::skeptic) text += " Confidence: medium.";
    return text;
}

std::string render_generic(const std::vector<std::pair<std::size_t, std::string>>& items) {
    auto sorted = items;
    std::stable_sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::ostringstream out;
    out << "Here are the issues I found in this diff:\n\n";
    for (std::size_t i = 0; i < sorted.size(); ++i) out << i + 1 << ". " << sorted[i].second << "\n";
    if (sorted.empty()) out << "No issues found.\n";
    return out.str();
}

// -- planning ---------------------------------------------------------------

struct LensQuota {
    std::array<int, 4> first = kLensFirst;
    std::array<int, 4> second = kLensSecond;
    std::array<int, 4> unmatched{};
    LensQuota() {
        for (std::size_t i = 0; i < 4; ++i) unmatched[i] = kLensTotal[i] - kLensFirst[i] - kLensSecond[i];
    }
};

Source pick_lens(std::array<int, 4>& pool, std::array<int, 4>& used, const std::vector<Source>& exclude) {
    int best = -1;
    for (std::size_t i = 0; i < 4; ++i) {
        auto s = kReviewerLenses[i];
        if (std::find(exclude.begin(), exclude.end(), s) != exclude.end()) continue;
        if (pool[i] <= 0 || used[i] >= kMaxPerLens) continue;
        if (best < 0 || pool[i] > pool[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    check(best >= 0, "lens allocation infeasible");
    --pool[static_cast<std::size_t>(best)];
    ++used[static_cast<std::size_t>(best)];
    return kReviewerLenses[static_cast<std::size_t>(best)];
}

std::vector<PrPlan> plan_study() {
    static const std::vector<Repo> all = repos();
    std::vector<PrPlan> plans;
    LensQuota quota;
    std::size_t fn_counter = 0;
    for (const auto& repo : all) {
        const auto n = repo.numbers.size();
        auto split = [&](int total) { return apportion(total, std::vector<int>(n, 1), std::vector<int>(n, total)); };
        // Uneven review depth: some PRs get a single comment, others many.
        std::vector<int> depth(n);
        for (std::size_t k = 0; k < n; ++k) depth[k] = static_cast<int>((k * 7 + 3) % 11);
        auto deep = [&](int total) { return apportion(total, depth, std::vector<int>(n, total)); };
        auto u1 = split(repo.counts.u1), u2 = split(repo.counts.u2), c11 = split(repo.counts.c11),
             c21 = split(repo.counts.c21), style = split(repo.counts.style), miss = deep(repo.counts.miss);
        for (std::size_t k = 0; k < n; ++k) {
            PrPlan p;
            p.repo = &repo;
            p.number = repo.numbers[k];
            auto add = [&](Kind kind, int count) {
                for (int i = 0; i < count; ++i) p.issues.push_back(Issue{kind, 0, "", 0, 0, {}, false});
            };
            add(Kind::c21, c21[k]);
            add(Kind::u2, u2[k]);
            add(Kind::c11, c11[k]);
            add(Kind::u1, u1[k]);
            add(Kind::miss, miss[k]);
            add(Kind::style, style[k]);
            std::array<int, 4> used{};
            for (auto& is : p.issues) {
                switch (is.kind) {
                    case Kind::c21: {
                        auto a = pick_lens(quota.first, used, {});
                        auto b = pick_lens(quota.second, used, {a});
                        is.lenses = {a, b};
                        break;
                    }
                    case Kind::u2: {
                        auto a = pick_lens(quota.unmatched, used, {});
                        auto b = pick_lens(quota.unmatched, used, {a});
                        is.lenses = {a, b};
                        break;
                    }
                    case Kind::c11: is.lenses = {pick_lens(quota.first, used, {})}; break;
                    case Kind::u1: is.lenses = {pick_lens(quota.unmatched, used, {})}; break;
                    default: break;
                }
            }
            plans.push_back(std::move(p));
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        check(quota.first[i] == 0 && quota.second[i] == 0 && quota.unmatched[i] == 0, "lens quotas not exhausted");
    }

    // Generic baseline: every PR except the pre_ai repository and the first
    // ten python PRs (34 of 50).
    std::vector<std::size_t> baseline;
    int python_skipped = 0;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& r = *plans[i].repo;
        if (r.era == "pre_ai") continue;
        if (r.short_name == "python" && python_skipped < 10) {
            ++python_skipped;
            continue;
        }
        baseline.push_back(i);
    }
    check(baseline.size() == 34, "expected 34 baseline PRs");
    std::vector<int> weights, mirror_caps, big_caps;
    int dispo34 = 0;
    for (auto i : baseline) {
        int d = 0, issues = 0;
        for (const auto& is : plans[i].issues) {
            d += static_cast<int>(is.lenses.size());
            issues += !is.lenses.empty();
        }
        dispo34 += d;
        weights.push_back(d);
        mirror_caps.push_back(issues);
        big_caps.push_back(1000);
    }
    // shared : dispo_only : generic_only = 33 : 51 : 16 over the union.
    const double u = dispo34 / 0.84;
    const int shared = static_cast<int>(std::lround(0.33 * u));
    const int generic_only = static_cast<int>(std::lround(0.16 * u));
    auto shared_split = apportion(shared, weights, mirror_caps);
    auto gonly_split = apportion(generic_only, weights, big_caps);
    for (std::size_t k = 0; k < baseline.size(); ++k) {
        auto& p = plans[baseline[k]];
        p.has_generic = true;
        p.shared_target = shared_split[k];
        p.generic_only_target = gonly_split[k];
        for (int g = 0; g < p.generic_only_target; ++g) p.issues.push_back(Issue{Kind::generic_only, 0, "", 0, 0, {}, false});
    }

    // Themes, identifiers, slots.
    for (auto& p : plans) {
        shuffle(p.issues, p.number * 2654435761u);
        const bool snake = p.repo->snake_case;
        std::size_t next_slot = 0;
        for (auto& is : p.issues) {
            is.theme = (fn_counter * 5 + p.number) % themes().size();
            is.fn = identifier(snake, fn_counter++);
            is.slot = next_slot++;
        }
        for (auto& is : p.issues) {
            if (is.kind == Kind::c21) is.shifted_slot = next_slot++;
        }
        // Spare slots so every PR can host the three-language comparison.
        next_slot = std::max<std::size_t>(next_slot, 24);
        const auto nfiles = p.repo->files.size();
        for (std::size_t s = 0; s < next_slot; ++s) {
            p.slots.push_back(Slot{p.repo->files[s % nfiles], static_cast<std::uint32_t>(20 + 40 * (s / nfiles))});
        }
        int mirrored = 0;
        for (auto& is : p.issues) {
            if (!is.lenses.empty() && mirrored < p.shared_target) {
                is.mirrored = true;
                ++mirrored;
            }
        }
        check(mirrored == p.shared_target, "not enough issues to mirror");
    }
    return plans;
}

// -- PR records -------------------------------------------------------------

void build_record(PrPlan& p) {
    std::map<std::size_t, std::string> fn_at;
    for (const auto& is : p.issues) {
        fn_at[is.slot] = is.fn;
        if (is.kind == Kind::c21) fn_at[is.shifted_slot] = is.fn;
    }
    json j;
    j["repo"] = p.repo->name;
    j["number"] = p.number;
    j["language"] = p.repo->language;
    j["era"] = p.repo->era;
    j["visibility"] = p.repo->visibility;
    j["diff"] = build_diff(p, fn_at);
    json comments = json::array();
    std::size_t t = 0;
    auto comment = [&](const std::string& author, const std::string& body, bool is_author,
                       std::optional<Slot> where) {
        comments.push_back({{"author", author},
                            {"body", body},
                            {"is_pr_author", is_author},
                            {"path", where ? json(where->file) : json(nullptr)},
                            {"line", where ? json(where->line) : json(nullptr)},
                            {"side", where ? json("new") : json(nullptr)},
                            {"created_at", iso_time(p.number, t++)}});
    };
    const std::string author = p.repo->visibility == "internal" ? "pr-author-" + p.repo->short_name : "contributor42";
    comment(std::string(kBotHandles[p.number % 7]), "Build succeeded. Coverage report: 81.3% of changed lines.",
            false, std::nullopt);
    std::size_t n_style = 0, acked = 0;
    for (const auto& is : p.issues) {
        const auto& th = themes()[is.theme];
        const auto& slot = p.slots[is.slot];
        switch (is.kind) {
            case Kind::c11:
            case Kind::c21:
            case Kind::miss:
                comment("reviewer-" + std::to_string(is.slot % 3 + 1), capitalize(fill(th.human, is.fn)), false, slot);
                if (acked++ % 4 == 0) comment(author, std::string(kAcks[acked % 5]), true, slot);
                break;
            case Kind::style:
                comment("reviewer-1", fill(style_comments()[n_style++ % style_comments().size()], is.fn), false, slot);
                break;
            default: break;
        }
    }
    comment(std::string(kBotHandles[(p.number + 3) % 7]), "This pull request has been approved by all required reviewers.",
            false, std::nullopt);
    j["comments"] = comments;
    p.record = parse_fixture(j);
}

// -- responses --------------------------------------------------------------

enum class Variant { study, per_lens };

std::string dispo_response(const PrPlan& p, Variant v) {
    std::vector<Emitted> items;
    for (const auto& is : p.issues) {
        if (is.lenses.empty()) continue;
        const auto& th = themes()[is.theme];
        const auto& slot = p.slots[is.slot];
        items.push_back({is.lenses[0], is.slot, dispo_item(th, th.d1, is.fn, loc(slot), is.lenses[0])});
        if (is.lenses.size() == 2) {
            bool shifted = is.kind == Kind::c21 && v == Variant::per_lens;
            auto where = shifted ? loc(p.slots[is.shifted_slot]) : loc(slot, 2);
            items.push_back({is.lenses[1], shifted ? is.shifted_slot : is.slot,
                             dispo_item(th, th.d2, is.fn, where, is.lenses[1])});
        }
    }
    return render_disposition(items);
}

std::string generic_response(const PrPlan& p) {
    std::vector<std::pair<std::size_t, std::string>> items;
    for (const auto& is : p.issues) {
        if (!is.mirrored && is.kind != Kind::generic_only) continue;
        const auto& th = themes()[is.theme];
        items.push_back({is.slot, "`" + loc(p.slots[is.slot], 1) + "`: " + capitalize(fill(th.generic, is.fn))});
    }
    return render_generic(items);
}

// -- verification -----------------------------------------------------------

ReviewRun parse(const std::string& text, Condition c, const PrPlan& p) {
    RawResponse r;
    r.text = text;
    auto run = parse_findings(r, c, &p.record.diff);
    run.pr = p.record.key();
    if (c == Condition::disposition) run = apply_hamartia_gate(std::move(run), changed_line_count(p.record.diff));
    check(run.gated_out.empty(), p.record.key().str() + ": unexpected gating");
    return run;
}

void verify_study(const std::vector<PrPlan>& plans, const std::vector<std::string>& responses,
                  const std::vector<std::string>& generics, Variant v) {
    MatchConfig cfg;
    Tally total;
    std::array<int, 4> lens_total{}, lens_matched{};
    std::size_t clusters = 0, multi = 0, shared = 0, dpo = 0, gpo = 0;
    std::map<std::string, Tally> by_repo;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& p = plans[i];
        auto run = parse(responses[i], Condition::disposition, p);
        auto human = extract_human_findings(p.record);
        auto recs = classify_against_human(run, human, cfg);
        auto t = tally(recs);
        total += t;
        by_repo[p.repo->short_name] += t;
        std::map<std::string, Source> lens_of;
        for (const auto& f : run.findings) lens_of[f.id] = f.source;
        for (const auto& r : recs) {
            if (r.side != RecordSide::dispo) continue;
            auto li = lens_index(lens_of.at(r.left_id));
            ++lens_total[li];
            lens_matched[li] += r.classification == Classification::convergence;
        }
        auto c = cluster_inter_disposition(run, cfg);
        clusters += c.clusters.size();
        multi += c.multi_lens;
        if (p.has_generic) {
            auto g = parse(generics[i], Condition::generic, p);
            auto s = three_way_split(run, g, cfg);
            shared += s.shared;
            dpo += s.left_only;
            gpo += s.right_only;
        }
    }
    auto expect = [&](std::size_t got, std::size_t want, const std::string& what) {
        check(got == want, what + ": got " + std::to_string(got) + ", want " + std::to_string(want));
    };
    expect(total.dispo, 601, "dispo findings");
    expect(total.human, 311, "human findings");
    expect(total.convergence, 143, "convergence");
    expect(total.miss, 156, "miss");
    expect(total.excluded_style, 12, "excluded style");
    for (std::size_t l = 0; l < 4; ++l) expect(lens_total[l], kLensTotal[l], "lens total");
    if (v == Variant::study) {
        expect(total.matched, 150, "matched");
        expect(total.unique, 451, "unique");
        expect(clusters, 555, "clusters");
        expect(multi, 46, "multi-lens clusters");
        const auto u = static_cast<double>(shared + dpo + gpo);
        auto near = [&](std::size_t x, double want) {
            check(std::abs(100.0 * static_cast<double>(x) / u - want) <= 0.5, "baseline split off target");
        };
        near(shared, 33);
        near(dpo, 51);
        near(gpo, 16);
        for (const auto& r : repos()) {
            std::size_t want = static_cast<std::size_t>(r.counts.c11 + 2 * r.counts.c21);
            expect(by_repo[r.short_name].matched, want, r.short_name + " matched");
        }
    } else {
        expect(total.matched, 143, "matched");
        expect(total.unique, 458, "unique");
        for (std::size_t l = 0; l < 4; ++l) expect(lens_matched[l], kLensFirst[l], "lens matched");
    }
}

// -- study 2 ----------------------------------------------------------------

struct LangTarget {
    std::string short_name;
    std::uint32_t number;
    int strict, partial, a_only, b_only;
};

const std::vector<LangTarget>& study2_targets() {
    static const std::vector<LangTarget> t = {
        {"elastic", 130706, 2, 4, 8, 9},
        {"k8s", 138852, 4, 2, 2, 8},
        {"threatlock", 32700, 3, 5, 3, 4},
    };
    return t;
}

std::pair<std::string, std::string> study2_responses(const PrPlan& p, const LangTarget& t) {
    std::vector<Emitted> a, b;
    std::size_t slot = 0, na = 0, nb = 0;
    const auto& th = themes();
    auto lens_a = [&] { return kReviewerLenses[na++ % 4]; };
    auto lens_b = [&] { return kReviewerLenses[nb++ % 4]; };
    auto fn_of = [&](std::size_t s) { return identifier(p.repo->snake_case, 4000 + p.number % 97 + s * 3); };
    for (int i = 0; i < t.strict; ++i, ++slot) {
        const auto& tm = th[(slot + p.number) % th.size()];
        auto la = lens_a(), lb = lens_b();
        a.push_back({la, slot, dispo_item(tm, tm.d1, fn_of(slot), loc(p.slots[slot]), la)});
        b.push_back({lb, slot, dispo_item(tm, tm.d2, fn_of(slot), loc(p.slots[slot], 1), lb)});
    }
    for (int i = 0; i < t.partial; ++i, ++slot) {
        const auto& ta = th[(slot + p.number) % th.size()];
        const auto& tb = th[(slot + p.number + 5) % th.size()];
        auto la = lens_a(), lb = lens_b();
        a.push_back({la, slot, dispo_item(ta, ta.d1, fn_of(slot), loc(p.slots[slot]), la)});
        b.push_back({lb, slot, dispo_item(tb, tb.d1, fn_of(slot), loc(p.slots[slot], 3), lb)});
    }
    for (int i = 0; i < t.a_only; ++i, ++slot) {
        const auto& tm = th[(slot + p.number) % th.size()];
        auto la = lens_a();
        a.push_back({la, slot, dispo_item(tm, tm.d1, fn_of(slot), loc(p.slots[slot]), la)});
    }
    for (int i = 0; i < t.b_only; ++i, ++slot) {
        const auto& tm = th[(slot + p.number + 2) % th.size()];
        auto lb = lens_b();
        b.push_back({lb, slot, dispo_item(tm, tm.d2, fn_of(slot), loc(p.slots[slot]), lb)});
    }
    check(slot <= p.slots.size(), "study2: not enough slots");
    return {render_disposition(a), render_disposition(b)};
}

void verify_study2(const PrPlan& p, const LangTarget& t, const std::string& ra, const std::string& rb) {
    auto a = parse(ra, Condition::disposition, p);
    auto b = parse(rb, Condition::disposition, p);
    auto cmp = cross_model_compare(a, b, MatchConfig{});
    auto where = p.record.key().str() + " study2 ";
    check(static_cast<int>(cmp.strict) == t.strict, where + "strict");
    check(static_cast<int>(cmp.partial) == t.partial, where + "partial");
    check(static_cast<int>(cmp.a_only) == t.a_only, where + "a_only");
    check(static_cast<int>(cmp.b_only) == t.b_only, where + "b_only");
    check(check_framework_adherence(a).adherent && check_framework_adherence(b).adherent, where + "adherence");
}

// -- output -----------------------------------------------------------------

void write(const fs::path& p, const json& j) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    check(static_cast<bool>(out), "cannot write " + p.string());
    out << j.dump(2) << "\n";
}

json dataset_entry(const PrPlan& p, const std::string& prefix) {
    json e = {{"repo", p.repo->name}, {"number", p.number}, {"fixture", prefix + fixture_name(p)}};
    if (!p.has_generic) e["baseline"] = false;
    return e;
}

json manifest(json dataset, json models) {
    return {{"dataset", std::move(dataset)}, {"role_key", "reviewer"}, {"models", std::move(models)},
            {"output_dir", "out"}};
}

json mock_model(const std::string& model_id, const std::string& script) {
    return {{"provider_id", "mock"}, {"model_id", model_id}, {"script", script}};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("tests/fixtures");
    const auto registry = LensRegistry::builtin();
    const auto& role = registry.resolve_role("reviewer");
    const PromptForge forge;

    auto plans = plan_study();
    for (auto& p : plans) build_record(p);

    // Category and overlap sanity per theme, so a matched pair cannot fail
    // for textual reasons.
    MatchConfig cfg;
    for (const auto& t : themes()) {
        auto h = fill(t.human, "someName");
        check(cfg.taxonomy.categorize("", h) == t.category, "theme human text categorizes wrongly: " + h);
        check(cfg.taxonomy.categorize("", fill(t.generic, "someName")) == t.category,
              "theme generic text categorizes wrongly: " + t.generic);
        for (const auto& d : {t.d1, t.d2, t.generic}) {
            auto jac = jaccard(content_tokens(h), content_tokens(fill(d, "someName")));
            check(jac >= 0.2, "overlap too low for " + t.category + ": " + d);
        }
        check(jaccard(content_tokens(fill(t.d1, "x")), content_tokens(fill(t.d2, "x"))) >= 0.2,
              "d1/d2 overlap too low for " + t.category);
    }
    for (const auto& s : style_comments()) {
        check(cfg.taxonomy.categorize("", fill(s, "someName")) == "style", "style comment categorizes wrongly: " + s);
    }

    std::vector<std::string> dispo, per_lens, generic;
    json dispo_script = json::object(), per_lens_script = json::object();
    json dataset = json::array(), dataset5 = json::array();
    for (const auto& p : plans) {
        write(out / "study" / "prs" / fixture_name(p), fixture_to_json(p.record));
        auto dprompt = forge.render_disposition_prompt(role, p.record.diff);
        dispo.push_back(dispo_response(p, Variant::study));
        per_lens.push_back(dispo_response(p, Variant::per_lens));
        generic.push_back(p.has_generic ? generic_response(p) : std::string());
        dispo_script[dprompt.digest] = dispo.back();
        per_lens_script[dprompt.digest] = per_lens.back();
        if (p.has_generic) dispo_script[forge.render_generic_prompt(p.record.diff).digest] = generic.back();
        dataset.push_back(dataset_entry(p, "prs/"));
        dataset5.push_back(dataset_entry(p, "../study/prs/"));
    }
    verify_study(plans, dispo, generic, Variant::study);
    verify_study(plans, per_lens, generic, Variant::per_lens);

    write(out / "study" / "mock" / "claude-opus.json", {{"responses", dispo_script}});
    write(out / "study" / "manifest.json", manifest(dataset, json::array({mock_model("claude-opus", "mock/claude-opus.json")})));
    write(out / "per_lens" / "mock" / "claude-opus.json", {{"responses", per_lens_script}});
    write(out / "per_lens" / "manifest.json",
          manifest(dataset5, json::array({mock_model("claude-opus", "mock/claude-opus.json")})));

    json script_a = json::object(), script_b = json::object(), dataset2 = json::array();
    for (const auto& t : study2_targets()) {
        auto it = std::find_if(plans.begin(), plans.end(), [&](const PrPlan& p) {
            return p.repo->short_name == t.short_name && p.number == t.number;
        });
        check(it != plans.end(), "study2 PR missing: " + t.short_name);
        auto [ra, rb] = study2_responses(*it, t);
        verify_study2(*it, t, ra, rb);
        auto digest = forge.render_disposition_prompt(role, it->record.diff).digest;
        script_a[digest] = ra;
        script_b[digest] = rb;
        dataset2.push_back(dataset_entry(*it, "../study/prs/"));
    }
    write(out / "study2" / "mock" / "claude-opus.json", {{"responses", script_a}});
    write(out / "study2" / "mock" / "gpt-codex-5.3-xhigh.json", {{"responses", script_b}});
    write(out / "study2" / "manifest.json",
          manifest(dataset2, json::array({mock_model("claude-opus", "mock/claude-opus.json"),
                                          mock_model("gpt-codex-5.3-xhigh", "mock/gpt-codex-5.3-xhigh.json")})));

    std::cout << "wrote " << plans.size() << " PR fixtures to " << out.string() << "\n";
    return 0;
}
