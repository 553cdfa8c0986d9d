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

#include "lensreview/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "lensreview/error.hpp"

namespace lensreview {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t indent_of(std::string_view line) {
    std::size_t n = 0;
    for (char c : line) {
        if (c == ' ') ++n;
        else if (c == '\t') n += 4;
        else break;
    }
    return n;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size()) out.emplace_back(text.substr(pos));
            break;
        }
        auto line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.emplace_back(line);
        pos = nl + 1;
    }
    return out;
}

// Drops emphasis and code markup so headings and items compare on words.
std::string strip_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '`') continue;
        if ((s[i] == '*' || s[i] == '_') && i + 1 < s.size() && s[i + 1] == s[i]) {
            ++i;
            continue;
        }
        out.push_back(s[i]);
    }
    return std::string(trim(out));
}

struct LensName {
    Source source;
    std::vector<std::string> spellings;
};

const std::vector<LensName>& lens_names() {
    static const std::vector<LensName> names = {
        {Source::cynic, {"cynic"}},
        {Source::skeptic, {"skeptic", "sceptic"}},
        {Source::nyaya, {"nyaya", "ny\xc4\x81ya"}},
        {Source::confucian, {"confucian"}},
    };
    return names;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_word(const std::string& hay, const std::string& word) {
    for (auto pos = hay.find(word); pos != std::string::npos; pos = hay.find(word, pos + 1)) {
        bool left = pos == 0 || !is_word_char(hay[pos - 1]);
        auto end = pos + word.size();
        // "cynicism" and "skeptical" still name the lens
        bool right = end >= hay.size() || !is_word_char(hay[end]) || hay.compare(end, 3, "ism") == 0 ||
                     hay.compare(end, 2, "al") == 0;
        if (left && right) return true;
    }
    return false;
}

// A list-marked or bare line that consists only of a lens name, e.g.
// "LENS 1: CYNIC (Ruthless Subtractor)" or "1. **Nyaya**:".
const std::regex& bare_lens_heading() {
    static const std::regex re(
        "^(?:lens\\s*\\d+\\s*[:.)\\-]\\s*)?(?:the\\s+)?(?:cynic|skeptic|sceptic|nyaya|ny\xc4\x81ya|ny\xc4\x80ya|confucian)"
        "(?:\\s+lens)?(?:\\s*\\([^)]*\\))?(?:\\s+(?:findings|output|review|lens))?\\s*:?$",
        std::regex::icase);
    return re;
}

struct Heading {
    int level = 0;  // '#' count; 7 for headings recognised without '#'
    std::string text;
};

std::optional<Heading> as_heading(std::string_view raw) {
    auto line = trim(raw);
    if (line.empty()) return std::nullopt;
    if (line.front() == '#') {
        int level = 0;
        while (!line.empty() && line.front() == '#') {
            ++level;
            line.remove_prefix(1);
        }
        if (!line.empty() && !std::isspace(static_cast<unsigned char>(line.front()))) return std::nullopt;
        return Heading{level, strip_markup(line)};
    }
    auto plain = strip_markup(line);
    // Bare or list-marked line naming only a lens.
    std::string body = plain;
    static const std::regex marker("^(?:[-*+\xe2\x80\xa2]|\\d+[.)])\\s+");
    body = std::regex_replace(body, marker, "", std::regex_constants::format_first_only);
    body = std::string(trim(body));
    if (std::regex_match(body, bare_lens_heading())) return Heading{7, body};
    return std::nullopt;
}

struct RawItem {
    std::string text;
    std::size_t indent = 0;
    std::optional<Source> lens;
    std::optional<std::string> model_id;
};

// Returns the item content when `line` starts a list entry.
std::optional<std::string> item_start(std::string_view raw) {
    auto line = trim(raw);
    if (line.empty()) return std::nullopt;
    static const std::regex bullet("^(?:[-*+]|\xe2\x80\xa2)\\s+(.*)$");
    static const std::regex numbered("^\\d{1,3}[.)]\\s+(.*)$");
    static const std::regex id_item("^\"?(?:\\*\\*)?[A-Z]{1,3}-\\d+(?:\\*\\*)?\\s*[:.)]\\s*.*$");
    std::string s(line);
    std::smatch m;
    if (std::regex_match(s, m, bullet) || std::regex_match(s, m, numbered)) return m[1].str();
    if (std::regex_match(s, id_item)) return s;
    return std::nullopt;
}

// Splits a leading "D-12:" id off the item text.
std::optional<std::string> take_model_id(std::string& text) {
    static const std::regex re("^\"?(?:\\*\\*)?([A-Z]{1,3}-\\d+)(?:\\*\\*)?\\s*[:.)]\\s*");
    std::smatch m;
    if (!std::regex_search(text, m, re)) return std::nullopt;
    auto id = m[1].str();
    bool quoted = !text.empty() && text.front() == '"';
    text = (quoted ? "\"" : "") + m.suffix().str();
    return id;
}

std::string clean_claim(std::string text) {
    auto t = std::string(trim(text));
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    else if (!t.empty() && t.front() == '"' && t.find('"', 1) == std::string::npos) t = t.substr(1);
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == '*' && i + 1 < t.size() && t[i + 1] == '*') {
            ++i;
            continue;
        }
        out.push_back(t[i]);
    }
    return std::string(trim(out));
}

std::string take_category(std::string& claim) {
    static const std::regex bracket("^\\[([^\\]]{1,40})\\]\\s*[:\\-]?\\s*");
    std::smatch m;
    if (std::regex_search(claim, m, bracket)) {
        auto cat = std::string(trim(m[1].str()));
        claim = m.suffix().str();
        return cat;
    }
    static const std::regex labelled("(?:^|[\\s(])category\\s*:\\s*([A-Za-z][A-Za-z0-9 /\\-]{0,38}[A-Za-z0-9])",
                                     std::regex::icase);
    if (std::regex_search(claim, m, labelled)) return std::string(trim(m[1].str()));
    return {};
}

std::optional<std::string> find_confidence(const std::string& claim) {
    static const std::regex labelled("confidence(?:\\s+level)?\\s*[:=]\\s*([A-Za-z0-9.%/\\-]+(?:\\s*%)?)",
                                     std::regex::icase);
    static const std::regex adjective("\\b((?:very\\s+)?(?:high|medium|moderate|low))\\s+confidence\\b",
                                      std::regex::icase);
    std::smatch m;
    if (std::regex_search(claim, m, labelled)) {
        auto v = m[1].str();
        while (!v.empty() && (v.back() == '.' || v.back() == ',')) v.pop_back();
        return v;
    }
    if (std::regex_search(claim, m, adjective)) return m[1].str();
    return std::nullopt;
}

const std::set<std::string>& code_extensions() {
    static const std::set<std::string> ext = {
        "py", "go", "java", "kt", "scala", "c", "cc", "cpp", "cxx", "h", "hh", "hpp", "rs", "rb", "js",
        "ts", "tsx", "jsx", "tf", "hcl", "bzl", "bazel", "proto", "yaml", "yml", "json", "toml", "sh",
        "md", "txt", "cfg", "ini", "sql", "cs", "swift", "php", "gradle", "xml", "mod", "sum", "tfvars"};
    return ext;
}

struct PathRef {
    std::string path;
    std::optional<std::uint32_t> line;
};

std::vector<PathRef> path_references(const std::string& claim) {
    std::string text = claim;
    std::replace(text.begin(), text.end(), '`', ' ');
    static const std::regex with_line(
        "([A-Za-z0-9_.][A-Za-z0-9_./\\-]*\\.[A-Za-z0-9_]+)(?::(\\d+)|[,]?\\s*\\(?\\s*(?:line|lines|L)\\s*(\\d+))");
    static const std::regex bare("([A-Za-z0-9_.][A-Za-z0-9_./\\-]*\\.[A-Za-z0-9_]+)");
    std::vector<PathRef> out;
    for (std::sregex_iterator it(text.begin(), text.end(), with_line), end; it != end; ++it) {
        const auto& m = *it;
        auto digits = m[2].matched ? m[2].str() : m[3].str();
        std::uint32_t line = 0;
        try {
            auto v = std::stoul(digits);
            if (v > 0 && v < 100000000) line = static_cast<std::uint32_t>(v);
        } catch (...) {
        }
        out.push_back({m[1].str(), line ? std::optional<std::uint32_t>(line) : std::nullopt});
    }
    for (std::sregex_iterator it(text.begin(), text.end(), bare), end; it != end; ++it) {
        out.push_back({(*it)[1].str(), std::nullopt});
    }
    return out;
}

struct Resolved {
    std::string path;
    Side side = Side::new_file;
};

std::optional<Resolved> resolve_path(const std::string& ref, const DiffDocument* diff) {
    if (ref.empty() || ref.back() == '.') return std::nullopt;
    if (!diff) {
        auto dot = ref.rfind('.');
        auto ext = lower(ref.substr(dot + 1));
        if (code_extensions().count(ext) == 0) return std::nullopt;
        return Resolved{ref, Side::new_file};
    }
    auto strip = ref;
    if (strip.rfind("a/", 0) == 0 || strip.rfind("b/", 0) == 0) strip = strip.substr(2);
    if (strip.rfind("./", 0) == 0) strip = strip.substr(2);
    std::vector<Resolved> hits;
    for (const auto& f : diff->files) {
        auto side = f.is_deleted ? Side::old_file : Side::new_file;
        if (f.new_path == strip || f.new_path == ref) return Resolved{f.new_path, side};
        if (f.old_path == strip) return Resolved{f.new_path, Side::old_file};
    }
    for (const auto& f : diff->files) {
        const auto& p = f.new_path;
        if (p.size() > strip.size() && p.compare(p.size() - strip.size(), strip.size(), strip) == 0 &&
            p[p.size() - strip.size() - 1] == '/') {
            hits.push_back({p, f.is_deleted ? Side::old_file : Side::new_file});
        }
    }
    if (hits.size() == 1) return hits.front();
    return std::nullopt;
}

Finding build_finding(const RawItem& item, Source source, const DiffDocument* diff) {
    Finding f;
    f.source = source;
    auto claim = clean_claim(item.text);
    f.category = take_category(claim);
    f.claim = std::string(trim(claim));
    f.confidence = find_confidence(f.claim);
    f.specific = false;
    for (const auto& ref : path_references(f.claim)) {
        auto resolved = resolve_path(ref.path, diff);
        if (!resolved) continue;
        f.specific = true;
        if (ref.line) {
            f.location = LineRef::make(resolved->path, *ref.line, resolved->side);
            break;
        }
    }
    return f;
}

void number_findings(std::vector<Finding>& findings, const std::vector<std::optional<std::string>>& model_ids,
                     char prefix) {
    std::set<std::string> seen;
    bool keep = !findings.empty();
    for (const auto& id : model_ids) {
        if (!id || id->size() < 3 || (*id)[0] != prefix || (*id)[1] != '-' || !seen.insert(*id).second) {
            keep = false;
            break;
        }
    }
    for (std::size_t i = 0; i < findings.size(); ++i) {
        findings[i].id = keep ? *model_ids[i] : std::string(1, prefix) + "-" + std::to_string(i + 1);
    }
}

}  // namespace

std::optional<Source> lens_in_heading(std::string_view heading) {
    auto h = lower(heading);
    // ASCII lowering leaves U+0100 alone; fold it so "NYĀYA" reads as "nyāya".
    for (auto pos = h.find("\xc4\x80"); pos != std::string::npos; pos = h.find("\xc4\x80", pos)) h[pos + 1] = '\x81';
    std::optional<Source> found;
    for (const auto& name : lens_names()) {
        bool hit = std::any_of(name.spellings.begin(), name.spellings.end(),
                               [&](const std::string& sp) { return contains_word(h, sp); });
        if (!hit) continue;
        if (found) return std::nullopt;  // two lenses named: not a lens section
        found = name.source;
    }
    return found;
}

ReviewRun parse_findings(const RawResponse& resp, Condition condition, const DiffDocument* diff) {
    if (trim(resp.text).empty()) throw UnparseableOutput(resp.text);

    ReviewRun run;
    run.condition = condition;
    run.model_id = resp.model_id;
    run.prompt_digest = resp.prompt_digest;
    run.request_id = resp.request_id;

    const bool dispo = condition == Condition::disposition;
    std::optional<Source> lens;
    int lens_level = 0;
    std::set<Source> sections;
    std::vector<RawItem> items;
    std::optional<RawItem> open;
    std::size_t unattributed = 0;

    auto close = [&] {
        if (!open) return;
        if (!dispo || open->lens) items.push_back(std::move(*open));
        else ++unattributed;
        open.reset();
    };

    for (const auto& line : split_lines(resp.text)) {
        if (trim(line).empty()) {
            close();
            continue;
        }
        if (auto h = as_heading(line)) {
            auto named = lens_in_heading(h->text);
            bool bare = h->level == 7;
            if (named || !bare) {
                if (named) {
                    close();
                    lens = named;
                    lens_level = h->level;
                    sections.insert(*named);
                    continue;
                }
                // Sub-headings inside a lens section keep the attribution.
                if (lens && h->level > lens_level && lens_level != 7) continue;
                close();
                lens.reset();
                continue;
            }
        }
        auto start = item_start(line);
        static const std::regex id_prefix("^\"?[A-Z]{1,3}-\\d+");
        if (start && open && indent_of(line) > open->indent && !std::regex_search(*start, id_prefix)) {
            // Nested bullet: detail of the open item.
            open->text += " " + std::string(trim(*start));
            continue;
        }
        if (start) {
            close();
            RawItem item;
            item.indent = indent_of(line);
            item.text = std::string(trim(*start));
            item.model_id = take_model_id(item.text);
            item.lens = lens;
            open = std::move(item);
            continue;
        }
        if (open) open->text += " " + std::string(trim(line));
    }
    close();

    if (dispo) {
        if (sections.empty()) throw UnparseableOutput(resp.text);
        std::vector<std::optional<std::string>> ids;
        for (const auto& item : items) {
            run.findings.push_back(build_finding(item, *item.lens, diff));
            ids.push_back(item.model_id);
        }
        number_findings(run.findings, ids, 'D');
        run.unattributed_items = unattributed;
        run.adherence.applicable = true;
        run.adherence.lenses_present = sections;
        run.adherence = check_framework_adherence(run);
        return run;
    }

    std::vector<std::optional<std::string>> ids;
    for (const auto& item : items) {
        run.findings.push_back(build_finding(item, Source::generic, diff));
        ids.push_back(item.model_id);
    }
    if (run.findings.empty()) {
        // No list structure: fall back to paragraphs that cite a file.
        std::string para;
        auto flush = [&] {
            if (para.empty()) return;
            RawItem item;
            item.text = para;
            auto f = build_finding(item, Source::generic, diff);
            if (f.specific) {
                run.findings.push_back(std::move(f));
                ids.push_back(std::nullopt);
            }
            para.clear();
        };
        for (const auto& line : split_lines(resp.text)) {
            if (trim(line).empty() || trim(line).front() == '#') {
                flush();
                continue;
            }
            para += (para.empty() ? "" : " ") + std::string(trim(line));
        }
        flush();
        if (run.findings.empty()) throw UnparseableOutput(resp.text);
    }
    number_findings(run.findings, ids, 'G');
    run.adherence = check_framework_adherence(run);
    return run;
}

ReviewRun apply_hamartia_gate(ReviewRun run, std::size_t changed_lines, const FindingVolumeTrigger& trigger) {
    return apply_hamartia_gate(std::move(run), changed_lines, {}, trigger);
}

ReviewRun apply_hamartia_gate(ReviewRun run, std::size_t changed_lines,
                              const std::map<Source, FindingVolumeTrigger>& triggers,
                              const FindingVolumeTrigger& fallback) {
    if (run.condition != Condition::disposition) return run;
    auto trigger_for = [&](Source s) -> const FindingVolumeTrigger& {
        auto it = triggers.find(s);
        return it == triggers.end() ? fallback : it->second;
    };
    std::map<Source, std::size_t> counts;
    for (const auto& f : run.findings) ++counts[f.source];
    std::map<Source, std::size_t> kept;
    std::vector<Finding> keep;
    for (auto& f : run.findings) {
        const auto& t = trigger_for(f.source);
        bool fires = counts[f.source] > t.max_findings && changed_lines < t.max_changed_lines;
        if (fires && kept[f.source] >= t.keep_top) {
            run.gated_out.push_back(std::move(f));
            continue;
        }
        ++kept[f.source];
        keep.push_back(std::move(f));
    }
    run.findings = std::move(keep);
    return run;
}

AdherenceReport check_framework_adherence(const ReviewRun& run) {
    AdherenceReport report;
    if (run.condition != Condition::disposition) {
        report.applicable = false;
        return report;
    }
    report.lenses_present = run.adherence.lenses_present;
    for (const auto* group : {&run.findings, &run.gated_out}) {
        for (const auto& f : *group) {
            if (!is_lens(f.source)) continue;
            report.lenses_present.insert(f.source);
            ++report.per_lens_counts[f.source];
        }
    }
    report.adherent = std::all_of(kReviewerLenses.begin(), kReviewerLenses.end(),
                                  [&](Source s) { return report.lenses_present.count(s) != 0; });
    return report;
}

}  // namespace lensreview
