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

#include "lensreview/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lensreview/error.hpp"
#include "lensreview/hash.hpp"

namespace lensreview {

namespace detail {
// Generated from assets/prompts at build time.
extern const std::string_view kDispositionTemplate;
extern const std::string_view kGenericTemplate;
extern const std::string_view kDispositionPin;
extern const std::string_view kGenericPin;
}  // namespace detail

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw TemplateIntegrityError("cannot read template " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

void replace_once(std::string& s, std::string_view from, const std::string& to) {
    auto pos = s.find(from);
    if (pos != std::string::npos) s.replace(pos, from.size(), to);
}

PromptText finish(Condition condition, const std::string& tmpl, const DiffDocument& diff) {
    auto pos = tmpl.find(kDiffMarker);
    PromptText p;
    p.condition = condition;
    p.body.reserve(tmpl.size() + diff.raw_text.size());
    p.body.append(tmpl, 0, pos);
    p.body.append(diff.raw_text);
    p.body.append(tmpl, pos + kDiffMarker.size());
    p.digest = sha256_hex(p.body);
    p.diff_changed_lines = changed_line_count(diff);
    return p;
}

}  // namespace

TemplateSet TemplateSet::embedded() {
    return TemplateSet{std::string(detail::kDispositionTemplate), std::string(detail::kGenericTemplate),
                       std::string(detail::kDispositionPin), std::string(detail::kGenericPin)};
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    TemplateSet t;
    t.disposition = read_file(dir / "disposition_review.txt");
    t.generic = read_file(dir / "generic_review.txt");
    auto pins = nlohmann::json::parse(read_file(dir / "pins.json"), nullptr, false);
    if (pins.is_discarded()) throw TemplateIntegrityError("pins.json is not valid JSON");
    t.disposition_pin = pins.value("disposition_review.txt", std::string());
    t.generic_pin = pins.value("generic_review.txt", std::string());
    return t;
}

PromptForge::PromptForge(TemplateSet templates) : templates_(std::move(templates)) {
    if (sha256_hex(templates_.disposition) != templates_.disposition_pin) {
        throw TemplateIntegrityError("disposition template does not match its pinned hash");
    }
    if (sha256_hex(templates_.generic) != templates_.generic_pin) {
        throw TemplateIntegrityError("generic template does not match its pinned hash");
    }
    for (const auto* t : {&templates_.disposition, &templates_.generic}) {
        auto first = t->find(kDiffMarker);
        if (first == std::string::npos || t->find(kDiffMarker, first + 1) != std::string::npos) {
            throw TemplateIntegrityError("template must contain the diff marker exactly once");
        }
    }

    // Split the disposition template into header, lens sections and self-check lines
    // so that custom lens sequences can be assembled from the same pinned text.
    std::istringstream in(templates_.disposition);
    std::string line;
    enum class Part { header, lens, check_intro, check_lines, outro } part = Part::header;
    std::string current;
    while (std::getline(in, line)) {
        line += '\n';
        if (starts_with(line, "### LENS ")) {
            part = Part::lens;
            auto colon = line.find(": ");
            auto name_end = line.find_first_of(" \n", colon + 2);
            current = lower(std::string_view(line).substr(colon + 2, name_end - colon - 2));
            lens_sections_[current] += line;
            continue;
        }
        if (starts_with(line, "## Self-Check")) part = Part::check_intro;
        switch (part) {
            case Part::header: header_ += line; break;
            case Part::lens: lens_sections_[current] += line; break;
            case Part::check_intro:
                self_check_intro_ += line;
                if (starts_with(line, "If any lens")) part = Part::check_lines;
                break;
            case Part::check_lines:
                if (starts_with(line, "- ")) {
                    auto colon = line.find(':');
                    self_check_lines_[lower(std::string_view(line).substr(2, colon - 2))] += line;
                    break;
                }
                part = Part::outro;
                [[fallthrough]];
            case Part::outro: self_check_outro_ += line; break;
        }
    }
    for (const auto& key : executable_lens_keys()) {
        if (!lens_sections_.count(key) || !self_check_lines_.count(key)) {
            throw TemplateIntegrityError("disposition template lacks a section for lens '" + key + "'");
        }
    }
    if (compose(RoleProtocol{"reviewer", executable_lens_keys(), SynthesisPolicy::preserve_disagreement}) !=
        templates_.disposition) {
        throw TemplateIntegrityError("disposition template does not recompose from its sections");
    }
}

std::string PromptForge::compose(const RoleProtocol& role) const {
    for (const auto& key : role.lens_sequence) {
        if (!lens_sections_.count(key)) {
            throw NonExecutableLens("lens '" + key + "' has no prompt text");
        }
    }
    auto n = std::to_string(role.lens_sequence.size());
    std::string out = header_;
    if (role.lens_sequence.size() != executable_lens_keys().size()) {
        replace_once(out, "4 philosophical disposition lenses", n + " philosophical disposition lenses");
        replace_once(out, "ALL 4 lenses", "ALL " + n + " lenses");
    }
    std::size_t index = 1;
    for (const auto& key : role.lens_sequence) {
        auto section = lens_sections_.find(key)->second;
        auto colon = section.find(':');
        section.replace(9, colon - 9, std::to_string(index++));  // "### LENS " is 9 bytes
        out += section;
    }
    out += self_check_intro_;
    for (const auto& key : role.lens_sequence) out += self_check_lines_.find(key)->second;
    out += self_check_outro_;
    return out;
}

PromptText PromptForge::render_disposition_prompt(const RoleProtocol& role, const DiffDocument& diff) const {
    if (role.lens_sequence == executable_lens_keys()) {
        return finish(Condition::disposition, templates_.disposition, diff);
    }
    return finish(Condition::disposition, compose(role), diff);
}

PromptText PromptForge::render_generic_prompt(const DiffDocument& diff) const {
    return finish(Condition::generic, templates_.generic, diff);
}

std::map<std::string, std::string> PromptForge::template_hashes() const {
    return {{"disposition_review.txt", templates_.disposition_pin}, {"generic_review.txt", templates_.generic_pin}};
}

}  // namespace lensreview
