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

#include "lensreview/lens.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "lensreview/error.hpp"

namespace lensreview {

namespace {

constexpr const char* kPlaceholderRefusal = "placeholder: no published refusal text for this lens";
constexpr const char* kPlaceholderQuestion = "placeholder: no published self-check for this lens";

Disposition executable(std::string key, std::string display, std::string tradition, std::string question,
                       std::vector<std::string> refusals, std::string hamartia_name, std::string corrective,
                       std::vector<std::string> profile) {
    Disposition d;
    d.key = std::move(key);
    d.display_name = std::move(display);
    d.tradition = std::move(tradition);
    d.core_question = std::move(question);
    d.refusals = std::move(refusals);
    d.hamartia = Hamartia{std::move(hamartia_name), FindingVolumeTrigger{}, std::move(corrective)};
    d.profile_categories = std::move(profile);
    d.executable = true;
    return d;
}

Disposition metadata_only(std::string key, std::string display, std::string tradition, std::string question) {
    Disposition d;
    d.key = std::move(key);
    d.display_name = std::move(display);
    d.tradition = std::move(tradition);
    d.core_question = std::move(question);
    d.refusals = {kPlaceholderRefusal};
    d.hamartia = Hamartia{"unspecified", FindingVolumeTrigger{}, kPlaceholderQuestion};
    d.executable = false;
    d.placeholder_refusals = true;
    return d;
}

bool is_executable_key(std::string_view key) {
    const auto& keys = executable_lens_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

std::vector<Disposition> builtin_dispositions() {
    return {
        metadata_only("stoic", "Stoic", "Greek Stoicism", "What could go wrong?"),
        executable("cynic", "Cynic", "Diogenes + Nietzsche", "What's hollow?",
                   {"Refuse to accept \"best practice\" without independent justification",
                    "Refuse to recommend addition before attempting subtraction"},
                   "structural damage through excessive subtraction", "Am I subtracting or demolishing?",
                   {"hollow abstractions", "speculative generality", "dead test scaffolding",
                    "unjustified class hierarchies"}),
        executable("skeptic", "Skeptic", "Pyrrhonist Skepticism", "How confident are we?",
                   {"Refuse to endorse without specifying credibility"}, "paralysis through doubt",
                   "Am I calibrating or paralyzing?",
                   {"unverified claims", "untested code paths", "temporal correctness", "silent failure modes"}),
        executable("nyaya", "Nyāya", "Indian epistemology", "Is the reasoning sound?",
                   {"Refuse to pass unverified inferential steps"}, "obstruction through over-auditing",
                   "Am I auditing or obstructing?",
                   {"broken inference chains", "unstated assumptions", "migration gaps",
                    "logical dependency failures"}),
        metadata_only("epicurean", "Epicurean", "Greek Epicureanism", "Is this necessary?"),
        metadata_only("aristotelian", "Aristotelian", "Aristotle", "What's the structure?"),
        metadata_only("daoist", "Daoist", "Chinese Daoism", "What if we do nothing?"),
        metadata_only("talmudic", "Talmudic", "Jewish legal reasoning", "What's the precedent?"),
        executable("confucian", "Confucian", "Confucianism", "Do names match reality?",
                   {"Refuse to let mismatched names persist"}, "pedantry", "Am I correcting or pedanting?",
                   {"name/behavior mismatch", "responsibility bleed", "API contract violations",
                    "relational inconsistency"}),
        metadata_only("zen", "Zen", "Japanese Zen", "What do fresh eyes see?"),
    };
}

std::vector<std::string> validate_disposition(const Disposition& d) {
    std::vector<std::string> v;
    if (d.key.empty()) v.emplace_back("key must be non-empty");
    if (d.refusals.empty()) v.emplace_back("apophatic definition requires >=1 refusal");
    for (const auto& r : d.refusals) {
        if (r.empty()) {
            v.emplace_back("refusal strings must be non-empty");
            break;
        }
    }
    if (d.hamartia.corrective_question.empty()) v.emplace_back("hamartia requires a corrective question");
    const auto& t = d.hamartia.trigger;
    if (t.max_findings == 0 || t.max_changed_lines == 0 || t.keep_top == 0) {
        v.emplace_back("hamartia trigger values must be positive");
    }
    if (t.keep_top >= t.max_findings) v.emplace_back("hamartia trigger requires keep_top < max_findings");
    if (d.executable && !is_executable_key(d.key)) {
        v.emplace_back("only cynic, skeptic, nyaya and confucian have prompt text and may be executable");
    }
    return v;
}

LensRegistry LensRegistry::builtin() {
    LensRegistry reg;
    for (auto& d : builtin_dispositions()) reg.add_disposition(std::move(d));
    reg.add_role(RoleProtocol{"reviewer", {"cynic", "skeptic", "nyaya", "confucian"},
                              SynthesisPolicy::preserve_disagreement});
    return reg;
}

LensRegistry LensRegistry::with_config(const nlohmann::json& config) {
    auto reg = builtin();
    std::vector<std::string> problems;
    if (config.contains("dispositions")) {
        for (const auto& jd : config.at("dispositions")) {
            Disposition d;
            try {
                d = jd.get<Disposition>();
            } catch (const nlohmann::json::exception& e) {
                problems.push_back(std::string("disposition schema: ") + e.what());
                continue;
            }
            try {
                reg.add_disposition(std::move(d));
            } catch (const InvalidDefinition& e) {
                problems.insert(problems.end(), e.violations().begin(), e.violations().end());
            }
        }
    }
    if (config.contains("roles")) {
        for (const auto& jr : config.at("roles")) {
            RoleProtocol r;
            try {
                r = jr.get<RoleProtocol>();
            } catch (const nlohmann::json::exception& e) {
                problems.push_back(std::string("role schema: ") + e.what());
                continue;
            }
            try {
                reg.add_role(std::move(r));
            } catch (const InvalidDefinition& e) {
                problems.insert(problems.end(), e.violations().begin(), e.violations().end());
            }
        }
    }
    if (!problems.empty()) throw InvalidDefinition("invalid lens config", std::move(problems));
    return reg;
}

LensRegistry LensRegistry::with_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lens config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("lens config " + path.string() + ": " + e.what());
    }
    return with_config(j);
}

const Disposition* LensRegistry::find(std::string_view key) const {
    auto it = std::find_if(dispositions_.begin(), dispositions_.end(),
                           [&](const Disposition& d) { return d.key == key; });
    return it == dispositions_.end() ? nullptr : &*it;
}

const Disposition& LensRegistry::at(std::string_view key) const {
    if (const auto* d = find(key)) return *d;
    throw Error("unknown disposition '" + std::string(key) + "'");
}

const RoleProtocol& LensRegistry::resolve_role(std::string_view key) const {
    auto it = roles_.find(key);
    if (it == roles_.end()) throw UnknownRole("unknown role '" + std::string(key) + "'");
    return it->second;
}

std::vector<std::string> LensRegistry::role_keys() const {
    std::vector<std::string> keys;
    for (const auto& [k, _] : roles_) keys.push_back(k);
    return keys;
}

std::vector<std::string> LensRegistry::validate_role(const RoleProtocol& role) const {
    std::vector<std::string> v;
    std::string prefix = "role '" + role.key + "': ";
    if (role.key.empty()) v.push_back("role key must be non-empty");
    if (role.lens_sequence.empty()) v.push_back(prefix + "lens_sequence must contain at least one lens");
    std::set<std::string> seen;
    for (const auto& k : role.lens_sequence) {
        if (!seen.insert(k).second) v.push_back(prefix + "duplicate lens '" + k + "'");
        const auto* d = find(k);
        if (!d) {
            v.push_back(prefix + "lens '" + k + "' is not registered");
        } else if (!d->executable) {
            v.push_back(prefix + "lens '" + k + "' is not executable");
        }
    }
    return v;
}

void LensRegistry::add_disposition(Disposition d) {
    auto v = validate_disposition(d);
    if (find(d.key)) v.push_back("duplicate disposition key '" + d.key + "'");
    if (!v.empty()) throw InvalidDefinition("invalid disposition '" + d.key + "'", std::move(v));
    dispositions_.push_back(std::move(d));
}

void LensRegistry::add_role(RoleProtocol role) {
    auto v = validate_role(role);
    if (roles_.count(role.key)) v.push_back("duplicate role key '" + role.key + "'");
    if (!v.empty()) throw InvalidDefinition("invalid role '" + role.key + "'", std::move(v));
    auto key = role.key;
    roles_.emplace(std::move(key), std::move(role));
}

void to_json(nlohmann::json& j, const FindingVolumeTrigger& t) {
    j = {{"max_findings", t.max_findings}, {"max_changed_lines", t.max_changed_lines}, {"keep_top", t.keep_top}};
}

void from_json(const nlohmann::json& j, FindingVolumeTrigger& t) {
    t = FindingVolumeTrigger{};
    t.max_findings = j.value("max_findings", t.max_findings);
    t.max_changed_lines = j.value("max_changed_lines", t.max_changed_lines);
    t.keep_top = j.value("keep_top", t.keep_top);
}

void to_json(nlohmann::json& j, const Disposition& d) {
    j = {{"key", d.key},
         {"display_name", d.display_name},
         {"tradition", d.tradition},
         {"core_question", d.core_question},
         {"refusals", d.refusals},
         {"hamartia",
          {{"name", d.hamartia.name},
           {"trigger", d.hamartia.trigger},
           {"corrective_question", d.hamartia.corrective_question}}},
         {"profile_categories", d.profile_categories},
         {"executable", d.executable},
         {"placeholder_refusals", d.placeholder_refusals}};
}

void from_json(const nlohmann::json& j, Disposition& d) {
    d = Disposition{};
    d.key = j.at("key").get<std::string>();
    d.display_name = j.value("display_name", d.key);
    d.tradition = j.value("tradition", std::string());
    d.core_question = j.value("core_question", std::string());
    d.refusals = j.value("refusals", std::vector<std::string>{});
    if (j.contains("hamartia")) {
        const auto& h = j.at("hamartia");
        d.hamartia.name = h.value("name", std::string());
        if (h.contains("trigger")) d.hamartia.trigger = h.at("trigger").get<FindingVolumeTrigger>();
        d.hamartia.corrective_question = h.value("corrective_question", std::string());
    }
    d.profile_categories = j.value("profile_categories", std::vector<std::string>{});
    d.executable = j.value("executable", false);
    d.placeholder_refusals = j.value("placeholder_refusals", false);
}

void to_json(nlohmann::json& j, const RoleProtocol& r) {
    j = {{"key", r.key}, {"lens_sequence", r.lens_sequence}, {"synthesis_policy", "preserve_disagreement"}};
}

void from_json(const nlohmann::json& j, RoleProtocol& r) {
    r.key = j.at("key").get<std::string>();
    r.lens_sequence = j.at("lens_sequence").get<std::vector<std::string>>();
    auto policy = j.value("synthesis_policy", std::string("preserve_disagreement"));
    if (policy != "preserve_disagreement") {
        throw nlohmann::json::other_error::create(501, "unsupported synthesis_policy '" + policy + "'", &j);
    }
    r.synthesis_policy = SynthesisPolicy::preserve_disagreement;
}

}  // namespace lensreview
