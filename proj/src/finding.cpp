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

#include "lensreview/finding.hpp"

#include <cctype>

#include "lensreview/error.hpp"

namespace lensreview {

std::string_view to_string(Source s) {
    switch (s) {
        case Source::cynic: return "cynic";
        case Source::skeptic: return "skeptic";
        case Source::nyaya: return "nyaya";
        case Source::confucian: return "confucian";
        case Source::generic: return "generic";
        case Source::human: return "human";
    }
    return "generic";
}

std::optional<Source> source_from_string(std::string_view s) {
    for (auto src : {Source::cynic, Source::skeptic, Source::nyaya, Source::confucian, Source::generic,
                     Source::human}) {
        if (to_string(src) == s) return src;
    }
    return std::nullopt;
}

std::string_view to_string(Condition c) { return c == Condition::disposition ? "disposition" : "generic"; }

std::optional<Condition> condition_from_string(std::string_view s) {
    if (s == "disposition") return Condition::disposition;
    if (s == "generic") return Condition::generic;
    return std::nullopt;
}

bool id_less(std::string_view a, std::string_view b) {
    auto split = [](std::string_view id) {
        std::size_t i = id.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(id[i - 1]))) --i;
        auto digits = id.substr(i);
        unsigned long long n = 0;
        for (char c : digits) n = n * 10 + static_cast<unsigned>(c - '0');
        return std::pair{id.substr(0, i), digits.empty() ? 0ULL : n};
    };
    auto [pa, na] = split(a);
    auto [pb, nb] = split(b);
    if (pa != pb) return pa < pb;
    if (na != nb) return na < nb;
    return a < b;
}

void to_json(json& j, const LineRef& r) {
    j = json{{"path", r.file_path}, {"line", r.line}, {"side", to_string(r.side)}};
}

void from_json(const json& j, LineRef& r) {
    auto side = side_from_string(j.value("side", std::string("new")));
    if (!side) throw Error("LineRef: bad side");
    r = LineRef::make(j.at("path").get<std::string>(), j.at("line").get<std::uint32_t>(), *side);
}

void to_json(json& j, const Finding& f) {
    j = json{{"id", f.id},
             {"source", to_string(f.source)},
             {"location", f.location ? json(*f.location) : json(nullptr)},
             {"category", f.category},
             {"claim", f.claim},
             {"confidence", f.confidence ? json(*f.confidence) : json(nullptr)},
             {"specific", f.specific}};
}

void from_json(const json& j, Finding& f) {
    f.id = j.at("id").get<std::string>();
    auto src = source_from_string(j.at("source").get<std::string>());
    if (!src) throw Error("Finding: unknown source " + j.at("source").dump());
    f.source = *src;
    f.location = j.contains("location") && !j["location"].is_null()
                     ? std::optional<LineRef>(j["location"].get<LineRef>())
                     : std::nullopt;
    f.category = j.value("category", std::string());
    f.claim = j.at("claim").get<std::string>();
    f.confidence = j.contains("confidence") && !j["confidence"].is_null()
                       ? std::optional<std::string>(j["confidence"].get<std::string>())
                       : std::nullopt;
    f.specific = j.value("specific", true);
}

void to_json(json& j, const AdherenceReport& a) {
    if (!a.applicable) {
        j = json{{"applicable", false}};
        return;
    }
    json present = json::array();
    for (auto s : a.lenses_present) present.push_back(to_string(s));
    json counts = json::object();
    for (auto [s, n] : a.per_lens_counts) counts[std::string(to_string(s))] = n;
    j = json{{"applicable", true}, {"lenses_present", present}, {"per_lens_counts", counts}, {"adherent", a.adherent}};
}

void from_json(const json& j, AdherenceReport& a) {
    a = AdherenceReport{};
    a.applicable = j.value("applicable", true);
    if (!a.applicable) return;
    for (const auto& s : j.at("lenses_present")) {
        if (auto src = source_from_string(s.get<std::string>())) a.lenses_present.insert(*src);
    }
    for (const auto& [k, v] : j.at("per_lens_counts").items()) {
        if (auto src = source_from_string(k)) a.per_lens_counts[*src] = v.get<std::size_t>();
    }
    a.adherent = j.at("adherent").get<bool>();
}

void to_json(json& j, const ReviewRun& r) {
    j = json{{"pr", {{"repo", r.pr.repo}, {"number", r.pr.number}}},
             {"condition", to_string(r.condition)},
             {"model_id", r.model_id},
             {"prompt_digest", r.prompt_digest},
             {"request_id", r.request_id},
             {"findings", r.findings},
             {"gated_out", r.gated_out},
             {"adherence", r.adherence},
             {"unattributed_items", r.unattributed_items}};
}

void from_json(const json& j, ReviewRun& r) {
    r.pr.repo = j.at("pr").at("repo").get<std::string>();
    r.pr.number = j.at("pr").at("number").get<std::uint32_t>();
    auto cond = condition_from_string(j.at("condition").get<std::string>());
    if (!cond) throw Error("ReviewRun: unknown condition");
    r.condition = *cond;
    r.model_id = j.at("model_id").get<std::string>();
    r.prompt_digest = j.value("prompt_digest", std::string());
    r.request_id = j.value("request_id", std::string());
    r.findings = j.at("findings").get<std::vector<Finding>>();
    r.gated_out = j.value("gated_out", std::vector<Finding>{});
    r.adherence = j.at("adherence").get<AdherenceReport>();
    r.unattributed_items = j.value("unattributed_items", std::size_t{0});
}

}  // namespace lensreview
