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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lensreview {

/// Volume threshold past which a lens is considered to be over-extending.
struct FindingVolumeTrigger {
    std::uint32_t max_findings = 7;        // fires on count > max_findings
    std::uint32_t max_changed_lines = 300;  // ...on a diff with fewer changed lines than this
    std::uint32_t keep_top = 4;

    friend bool operator==(const FindingVolumeTrigger&, const FindingVolumeTrigger&) = default;
};

struct Hamartia {
    std::string name;
    FindingVolumeTrigger trigger;
    std::string corrective_question;

    friend bool operator==(const Hamartia&, const Hamartia&) = default;
};

struct Disposition {
    std::string key;
    std::string display_name;
    std::string tradition;
    std::string core_question;
    std::vector<std::string> refusals;
    Hamartia hamartia;
    std::vector<std::string> profile_categories;
    bool executable = false;
    // Refusal strings are stand-ins; no published text exists for this lens.
    bool placeholder_refusals = false;

    friend bool operator==(const Disposition&, const Disposition&) = default;
};

enum class SynthesisPolicy { preserve_disagreement };

struct RoleProtocol {
    std::string key;
    std::vector<std::string> lens_sequence;
    SynthesisPolicy synthesis_policy = SynthesisPolicy::preserve_disagreement;

    friend bool operator==(const RoleProtocol&, const RoleProtocol&) = default;
};

/// Keys of the dispositions that carry prompt text.
inline const std::vector<std::string>& executable_lens_keys() {
    static const std::vector<std::string> keys = {"cynic", "skeptic", "nyaya", "confucian"};
    return keys;
}

/// Table of the ten shipped dispositions, in catalogue order.
std::vector<Disposition> builtin_dispositions();

/// Empty result means valid.
std::vector<std::string> validate_disposition(const Disposition& d);

class LensRegistry {
public:
    /// Ten built-in dispositions plus the reviewer role.
    static LensRegistry builtin();

    /// Built-ins extended with the dispositions and roles from a JSON config.
    /// Throws InvalidDefinition listing every violation.
    static LensRegistry with_config(const nlohmann::json& config);
    static LensRegistry with_config_file(const std::filesystem::path& path);

    const Disposition* find(std::string_view key) const;
    const Disposition& at(std::string_view key) const;
    const std::vector<Disposition>& dispositions() const { return dispositions_; }

    /// Throws UnknownRole.
    const RoleProtocol& resolve_role(std::string_view key) const;
    std::vector<std::string> role_keys() const;

    std::vector<std::string> validate_role(const RoleProtocol& role) const;

    void add_disposition(Disposition d);
    void add_role(RoleProtocol role);

private:
    std::vector<Disposition> dispositions_;
    std::map<std::string, RoleProtocol, std::less<>> roles_;
};

void to_json(nlohmann::json& j, const FindingVolumeTrigger& t);
void from_json(const nlohmann::json& j, FindingVolumeTrigger& t);
void to_json(nlohmann::json& j, const Disposition& d);
void from_json(const nlohmann::json& j, Disposition& d);
void to_json(nlohmann::json& j, const RoleProtocol& r);
void from_json(const nlohmann::json& j, RoleProtocol& r);

}  // namespace lensreview
