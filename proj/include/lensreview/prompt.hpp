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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "lensreview/diff.hpp"
#include "lensreview/finding.hpp"
#include "lensreview/lens.hpp"

namespace lensreview {

inline constexpr std::string_view kDiffMarker = "[DIFF INSERTED HERE]";

struct PromptText {
    Condition condition = Condition::disposition;
    std::string body;
    std::string digest;  // sha256 hex of body
    std::size_t diff_changed_lines = 0;
};

/// Template text plus the hash each template must have.
struct TemplateSet {
    std::string disposition;
    std::string generic;
    std::string disposition_pin;
    std::string generic_pin;

    /// Templates compiled into the library from assets/prompts.
    static TemplateSet embedded();

    /// Reads disposition_review.txt, generic_review.txt and pins.json.
    static TemplateSet from_directory(const std::filesystem::path& dir);
};

class PromptForge {
public:
    /// Throws TemplateIntegrityError if a template does not hash to its pin,
    /// or if the disposition template lacks the expected lens layout.
    explicit PromptForge(TemplateSet templates = TemplateSet::embedded());

    /// Throws NonExecutableLens when the role names a lens without prompt text.
    PromptText render_disposition_prompt(const RoleProtocol& role, const DiffDocument& diff) const;
    PromptText render_generic_prompt(const DiffDocument& diff) const;

    /// {"disposition_review.txt": sha256, "generic_review.txt": sha256}
    std::map<std::string, std::string> template_hashes() const;

private:
    std::string compose(const RoleProtocol& role) const;

    TemplateSet templates_;
    std::string header_;
    std::map<std::string, std::string, std::less<>> lens_sections_;  // key -> "### LENS n: ..." block
    std::map<std::string, std::string, std::less<>> self_check_lines_;
    std::string self_check_intro_;
    std::string self_check_outro_;
};

}  // namespace lensreview
