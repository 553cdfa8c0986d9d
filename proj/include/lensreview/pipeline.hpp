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
#include <map>
#include <optional>
#include <string_view>

#include "lensreview/diff.hpp"
#include "lensreview/finding.hpp"
#include "lensreview/gateway.hpp"
#include "lensreview/lens.hpp"

namespace lensreview {

/// Lens named by a section heading, if exactly one lens is named.
std::optional<Source> lens_in_heading(std::string_view heading);

/// Parses model output into a pre-gate ReviewRun.
///
/// Disposition output is split into sections by headings that name a lens;
/// list items (bullets, numbered entries, "D-12:" style ids) inside a section
/// are attributed to that lens. A reference to a file that is not part of
/// `diff` is dropped and the finding marked non-specific. Without a diff,
/// any path-like reference is accepted.
///
/// Throws UnparseableOutput when no structure is recognised at all.
ReviewRun parse_findings(const RawResponse& resp, Condition condition, const DiffDocument* diff = nullptr);

/// Per lens: more than trigger.max_findings findings on fewer than
/// trigger.max_changed_lines changed lines keeps the first keep_top in
/// emission order and moves the rest to gated_out.
ReviewRun apply_hamartia_gate(ReviewRun run, std::size_t changed_lines,
                              const FindingVolumeTrigger& trigger = FindingVolumeTrigger{});

/// Same, with each lens judged by its own trigger (`fallback` for lenses not listed).
ReviewRun apply_hamartia_gate(ReviewRun run, std::size_t changed_lines,
                              const std::map<Source, FindingVolumeTrigger>& triggers,
                              const FindingVolumeTrigger& fallback = FindingVolumeTrigger{});

AdherenceReport check_framework_adherence(const ReviewRun& run);

}  // namespace lensreview
