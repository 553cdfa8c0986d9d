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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lensreview/finding.hpp"
#include "lensreview/gateway.hpp"
#include "lensreview/ingest.hpp"
#include "lensreview/lens.hpp"
#include "lensreview/match.hpp"

namespace lensreview {

enum ExitCode : int { kExitOk = 0, kExitPartialFailure = 1, kExitConfigError = 2 };

struct DatasetEntry {
    std::string repo;
    std::uint32_t number = 0;
    std::optional<std::filesystem::path> fixture;  // absolute after loading
    bool baseline = true;                          // false: `baseline` skips this PR

    PrKey key() const { return PrKey{repo, number}; }
};

struct RunManifest {
    std::vector<DatasetEntry> dataset;
    std::string role_key = "reviewer";
    std::vector<ModelConfig> models;
    MatchConfig match_config;
    std::filesystem::path output_dir;
    std::filesystem::path run_store;
    std::optional<std::filesystem::path> registry_config;
    std::optional<std::string> forge_base_url;
    std::string digest;  // sha256 of the manifest file bytes
};

/// Relative paths resolve against the manifest's directory. Throws
/// ConfigError (or UnknownRole / InvalidDefinition) on an invalid manifest.
RunManifest load_manifest(const std::filesystem::path& path);

LensRegistry registry_for(const RunManifest& m);

struct CliOptions {
    std::filesystem::path manifest;
    bool replay = false;
    std::optional<std::filesystem::path> out;
    std::string format = "json";  // json | md
    std::optional<std::filesystem::path> adjudications;
    unsigned parallel = 1;
    std::ostream* out_stream = nullptr;  // defaults to std::cout
    std::ostream* err_stream = nullptr;  // defaults to std::cerr
    std::istream* in_stream = nullptr;   // defaults to std::cin (adjudicate)
    std::optional<ProviderRegistry> providers;  // defaults to ProviderRegistry::with_defaults()
};

/// "reviews/<condition>/<model>/<repo>-<number>.json" under the output dir.
std::filesystem::path review_path(const RunManifest& m, Condition c, const std::string& model_id, const PrKey& pr);

int cmd_review(const CliOptions& opts);
int cmd_baseline(const CliOptions& opts);
int cmd_human(const CliOptions& opts);
int cmd_match(const CliOptions& opts);
int cmd_metrics(const CliOptions& opts);
int cmd_compare_models(const CliOptions& opts);
int cmd_adjudicate(const CliOptions& opts);
int cmd_report(const CliOptions& opts);

/// Dispatches by subcommand name; unknown names exit with kExitConfigError.
int run_command(const std::string& name, const CliOptions& opts);

/// Report bodies, without writing files. Throw MissingRuns when a needed
/// run is absent from the output directory.
json build_metrics_report(const RunManifest& m, const std::vector<AdjudicationOverride>& overrides);
json build_compare_report(const RunManifest& m);
std::string render_metrics_markdown(const json& report);
std::string render_compare_markdown(const json& report);

}  // namespace lensreview
