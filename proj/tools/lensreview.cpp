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

#include <CLI11.hpp>

#include <string>

#include "lensreview/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Lens-structured code review: run reviews, match against human comments, report."};
    app.require_subcommand(1);

    lensreview::CliOptions opts;
    std::string out, adjudications;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--manifest", opts.manifest, "run manifest (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides the manifest)");
        sub->add_option("--format", opts.format, "report format")->check(CLI::IsMember({"json", "md"}));
        sub->add_option("--adjudications", adjudications, "adjudication overrides (JSONL)");
    };

    const std::pair<const char*, const char*> commands[] = {
        {"review", "run the disposition-structured review"},
        {"baseline", "run the generic single-prompt review"},
        {"human", "extract human review findings"},
        {"match", "classify findings against human comments"},
        {"metrics", "compute the metrics report"},
        {"compare-models", "compare disposition output across two models"},
        {"adjudicate", "confirm or override automatic matches interactively"},
        {"report", "metrics plus model comparison"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        if (std::string(name) == "review" || std::string(name) == "baseline") {
            sub->add_flag("--replay", opts.replay, "read responses from the run store, never call a provider");
            sub->add_option("--parallel", opts.parallel, "concurrent PRs")->check(CLI::Range(1u, 64u));
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : lensreview::kExitConfigError;
    }
    if (!out.empty()) opts.out = out;
    if (!adjudications.empty()) opts.adjudications = adjudications;
    return lensreview::run_command(app.get_subcommands().front()->get_name(), opts);
}
