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

#include "lensreview/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "lensreview/error.hpp"
#include "lensreview/hash.hpp"
#include "lensreview/metrics.hpp"
#include "lensreview/pipeline.hpp"
#include "lensreview/prompt.hpp"

namespace lensreview {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, p);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string slug(std::string_view s) {
    std::string out;
    for (char c : s) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::string pr_slug(const PrKey& pr) { return slug(pr.repo) + "-" + std::to_string(pr.number); }

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : (base / p).lexically_normal(); }

std::ostream& out_of(const CliOptions& o) { return o.out_stream ? *o.out_stream : std::cout; }
std::ostream& err_of(const CliOptions& o) { return o.err_stream ? *o.err_stream : std::cerr; }

RunManifest manifest_for(const CliOptions& o) {
    auto m = load_manifest(o.manifest);
    if (o.out) {
        bool default_store = m.run_store == m.output_dir / "runs";
        m.output_dir = fs::absolute(*o.out).lexically_normal();
        if (default_store) m.run_store = m.output_dir / "runs";
    }
    return m;
}

class PrSource {
public:
    explicit PrSource(const RunManifest& m) : m_(m) {}

    PullRequestRecord load(const DatasetEntry& e) {
        {
            std::lock_guard lock(mu_);
            if (auto it = cache_.find(e.key()); it != cache_.end()) return it->second;
        }
        PullRequestRecord pr;
        if (e.fixture) {
            FetchOptions fo;
            fo.fixture_path = e.fixture;
            pr = fetch_pr(e.repo, e.number, PrSourceKind::fixture, fo);
        } else {
            std::lock_guard lock(mu_);
            if (!forge_) {
                ForgeOptions opts;
                if (m_.forge_base_url) opts.base_url = *m_.forge_base_url;
                forge_ = std::make_unique<ForgeClient>(opts);
            }
            FetchOptions fo;
            fo.forge = forge_.get();
            pr = fetch_pr(e.repo, e.number, PrSourceKind::forge_api, fo);
        }
        if (pr.repo != e.repo || pr.number != e.number) {
            throw FixtureSchemaMismatch("fixture for " + e.key().str() + " describes " + pr.key().str());
        }
        std::lock_guard lock(mu_);
        cache_.emplace(e.key(), pr);
        return pr;
    }

private:
    const RunManifest& m_;
    std::mutex mu_;
    std::map<PrKey, PullRequestRecord> cache_;
    std::unique_ptr<ForgeClient> forge_;
};

std::optional<ReviewRun> load_review(const RunManifest& m, Condition c, const std::string& model_id, const PrKey& pr) {
    auto p = review_path(m, c, model_id, pr);
    if (!fs::exists(p)) return std::nullopt;
    auto j = json::parse(read_file(p), nullptr, false);
    if (j.is_discarded()) throw Error("corrupt review " + p.string());
    return j.get<ReviewRun>();
}

// Runs `task(i)` for i in [0, n) on up to `parallel` threads.
void parallel_for(std::size_t n, unsigned parallel, const std::function<void(std::size_t)>& task) {
    unsigned workers = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) task(i);
        });
    }
    for (auto& t : pool) t.join();
}

int run_reviews(const CliOptions& opts, Condition condition) {
    auto m = manifest_for(opts);
    auto registry = registry_for(m);
    const auto& role = registry.resolve_role(m.role_key);
    PromptForge forge;
    RunStore store(m.run_store);
    Gateway gateway(store, opts.providers ? *opts.providers : ProviderRegistry::with_defaults());
    PrSource source(m);

    std::map<Source, FindingVolumeTrigger> triggers;
    for (const auto& key : role.lens_sequence) {
        if (auto s = source_from_string(key); s && is_lens(*s)) triggers[*s] = registry.at(key).hamartia.trigger;
    }

    struct Task {
        const DatasetEntry* entry;
        const ModelConfig* model;
    };
    std::vector<Task> tasks;
    for (const auto& e : m.dataset) {
        if (condition == Condition::generic && !e.baseline) continue;
        for (const auto& model : m.models) tasks.push_back({&e, &model});
    }
    std::vector<std::string> lines(tasks.size());
    std::vector<bool> failed(tasks.size(), false);

    parallel_for(tasks.size(), opts.parallel, [&](std::size_t i) {
        const auto& t = tasks[i];
        auto key = t.entry->key();
        std::string label = key.str() + " " + t.model->model_id;
        try {
            auto pr = source.load(*t.entry);
            auto prompt = condition == Condition::disposition ? forge.render_disposition_prompt(role, pr.diff)
                                                              : forge.render_generic_prompt(pr.diff);
            RawResponse resp;
            if (opts.replay) {
                auto r = gateway.replay_latest(key, condition, t.model->model_id, prompt.digest);
                if (!r) {
                    throw MissingRuns({key.str() + "/" + std::string(to_string(condition)) + "/" + t.model->model_id});
                }
                resp = *r;
            } else {
                resp = gateway.submit(prompt, *t.model, key);
            }
            auto run = parse_findings(resp, condition, &pr.diff);
            run.pr = key;
            if (condition == Condition::disposition) {
                run = apply_hamartia_gate(std::move(run), changed_line_count(pr.diff), triggers);
                run.adherence = check_framework_adherence(run);
            }
            write_file(review_path(m, condition, t.model->model_id, key), dump(json(run)));
            std::ostringstream line;
            line << label << ": " << run.findings.size() << " findings";
            if (condition == Condition::disposition) {
                line << " (" << run.gated_out.size() << " gated), adherence "
                     << run.adherence.lenses_present.size() << "/4" << (run.adherence.adherent ? "" : " NOT ADHERENT");
            }
            if (resp.truncated) line << " [truncated response]";
            line << " run " << resp.request_id;
            lines[i] = line.str();
        } catch (const Error& e) {
            failed[i] = true;
            lines[i] = label + ": FAILED: " + e.what();
        }
    });

    int rc = kExitOk;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        (failed[i] ? err_of(opts) : out_of(opts)) << lines[i] << "\n";
        if (failed[i]) rc = kExitPartialFailure;
    }
    return rc;
}

std::vector<AdjudicationOverride> overrides_for(const CliOptions& opts) {
    if (!opts.adjudications) return {};
    if (!fs::exists(*opts.adjudications)) throw ConfigError("adjudication file not found: " + opts.adjudications->string());
    return load_overrides(*opts.adjudications);
}

std::map<PrKey, std::vector<AdjudicationOverride>> group_overrides(const RunManifest& m,
                                                                   const std::vector<AdjudicationOverride>& all) {
    std::set<PrKey> known;
    for (const auto& e : m.dataset) known.insert(e.key());
    std::map<PrKey, std::vector<AdjudicationOverride>> out;
    for (const auto& o : all) {
        if (!o.pr) {
            if (known.size() != 1) throw ConfigError("override for '" + o.left_id + "' names no pr");
            out[*known.begin()].push_back(o);
            continue;
        }
        if (!known.count(*o.pr)) throw DanglingOverride("override names pr " + o.pr->str() + " outside the dataset");
        out[*o.pr].push_back(o);
    }
    return out;
}

std::string primary_model(const RunManifest& m) { return m.models.front().model_id; }

json rate_json(const std::optional<double>& r) { return r ? json(*r) : json(nullptr); }

std::string pct(const json& rate) {
    if (rate.is_null()) return "n/a";
    return format_percent(rate.get<double>());
}

std::string ci(const json& rate) {
    if (rate.is_null()) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "[%.1f, %.1f]", rate["ci_low"].get<double>() * 100, rate["ci_high"].get<double>() * 100);
    return buf;
}

void emit(const CliOptions& opts, const json& report, const std::string& md) {
    if (opts.format == "md") out_of(opts) << md;
    else out_of(opts) << dump(report);
}

}  // namespace

// -- manifest ---------------------------------------------------------------

RunManifest load_manifest(const fs::path& path) {
    auto bytes = read_file(path);
    auto j = json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("manifest " + path.string() + " is not a JSON object");
    const auto base = fs::absolute(path).parent_path();

    RunManifest m;
    m.digest = sha256_hex(bytes);
    try {
        if (!j.contains("dataset") || !j["dataset"].is_array() || j["dataset"].empty()) {
            throw ConfigError("manifest: dataset must be a non-empty array");
        }
        std::set<PrKey> seen;
        for (const auto& e : j["dataset"]) {
            DatasetEntry d;
            d.repo = e.at("repo").get<std::string>();
            d.number = e.at("number").get<std::uint32_t>();
            if (d.repo.empty() || d.number == 0) throw ConfigError("manifest: dataset entries need repo and number");
            if (e.contains("fixture") && !e["fixture"].is_null()) d.fixture = resolve(base, e["fixture"].get<std::string>());
            d.baseline = e.value("baseline", true);
            if (!seen.insert(d.key()).second) throw ConfigError("manifest: duplicate dataset entry " + d.key().str());
            m.dataset.push_back(std::move(d));
        }
        if (j.contains("role_key")) m.role_key = j["role_key"].get<std::string>();
        else if (j.contains("role")) m.role_key = j["role"].get<std::string>();
        if (!j.contains("models") || !j["models"].is_array() || j["models"].empty()) {
            throw ConfigError("manifest: models must be a non-empty array");
        }
        for (const auto& jm : j["models"]) {
            auto mc = jm.get<ModelConfig>();
            if (mc.script) mc.script = resolve(base, *mc.script).string();
            m.models.push_back(std::move(mc));
        }
        if (j.contains("match_config")) m.match_config = j["match_config"].get<MatchConfig>();
        m.output_dir = resolve(base, j.value("output_dir", std::string("out")));
        m.run_store = j.contains("run_store") ? resolve(base, j["run_store"].get<std::string>()) : m.output_dir / "runs";
        if (j.contains("registry")) m.registry_config = resolve(base, j["registry"].get<std::string>());
        if (j.contains("forge") && j["forge"].contains("base_url")) {
            m.forge_base_url = j["forge"]["base_url"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }

    auto registry = registry_for(m);
    const auto& role = registry.resolve_role(m.role_key);
    auto violations = registry.validate_role(role);
    if (!violations.empty()) {
        std::string msg = "manifest: role '" + m.role_key + "' is invalid:";
        for (const auto& v : violations) msg += " " + v + ";";
        throw ConfigError(msg);
    }
    return m;
}

LensRegistry registry_for(const RunManifest& m) {
    return m.registry_config ? LensRegistry::with_config_file(*m.registry_config) : LensRegistry::builtin();
}

fs::path review_path(const RunManifest& m, Condition c, const std::string& model_id, const PrKey& pr) {
    return m.output_dir / "reviews" / std::string(to_string(c)) / slug(model_id) / (pr_slug(pr) + ".json");
}

// -- reports ----------------------------------------------------------------

json build_metrics_report(const RunManifest& m, const std::vector<AdjudicationOverride>& overrides) {
    const auto model = primary_model(m);
    std::vector<std::string> gaps;
    std::vector<ReviewRun> dispo_runs;
    std::map<PrKey, ReviewRun> generic_runs;
    for (const auto& e : m.dataset) {
        auto run = load_review(m, Condition::disposition, model, e.key());
        if (!run) {
            gaps.push_back(e.key().str() + "/disposition/" + model);
            continue;
        }
        dispo_runs.push_back(std::move(*run));
        if (auto g = load_review(m, Condition::generic, model, e.key())) generic_runs.emplace(e.key(), std::move(*g));
    }
    if (!gaps.empty()) throw MissingRuns(gaps);

    auto grouped = group_overrides(m, overrides);
    PrSource source(m);
    std::vector<MatchRecord> records;
    std::map<PrKey, PrMeta> meta;
    ClusterResult clusters_total;
    std::size_t split_prs = 0, shared = 0, dispo_only = 0, generic_only = 0;
    for (std::size_t i = 0; i < m.dataset.size(); ++i) {
        const auto& e = m.dataset[i];
        const auto& run = dispo_runs[i];
        auto pr = source.load(e);
        meta[e.key()] = PrMeta{pr.repo, pr.language, pr.era, pr.visibility};
        auto human = extract_human_findings(pr);
        auto recs = classify_against_human(run, human, m.match_config, grouped[e.key()]);
        records.insert(records.end(), recs.begin(), recs.end());

        auto c = cluster_inter_disposition(run, m.match_config);
        clusters_total.multi_lens += c.multi_lens;
        for (auto& cl : c.clusters) clusters_total.clusters.push_back(std::move(cl));

        if (auto it = generic_runs.find(e.key()); it != generic_runs.end()) {
            auto split = three_way_split(run, it->second, m.match_config);
            ++split_prs;
            shared += split.shared;
            dispo_only += split.left_only;
            generic_only += split.right_only;
        }
    }

    auto overall = overall_metrics(records, dispo_runs);
    json per_lens = json::object();
    for (const auto& [s, b] : per_disposition_breakdown(records, dispo_runs)) per_lens[std::string(to_string(s))] = b;
    json strata = json::object();
    for (auto d : {Dimension::repository, Dimension::era, Dimension::visibility, Dimension::language,
                   Dimension::depth_bin}) {
        json sj = json::object();
        for (const auto& [k, r] : stratify(records, dispo_runs, d, meta)) sj[k] = r;
        strata[std::string(to_string(d))] = sj;
    }
    json baseline = nullptr;
    if (split_prs) {
        auto u = shared + dispo_only + generic_only;
        auto frac = [&](std::size_t x) { return u ? json(static_cast<double>(x) / static_cast<double>(u)) : json(nullptr); };
        baseline = {{"prs", split_prs},         {"shared", shared},           {"dispo_only", dispo_only},
                    {"generic_only", generic_only}, {"union", u},            {"shared_rate", frac(shared)},
                    {"dispo_only_rate", frac(dispo_only)}, {"generic_only_rate", frac(generic_only)}};
    }
    const auto& t = overall.totals;
    PromptForge forge;
    return json{
        {"schema_version", kMetricsSchemaVersion},
        {"manifest_digest", m.digest},
        {"template_hashes", forge.template_hashes()},
        {"role_key", m.role_key},
        {"model_id", model},
        {"match_config", m.match_config},
        {"adjudications_applied", overrides.size()},
        {"overall", overall},
        {"per_disposition", per_lens},
        {"strata", strata},
        {"inter_disposition",
         {{"clusters", clusters_total.clusters.size()},
          {"multi_lens", clusters_total.multi_lens},
          {"multi_lens_rate", rate_json(clusters_total.multi_lens_rate())}}},
        {"baseline", baseline},
        {"accounting",
         {{"human_partition", t.human == t.convergence + t.miss + t.excluded_style},
          {"dispo_partition", t.dispo == t.matched + t.unique}}},
    };
}

std::string render_metrics_markdown(const json& r) {
    std::ostringstream md;
    const auto& o = r["overall"];
    const auto& t = o["totals"];
    const auto& rates = o["rates"];
    md << "# Review metrics\n\n";
    md << "Model `" << r["model_id"].get<std::string>() << "`, role `" << r["role_key"].get<std::string>()
       << "`, " << o["prs"] << " PRs. Manifest sha256 `" << r["manifest_digest"].get<std::string>() << "`.\n\n";
    md << "## Overall\n\n| Metric | Value | 95% CI (Wilson) |\n|---|---:|:---:|\n";
    md << "| Total disposition findings | " << t["dispo_findings"] << " | --- |\n";
    md << "| Total human findings | " << t["human_findings"] << " | --- |\n";
    md << "| Convergence (H caught by D) | " << t["convergence"] << " | --- |\n";
    md << "| Unique to dispositions | " << t["unique"] << " | --- |\n";
    md << "| Misses (H not caught by D) | " << t["miss"] << " | --- |\n";
    md << "| Excluded style comments | " << t["excluded_style"] << " | --- |\n";
    md << "| Adjudicated false positives | " << t["false_positive"] << " | --- |\n";
    md << "| **Convergence rate** | **" << pct(rates["convergence"].is_null() ? json(nullptr) : rates["convergence"]["rate"])
       << "** | " << ci(rates["convergence"]) << " |\n";
    md << "| **Unique find rate** | **" << pct(rates["unique"].is_null() ? json(nullptr) : rates["unique"]["rate"])
       << "** | " << ci(rates["unique"]) << " |\n";
    md << "| Miss rate | " << pct(rates["miss"].is_null() ? json(nullptr) : rates["miss"]["rate"]) << " | "
       << ci(rates["miss"]) << " |\n";
    md << "| FP rate | " << pct(rates["fp"].is_null() ? json(nullptr) : rates["fp"]["rate"]) << " | " << ci(rates["fp"])
       << " |\n\n";

    md << "## Per disposition\n\n| Disposition | Total | Convergence-matched | Unique | Unique % |\n|---|---:|---:|---:|---:|\n";
    for (const auto& [lens, b] : r["per_disposition"].items()) {
        md << "| " << lens << " | " << b["total"] << " | " << b["matched"] << " | " << b["unique"] << " | "
           << pct(b["unique_rate"]) << " |\n";
    }
    md << "\n";
    for (const auto& [dim, strata] : r["strata"].items()) {
        md << "## By " << dim << "\n\n| Stratum | PRs | Dispo | Human | Matched % | Unique % | Convergence % |\n"
           << "|---|---:|---:|---:|---:|---:|---:|\n";
        for (const auto& [k, s] : strata.items()) {
            const auto& sr = s["rates"];
            auto rate_of = [](const json& x) { return x.is_null() ? json(nullptr) : x["rate"]; };
            md << "| " << k << " | " << s["prs"] << " | " << s["totals"]["dispo_findings"] << " | "
               << s["totals"]["human_findings"] << " | " << pct(rate_of(sr["matched"])) << " | "
               << pct(rate_of(sr["unique"])) << " | " << pct(rate_of(sr["convergence"])) << " |\n";
        }
        md << "\n";
    }
    const auto& id = r["inter_disposition"];
    md << "## Inter-disposition convergence\n\n" << id["multi_lens"] << " of " << id["clusters"]
       << " distinct issues flagged by two or more dispositions (" << pct(id["multi_lens_rate"]) << ").\n\n";
    if (!r["baseline"].is_null()) {
        const auto& b = r["baseline"];
        md << "## Disposition vs generic baseline (" << b["prs"] << " PRs)\n\n| Shared | Disposition-only | Generic-only |\n"
           << "|---:|---:|---:|\n| " << b["shared"] << " (" << pct(b["shared_rate"]) << ") | " << b["dispo_only"] << " ("
           << pct(b["dispo_only_rate"]) << ") | " << b["generic_only"] << " (" << pct(b["generic_only_rate"]) << ") |\n";
    }
    return md.str();
}

json build_compare_report(const RunManifest& m) {
    if (m.models.size() < 2) throw ConfigError("compare-models needs two models in the manifest");
    const auto& a = m.models[0].model_id;
    const auto& b = m.models[1].model_id;
    std::vector<std::string> gaps;
    std::vector<std::pair<ReviewRun, ReviewRun>> pairs;
    for (const auto& e : m.dataset) {
        auto ra = load_review(m, Condition::disposition, a, e.key());
        auto rb = load_review(m, Condition::disposition, b, e.key());
        if (!ra) gaps.push_back(e.key().str() + "/disposition/" + a);
        if (!rb) gaps.push_back(e.key().str() + "/disposition/" + b);
        if (ra && rb) pairs.emplace_back(std::move(*ra), std::move(*rb));
    }
    if (!gaps.empty()) throw MissingRuns(gaps);

    PrSource source(m);
    json per_pr = json::array();
    double strict_sum = 0, partial_sum = 0, a_only_sum = 0, b_only_sum = 0;
    std::size_t rated = 0, adherent_runs = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [ra, rb] = pairs[i];
        auto pr = source.load(m.dataset[i]);
        auto cmp = cross_model_compare(ra, rb, m.match_config);
        bool adh_a = check_framework_adherence(ra).adherent, adh_b = check_framework_adherence(rb).adherent;
        adherent_runs += adh_a + adh_b;
        if (cmp.union_size()) {
            strict_sum += *cmp.strict_rate();
            partial_sum += *cmp.partial_plus_rate();
            ++rated;
        }
        a_only_sum += static_cast<double>(cmp.a_only);
        b_only_sum += static_cast<double>(cmp.b_only);
        per_pr.push_back({{"pr", {{"repo", pr.repo}, {"number", pr.number}}},
                          {"language", pr.language},
                          {"strict", cmp.strict},
                          {"partial", cmp.partial},
                          {"a_only", cmp.a_only},
                          {"b_only", cmp.b_only},
                          {"union", cmp.union_size()},
                          {"strict_rate", rate_json(cmp.strict_rate())},
                          {"partial_plus_rate", rate_json(cmp.partial_plus_rate())},
                          {"adherent_a", adh_a},
                          {"adherent_b", adh_b}});
    }
    const double n = static_cast<double>(pairs.size());
    PromptForge forge;
    return json{{"schema_version", kMetricsSchemaVersion},
                {"manifest_digest", m.digest},
                {"template_hashes", forge.template_hashes()},
                {"model_a", a},
                {"model_b", b},
                {"per_pr", per_pr},
                {"average",
                 {{"strict_rate", rated ? json(strict_sum / static_cast<double>(rated)) : json(nullptr)},
                  {"partial_plus_rate", rated ? json(partial_sum / static_cast<double>(rated)) : json(nullptr)},
                  {"adherence", static_cast<double>(adherent_runs) / (2.0 * n)},
                  {"a_only", a_only_sum / n},
                  {"b_only", b_only_sum / n}}}};
}

std::string render_compare_markdown(const json& r) {
    std::ostringstream md;
    md << "# Cross-model agreement: " << r["model_a"].get<std::string>() << " vs " << r["model_b"].get<std::string>()
       << "\n\n| Metric |";
    for (const auto& p : r["per_pr"]) md << " " << p["language"].get<std::string>() << " |";
    md << " Avg. |\n|---|";
    for (std::size_t i = 0; i < r["per_pr"].size(); ++i) md << "---:|";
    md << "---:|\n";
    auto row = [&](const char* label, const char* key, bool percent) {
        md << "| " << label << " |";
        for (const auto& p : r["per_pr"]) {
            if (percent) md << " " << pct(p[key]) << " |";
            else md << " " << p[key] << " |";
        }
        const auto& avg = r["average"];
        std::string akey = std::string(key) == "a_only" ? "a_only" : std::string(key) == "b_only" ? "b_only" : key;
        if (percent) md << " " << pct(avg[akey]) << " |\n";
        else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.1f", avg[akey].get<double>());
            md << " " << buf << " |\n";
        }
    };
    row("Strict agreement", "strict_rate", true);
    row("Partial+ agreement", "partial_plus_rate", true);
    md << "| Framework adherence |";
    for (const auto& p : r["per_pr"]) {
        int adh = p["adherent_a"].get<bool>() + p["adherent_b"].get<bool>();
        md << " " << format_percent(adh / 2.0) << " |";
    }
    md << " " << pct(r["average"]["adherence"]) << " |\n";
    row("A-only findings", "a_only", false);
    row("B-only findings", "b_only", false);
    return md.str();
}

// -- commands ---------------------------------------------------------------

int cmd_review(const CliOptions& opts) { return run_reviews(opts, Condition::disposition); }
int cmd_baseline(const CliOptions& opts) { return run_reviews(opts, Condition::generic); }

int cmd_human(const CliOptions& opts) {
    auto m = manifest_for(opts);
    PrSource source(m);
    int rc = kExitOk;
    for (const auto& e : m.dataset) {
        try {
            auto pr = source.load(e);
            std::size_t bots = 0, acks = 0;
            for (const auto& c : pr.comments) {
                auto origin = classify_comment_origin(c);
                bots += origin == CommentOrigin::bot;
                acks += origin == CommentOrigin::author_ack;
            }
            auto findings = extract_human_findings(pr);
            write_file(m.output_dir / "human" / (pr_slug(e.key()) + ".json"),
                       dump(json{{"pr", {{"repo", e.repo}, {"number", e.number}}}, {"findings", findings}}));
            out_of(opts) << e.key().str() << ": " << findings.size() << " human findings (" << bots << " bot, " << acks
                         << " ack filtered)\n";
        } catch (const Error& ex) {
            err_of(opts) << e.key().str() << ": FAILED: " << ex.what() << "\n";
            rc = kExitPartialFailure;
        }
    }
    return rc;
}

int cmd_match(const CliOptions& opts) {
    auto m = manifest_for(opts);
    auto grouped = group_overrides(m, overrides_for(opts));
    const auto model = primary_model(m);
    PrSource source(m);
    std::vector<std::string> gaps;
    json all = json::array();
    Tally total;
    for (const auto& e : m.dataset) {
        auto run = load_review(m, Condition::disposition, model, e.key());
        if (!run) {
            gaps.push_back(e.key().str() + "/disposition/" + model);
            continue;
        }
        auto recs = classify_against_human(*run, extract_human_findings(source.load(e)), m.match_config,
                                           grouped[e.key()]);
        if (auto g = load_review(m, Condition::generic, model, e.key())) {
            auto split = three_way_split(*run, *g, m.match_config);
            for (const auto& r : split.records) all.push_back(r);
        }
        total += tally(recs);
        for (const auto& r : recs) all.push_back(r);
    }
    if (!gaps.empty()) throw MissingRuns(gaps);
    write_file(m.output_dir / "match" / "records.json", dump(json{{"manifest_digest", m.digest}, {"records", all}}));
    out_of(opts) << "human " << total.human << ": convergence " << total.convergence << ", miss " << total.miss
                 << ", excluded_style " << total.excluded_style << "\n"
                 << "dispo " << total.dispo << ": matched " << total.matched << ", unique " << total.unique
                 << " (false_positive " << total.false_positive << ")\n";
    return kExitOk;
}

int cmd_metrics(const CliOptions& opts) {
    auto m = manifest_for(opts);
    auto report = build_metrics_report(m, overrides_for(opts));
    auto md = render_metrics_markdown(report);
    write_file(m.output_dir / "reports" / "metrics.json", dump(report));
    write_file(m.output_dir / "reports" / "metrics.md", md);
    emit(opts, report, md);
    return kExitOk;
}

int cmd_compare_models(const CliOptions& opts) {
    auto m = manifest_for(opts);
    auto report = build_compare_report(m);
    auto md = render_compare_markdown(report);
    write_file(m.output_dir / "reports" / "compare.json", dump(report));
    write_file(m.output_dir / "reports" / "compare.md", md);
    emit(opts, report, md);
    return kExitOk;
}

int cmd_report(const CliOptions& opts) {
    int rc = cmd_metrics(opts);
    auto m = manifest_for(opts);
    if (m.models.size() >= 2) rc = std::max(rc, cmd_compare_models(opts));
    return rc;
}

int cmd_adjudicate(const CliOptions& opts) {
    if (!opts.adjudications) throw ConfigError("adjudicate needs --adjudications PATH");
    auto m = manifest_for(opts);
    auto existing = fs::exists(*opts.adjudications) ? load_overrides(*opts.adjudications)
                                                    : std::vector<AdjudicationOverride>{};
    auto grouped = group_overrides(m, existing);
    std::istream& in = opts.in_stream ? *opts.in_stream : std::cin;
    auto& out = out_of(opts);
    const char* rater_env = std::getenv("LENSREVIEW_RATER");
    const std::string rater = rater_env ? rater_env : "rater";
    const auto model = primary_model(m);
    PrSource source(m);
    std::size_t appended = 0;

    auto ask = [&](const std::string& question) -> char {
        out << question << " " << std::flush;
        std::string answer;
        if (!std::getline(in, answer) || answer.empty()) return 's';
        return static_cast<char>(std::tolower(static_cast<unsigned char>(answer.front())));
    };

    for (const auto& e : m.dataset) {
        auto run = load_review(m, Condition::disposition, model, e.key());
        if (!run) throw MissingRuns({e.key().str() + "/disposition/" + model});
        auto human = extract_human_findings(source.load(e));
        auto recs = classify_against_human(*run, human, m.match_config, grouped[e.key()]);
        std::map<std::string, const Finding*> by_id;
        for (const auto& f : human) by_id[f.id] = &f;
        for (const auto& f : run->findings) by_id[f.id] = &f;
        for (const auto& r : recs) {
            if (r.basis == Basis::adjudicated) continue;
            AdjudicationOverride o;
            o.pr = e.key();
            o.left_id = r.left_id;
            o.rater = rater;
            char a = 's';
            if (r.side == RecordSide::human && r.classification == Classification::convergence) {
                out << "\n" << e.key().str() << " " << r.left_id << ": " << by_id[r.left_id]->claim << "\n  auto-matched "
                    << *r.right_id << ": " << by_id[*r.right_id]->claim << "\n";
                a = ask("Same issue? [y]es / [n]o / [s]kip / [q]uit:");
                if (a == 'y' || a == 'n') {
                    o.right_id = r.right_id;
                    o.forced_classification = a == 'y' ? Classification::convergence : Classification::miss;
                    o.note = a == 'y' ? "confirmed auto match" : "rejected auto match";
                }
            } else if (r.side == RecordSide::dispo && r.classification == Classification::unique) {
                out << "\n" << e.key().str() << " " << r.left_id << ": " << by_id[r.left_id]->claim << "\n";
                a = ask("Factually incorrect? [y]es / [s]kip / [q]uit:");
                if (a == 'y') {
                    o.forced_classification = Classification::false_positive;
                    o.note = "claimed issue absent from the code";
                }
            }
            if (a == 'q') {
                out << appended << " override(s) appended\n";
                return kExitOk;
            }
            if (a == 'y' || a == 'n') {
                append_override(*opts.adjudications, o);
                ++appended;
            }
        }
    }
    out << appended << " override(s) appended\n";
    return kExitOk;
}

int run_command(const std::string& name, const CliOptions& opts) {
    static const std::map<std::string, std::function<int(const CliOptions&)>> commands = {
        {"review", cmd_review},   {"baseline", cmd_baseline},          {"human", cmd_human},
        {"match", cmd_match},     {"metrics", cmd_metrics},            {"compare-models", cmd_compare_models},
        {"adjudicate", cmd_adjudicate}, {"report", cmd_report},
    };
    auto& err = err_of(opts);
    auto it = commands.find(name);
    if (it == commands.end()) {
        err << "unknown command '" << name << "'\n";
        return kExitConfigError;
    }
    if (opts.format != "json" && opts.format != "md") {
        err << "--format must be json or md\n";
        return kExitConfigError;
    }
    try {
        return it->second(opts);
    } catch (const MissingRuns& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const UnknownRole& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const InvalidDefinition& e) {
        err << "configuration error: " << e.what() << "\n";
        for (const auto& v : e.violations()) err << "  - " << v << "\n";
    } catch (const DanglingOverride& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const TemplateIntegrityError& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const NonExecutableLens& e) {
        err << "configuration error: " << e.what() << "\n";
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitConfigError;
}

}  // namespace lensreview
