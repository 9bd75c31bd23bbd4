#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "solfix/compiler.hpp"
#include "solfix/knowledge.hpp"
#include "solfix/llm.hpp"
#include "solfix/metrics.hpp"
#include "solfix/orchestrator.hpp"
#include "solfix/patch.hpp"
#include "solfix/prompting.hpp"
#include "solfix/retriever.hpp"
#include "solfix/slicer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace solfix;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 1 generic/unfixed, 2 usage, 3 no edits, 4 search not
// found, 5 ambiguous match, 6 malformed input, 7 environment, 8 io
enum ExitCode {
    kOk = 0,
    kFail = 1,
    kUsage = 2,
    kNoEdits = 3,
    kNotFound = 4,
    kAmbiguous = 5,
    kMalformed = 6,
    kEnvironment = 7,
    kIo = 8,
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << text;
}

// flags > env vars > config file > defaults
struct AppConfig {
    std::string config_path;
    std::string compiler_table;
    std::string kb;
    std::string workdir = "work";

    void resolve() {
        json file;
        std::string cfg = config_path;
        if (cfg.empty())
            if (const char* v = std::getenv("SOLFIX_CONFIG")) cfg = v;
        if (!cfg.empty()) {
            std::ifstream in(cfg);
            if (!in) throw IoFailure("cannot open config file " + cfg);
            try {
                in >> file;
            } catch (const json::exception& e) {
                throw IoFailure("bad config file " + cfg + ": " + e.what());
            }
        }
        auto pick = [&](std::string& slot, const char* env, const char* key) {
            if (!slot.empty()) return; // flag won
            if (const char* v = std::getenv(env)) {
                slot = v;
                return;
            }
            if (file.contains(key)) slot = file[key].get<std::string>();
        };
        pick(compiler_table, "SOLFIX_COMPILER_TABLE", "compiler_table");
        pick(kb, "SOLFIX_KB", "kb");
        std::string wd;
        pick(wd, "SOLFIX_WORKDIR", "workdir");
        if (!wd.empty()) workdir = wd;
    }
};

Diagnostic diagnostic_from_error_file(const fs::path& path) {
    const std::string text = read_file(path);
    auto diags = parse_diagnostics(text);
    if (!diags.empty()) {
        for (const auto& d : diags)
            if (is_compilation_error(d.category)) return d;
        return diags.front();
    }
    Diagnostic d;
    d.category = classify(text);
    d.message = text;
    return d;
}

std::map<std::string, CurationLabel> load_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open labels file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoFailure("bad labels file " + path.string() + ": " + e.what());
    }
    std::map<std::string, CurationLabel> labels;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string v = it.value().get<std::string>();
        if (v == "error_inducing")
            labels[it.key()] = CurationLabel::ErrorInducing;
        else if (v == "benign")
            labels[it.key()] = CurationLabel::Benign;
        else
            throw SchemaMismatch("label for " + it.key() +
                                 " must be error_inducing or benign, got " + v);
    }
    return labels;
}

// "0.7_to_0.8.html" or "0.7-to-0.8.html" carries the version pair
bool versions_from_name(const std::string& stem, std::string& src,
                        std::string& dst) {
    for (const char* sep : {"_to_", "-to-"}) {
        size_t pos = stem.find(sep);
        if (pos == std::string::npos) continue;
        src = stem.substr(0, pos);
        dst = stem.substr(pos + std::string(sep).size());
        return !src.empty() && !dst.empty();
    }
    return false;
}

int cmd_kb_build(const std::string& html_dir, const std::string& labels_path,
                 const std::string& out_path, std::string source_version,
                 std::string target_version) {
    std::vector<KnowledgeEntry> entries;
    std::map<std::string, std::string> provenance;
    std::vector<fs::path> pages;
    for (const auto& e : fs::directory_iterator(html_dir))
        if (e.path().extension() == ".html" || e.path().extension() == ".htm")
            pages.push_back(e.path());
    if (pages.empty())
        throw IoFailure("no .html files under " + html_dir);
    std::sort(pages.begin(), pages.end());
    for (const auto& page : pages) {
        std::string src = source_version;
        std::string dst = target_version;
        if (src.empty() || dst.empty())
            if (!versions_from_name(page.stem().string(), src, dst))
                throw UsageError("cannot infer version pair from " +
                                 page.filename().string() +
                                 "; pass --source-version/--target-version");
        const std::string html = read_file(page);
        for (auto& entry : ingest_html(html, src, dst)) {
            provenance[entry.id] = page.filename().string();
            entries.push_back(std::move(entry));
        }
    }
    KnowledgeStore store;
    if (!labels_path.empty()) {
        store = curate(entries, load_labels(labels_path));
    } else {
        store.entries = std::move(entries);
    }
    store.provenance = std::move(provenance);
    save(store, out_path);
    std::cerr << "kb build: " << store.entries.size() << " entries ("
              << store.curated_dropped << " dropped by curation) -> "
              << out_path << "\n";
    return kOk;
}

int cmd_kb_stats(const std::string& kb_path, bool as_json) {
    const KnowledgeStore store = load(kb_path);
    std::map<std::string, int> pairs;
    size_t spans = 0;
    for (const auto& e : store.entries) {
        ++pairs[e.source_version + " -> " + e.target_version];
        spans += e.code_spans.size();
    }
    if (as_json) {
        json j;
        j["entries"] = store.entries.size();
        j["code_spans"] = spans;
        j["curated_dropped"] = store.curated_dropped;
        j["version_pairs"] = pairs;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "entries:         " << store.entries.size() << "\n";
        std::cout << "code spans:      " << spans << "\n";
        std::cout << "curated dropped: " << store.curated_dropped << "\n";
        for (const auto& [pair, n] : pairs)
            std::cout << "  " << pair << ": " << n << "\n";
    }
    return kOk;
}

int cmd_kb_query(const std::string& kb_path, const std::string& error_file,
                 int k, double weight_code, double version_boost,
                 const std::string& source_version,
                 const std::string& target_version, bool as_json) {
    const KnowledgeStore store = load(kb_path);
    Query query = clean_query(diagnostic_from_error_file(error_file));
    if (!source_version.empty() && !target_version.empty())
        query.version_pair = {source_version, target_version};
    ScoreParams params;
    params.weight_code = weight_code;
    params.version_boost = version_boost;
    const auto results = retrieve(query, store, k, params);

    std::map<std::string, const KnowledgeEntry*> by_id;
    for (const auto& e : store.entries) by_id[e.id] = &e;
    if (as_json) {
        json arr = json::array();
        for (const auto& r : results) {
            json j;
            j["rank"] = r.rank;
            j["entry_id"] = r.entry_id;
            j["score"] = r.score;
            j["text"] = by_id.at(r.entry_id)->text;
            arr.push_back(j);
        }
        std::cout << arr.dump(2) << "\n";
    } else {
        for (const auto& r : results) {
            std::cout << "#" << r.rank << "  score=" << r.score << "  id="
                      << r.entry_id << "\n";
            std::cout << "  " << by_id.at(r.entry_id)->text << "\n";
        }
    }
    return kOk;
}

int cmd_slice(const std::string& file, int line,
              const std::vector<std::string>& keywords, bool as_json) {
    const std::string source = read_file(file);
    Diagnostic diag;
    diag.category = ErrorCategory::Type;
    diag.file = file;
    diag.location = SourceLocation{line, 1};
    std::string msg = "TypeError: slice request";
    for (const auto& k : keywords) msg += " \"" + k + "\"";
    diag.message = msg;

    CodeSlice result;
    try {
        auto root = parse_structure(source);
        result = slice(*root, source, diag);
    } catch (const ParseFailure&) {
        result = whole_file_slice(source, diag);
    }
    if (as_json) {
        json arr = json::array();
        for (const auto& s : result.snippets)
            arr.push_back({{"start_line", s.span.start_line},
                           {"end_line", s.span.end_line},
                           {"text", s.text}});
        json j;
        j["snippets"] = arr;
        j["error_keywords"] = result.error_keywords;
        j["covers_error_line"] = result.covers_error_line;
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& s : result.snippets) {
            std::cout << "-- lines " << s.span.start_line << ".."
                      << s.span.end_line << " --\n";
            std::cout << s.text;
            if (!s.text.empty() && s.text.back() != '\n') std::cout << "\n";
        }
        std::cout << "keywords:";
        for (const auto& k : result.error_keywords) std::cout << " " << k;
        std::cout << "\n";
    }
    return kOk;
}

int cmd_patch_apply(const std::string& source_path,
                    const std::string& patch_path, bool in_place,
                    const std::string& out_path) {
    const std::string source = read_file(source_path);
    const std::string patch_text = read_file(patch_path);
    const PatchSet patch = parse_patch(patch_text);
    std::string result;
    try {
        result = apply(patch, source);
    } catch (const SearchNotFound&) {
        result = apply_fallback_whitespace(patch, source);
    }
    if (in_place)
        write_file(source_path, result);
    else if (!out_path.empty())
        write_file(out_path, result);
    else
        std::cout << result;
    return kOk;
}

struct FixArgs {
    std::string file;
    std::string target;
    std::string source_version;
    std::string granularity = "fine";
    bool no_slicing = false;
    bool no_retrieval = false;
    int max_iterations = 5;
    int k = 1;
    std::string kb;
    std::string mock;
    std::string report_path;
    std::string template_path;
    bool keep_artifacts = false;
    std::size_t budget = kDefaultPromptBudget;
};

RepairConfig to_repair_config(const FixArgs& a) {
    RepairConfig cfg;
    cfg.max_iterations = a.max_iterations;
    cfg.granularity = granularity_from_string(a.granularity);
    cfg.ablation_no_slicing = a.no_slicing;
    cfg.ablation_no_retrieval = a.no_retrieval;
    cfg.k_knowledge = a.k;
    cfg.target_version = a.target;
    cfg.source_version = a.source_version;
    cfg.prompt_budget = a.budget;
    if (!a.template_path.empty())
        cfg.task_template = load_task_template(a.template_path);
    cfg.keep_artifacts = a.keep_artifacts;
    return cfg;
}

fs::path fresh_workdir(const fs::path& root, const std::string& tag) {
    const auto stamp = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::system_clock::now().time_since_epoch())
                           .count();
    fs::path dir = root / (tag + "-" + std::to_string(stamp));
    fs::create_directories(dir);
    return dir;
}

int cmd_fix(AppConfig& app, const FixArgs& args, bool as_json) {
    if (args.max_iterations < 1)
        throw UsageError("--max-iterations must be >= 1");
    const std::string source = read_file(args.file);

    const CompilerTable table = CompilerTable::resolve(app.compiler_table);
    if (table.empty())
        throw CompilerNotFound(
            "no compiler table; pass --compiler-table or set "
            "SOLFIX_COMPILER_TABLE");

    KnowledgeStore store;
    RepairConfig cfg = to_repair_config(args);
    if (!args.no_retrieval &&
        cfg.granularity == Granularity::FineGrained) {
        std::string kb_path = args.kb.empty() ? app.kb : args.kb;
        if (kb_path.empty())
            throw EmptyStore("no knowledge base; pass --kb or use "
                             "--no-retrieval");
        store = load(kb_path);
    }

    std::unique_ptr<LlmProvider> provider;
    if (!args.mock.empty()) {
        provider = std::make_unique<MockProvider>(load_transcript(args.mock));
    } else {
        provider = make_http_provider(http_config_from_env());
    }

    RepairDeps deps;
    deps.compiler_table = &table;
    deps.store = store.entries.empty() ? nullptr : &store;
    deps.provider = provider.get();
    deps.workdir = fresh_workdir(app.workdir, fs::path(args.file).stem().string());

    const RepairReport report = repair(source, cfg, deps);
    const std::string report_json = report_to_json(report);
    if (!args.report_path.empty()) write_file(args.report_path, report_json);
    if (as_json) {
        std::cout << report_json << "\n";
    } else {
        std::cout << "status: " << status_to_string(report.status);
        if (report.status == RepairStatus::Fixed)
            std::cout << " (iteration " << report.fixed_at_iteration << ")";
        std::cout << "\n";
        for (const auto& it : report.iterations)
            std::cout << "  iter " << it.index << ": "
                      << to_string(it.diagnostic.category) << ", "
                      << it.slice_summary << ", compile="
                      << (it.compile_success_after ? "ok" : "fail") << "\n";
        if (!report.abort_reason.empty())
            std::cout << "abort: " << report.abort_reason << "\n";
    }
    if (report.status == RepairStatus::Fixed) {
        write_file(args.file, report.final_source);
        return kOk;
    }
    return report.status == RepairStatus::AbortedEnvironment ? kEnvironment
                                                             : kFail;
}

std::vector<RepairReport> reports_from_json(const fs::path& path) {
    json arr;
    {
        std::ifstream in(path);
        if (!in) throw IoFailure("cannot open reports file " + path.string());
        try {
            in >> arr;
        } catch (const json::exception& e) {
            throw IoFailure("bad reports file " + path.string() + ": " +
                            e.what());
        }
    }
    if (!arr.is_array())
        throw SchemaMismatch("reports file must hold a JSON array");
    std::vector<RepairReport> out;
    for (const auto& j : arr) {
        RepairReport r;
        const std::string status = j.at("status").get<std::string>();
        if (status == "fixed")
            r.status = RepairStatus::Fixed;
        else if (status == "exhausted_iterations")
            r.status = RepairStatus::ExhaustedIterations;
        else
            r.status = RepairStatus::AbortedEnvironment;
        if (j.contains("fixed_at_iteration"))
            r.fixed_at_iteration = j["fixed_at_iteration"].get<int>();
        r.final_source = j.at("final_source").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

int cmd_eval(const std::string& dataset_path, const std::string& reports_path,
             const std::string& out_path, bool as_json) {
    const auto dataset = load_dataset(dataset_path);
    const auto reports = reports_from_json(reports_path);
    const EvalSummary summary = evaluate(dataset, reports);
    json j = json::parse(summary_to_json(summary));
    j["schema_version"] = 1;
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    if (as_json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << summary_to_table(summary);
    return kOk;
}

std::vector<BatchJob> jobs_from_dataset(const std::vector<DatasetInstance>& ds,
                                        const RepairConfig& base,
                                        const fs::path& dataset_dir) {
    std::vector<BatchJob> jobs;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto& inst = ds[i];
        BatchJob job;
        job.id = inst.breaking_change_id + "-" + std::to_string(i);
        job.source = inst.error_contract;
        job.cfg = base;
        job.cfg.target_version = inst.target_version;
        job.cfg.source_version = inst.source_version;
        fs::path transcript = inst.transcript;
        if (transcript.is_relative()) transcript = dataset_dir / transcript;
        if (inst.transcript.empty())
            throw UsageError("instance " + job.id +
                             " has no transcript; sweep and batch fix run "
                             "against mock transcripts");
        job.make_provider = [transcript]() -> std::unique_ptr<LlmProvider> {
            return std::make_unique<MockProvider>(load_transcript(transcript));
        };
        jobs.push_back(std::move(job));
    }
    return jobs;
}

int cmd_sweep(AppConfig& app, const std::string& dataset_path, int min_cap,
              int max_cap, const FixArgs& fix_args, int parallelism,
              const std::string& data_out, bool as_json) {
    if (min_cap < 1 || max_cap < min_cap)
        throw UsageError("cap range must satisfy 1 <= min <= max");
    const auto dataset = load_dataset(dataset_path);
    if (dataset.empty()) throw EmptyInput("empty dataset: " + dataset_path);

    const CompilerTable table = CompilerTable::resolve(app.compiler_table);
    if (table.empty())
        throw CompilerNotFound(
            "no compiler table; pass --compiler-table or set "
            "SOLFIX_COMPILER_TABLE");
    KnowledgeStore store;
    RepairConfig base = to_repair_config(fix_args);
    if (!fix_args.no_retrieval && base.granularity == Granularity::FineGrained) {
        std::string kb_path = fix_args.kb.empty() ? app.kb : fix_args.kb;
        if (kb_path.empty())
            throw EmptyStore("no knowledge base; pass --kb or use "
                             "--no-retrieval");
        store = load(kb_path);
    }

    RepairDeps deps;
    deps.compiler_table = &table;
    deps.store = store.entries.empty() ? nullptr : &store;

    std::vector<std::pair<int, double>> rows;
    const fs::path dataset_dir = fs::path(dataset_path).parent_path();
    for (int cap = min_cap; cap <= max_cap; ++cap) {
        base.max_iterations = cap;
        auto jobs = jobs_from_dataset(dataset, base, dataset_dir);
        deps.workdir = fresh_workdir(app.workdir, "sweep-cap" +
                                                      std::to_string(cap));
        const auto reports = repair_batch(jobs, deps, parallelism);
        rows.emplace_back(cap, pass_rate(reports));
    }

    std::ostringstream table_text;
    table_text << "cap\tpass_rate\n";
    for (const auto& [cap, rate] : rows)
        table_text << cap << "\t" << rate << "\n";
    if (!data_out.empty()) write_file(data_out, table_text.str());
    if (as_json) {
        json arr = json::array();
        for (const auto& [cap, rate] : rows)
            arr.push_back({{"cap", cap}, {"pass_rate", rate}});
        std::cout << arr.dump(2) << "\n";
    } else {
        std::cout << table_text.str();
    }
    return kOk;
}

int dispatch_error(const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const UsageError*>(&e)) return kUsage;
    if (dynamic_cast<const NoEditsFound*>(&e)) return kNoEdits;
    if (dynamic_cast<const SearchNotFound*>(&e)) return kNotFound;
    if (dynamic_cast<const AmbiguousMatch*>(&e)) return kAmbiguous;
    if (dynamic_cast<const MalformedBlock*>(&e)) return kMalformed;
    if (dynamic_cast<const MalformedHtml*>(&e)) return kMalformed;
    if (dynamic_cast<const SchemaMismatch*>(&e)) return kMalformed;
    if (dynamic_cast<const ParseFailure*>(&e)) return kMalformed;
    if (dynamic_cast<const CompilerNotFound*>(&e)) return kEnvironment;
    if (dynamic_cast<const ProviderUnavailable*>(&e)) return kEnvironment;
    if (dynamic_cast<const BackendUnavailable*>(&e)) return kEnvironment;
    if (dynamic_cast<const EmptyStore*>(&e)) return kEnvironment;
    if (dynamic_cast<const IoFailure*>(&e)) return kIo;
    return kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compiler-version migration repair for Solidity contracts"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "machine-readable output on stdout");

    AppConfig config;
    app.add_option("--config", config.config_path, "JSON config file");
    app.add_option("--compiler-table", config.compiler_table,
                   "version-prefix to command table (JSON)");
    app.add_option("--workdir", config.workdir, "workdir root");

    // kb build | query | stats
    auto* kb = app.add_subcommand("kb", "knowledge base workflows");
    kb->require_subcommand(1);

    auto* kb_build = kb->add_subcommand("build", "ingest HTML change logs");
    std::string html_dir, labels_path, kb_out, src_ver, dst_ver;
    kb_build->add_option("--html", html_dir, "directory of .html pages")
        ->required();
    kb_build->add_option("--labels", labels_path,
                         "JSON id -> error_inducing|benign");
    kb_build->add_option("--out", kb_out, "output kb.jsonl")->required();
    kb_build->add_option("--source-version", src_ver, "applies to all pages");
    kb_build->add_option("--target-version", dst_ver, "applies to all pages");

    auto* kb_stats = kb->add_subcommand("stats", "summarize a kb file");
    std::string kb_path;
    kb_stats->add_option("kb", kb_path, "kb.jsonl")->required();

    auto* kb_query = kb->add_subcommand("query", "rank entries for an error");
    std::string q_kb, q_error_file, q_src, q_dst;
    int q_k = 5;
    double q_weight = 2.0, q_boost = 1.5;
    kb_query->add_option("kb", q_kb, "kb.jsonl")->required();
    kb_query->add_option("--error-file", q_error_file,
                         "compiler output to query with")->required();
    kb_query->add_option("-k", q_k, "results to return");
    kb_query->add_option("--weight-code", q_weight, "code token weight");
    kb_query->add_option("--version-boost", q_boost, "version pair boost");
    kb_query->add_option("--source-version", q_src, "query version pair");
    kb_query->add_option("--target-version", q_dst, "query version pair");

    // slice
    auto* slice_cmd = app.add_subcommand("slice", "print the error slice");
    std::string slice_file;
    int slice_line = 1;
    std::vector<std::string> slice_keywords;
    slice_cmd->add_option("file", slice_file, "contract file")->required();
    slice_cmd->add_option("--line", slice_line, "error line")->required();
    slice_cmd->add_option("--keyword", slice_keywords, "error keywords");

    // patch apply
    auto* patch_cmd = app.add_subcommand("patch", "patch workflows");
    patch_cmd->require_subcommand(1);
    auto* patch_apply = patch_cmd->add_subcommand(
        "apply", "apply search/replace edit blocks");
    std::string p_source, p_patch, p_out;
    bool p_in_place = false;
    patch_apply->add_option("--source", p_source, "file to edit")->required();
    patch_apply->add_option("--patch", p_patch, "edit block file")->required();
    patch_apply->add_flag("--in-place", p_in_place, "rewrite --source");
    patch_apply->add_option("--out", p_out, "write result here");

    // fix
    auto* fix_cmd = app.add_subcommand("fix", "repair a contract");
    FixArgs fix_args;
    fix_cmd->add_option("file", fix_args.file, "contract file")->required();
    fix_cmd->add_option("--target", fix_args.target, "target version family")
        ->required();
    fix_cmd->add_option("--source-version", fix_args.source_version,
                        "original version family");
    fix_cmd->add_option("--granularity", fix_args.granularity,
                        "general|coarse|fine");
    fix_cmd->add_flag("--no-slicing", fix_args.no_slicing,
                      "send the whole file");
    fix_cmd->add_flag("--no-retrieval", fix_args.no_retrieval,
                      "skip knowledge retrieval");
    fix_cmd->add_option("--max-iterations", fix_args.max_iterations,
                        "iteration cap");
    fix_cmd->add_option("-k", fix_args.k, "knowledge entries per prompt");
    fix_cmd->add_option("--kb", fix_args.kb, "knowledge base file");
    fix_cmd->add_option("--mock", fix_args.mock, "mock transcript (JSONL)");
    fix_cmd->add_option("--report", fix_args.report_path, "report JSON path");
    fix_cmd->add_option("--template", fix_args.template_path,
                        "task description template");
    fix_cmd->add_option("--budget", fix_args.budget, "prompt char budget");
    fix_cmd->add_flag("--keep-artifacts", fix_args.keep_artifacts,
                      "retain prompts/responses/logs in the workdir");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score repair reports");
    std::string e_dataset, e_reports, e_out;
    eval_cmd->add_option("--dataset", e_dataset, "dataset JSONL")->required();
    eval_cmd->add_option("--reports", e_reports, "reports JSON")->required();
    eval_cmd->add_option("--out", e_out, "summary JSON path");

    // sweep
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "pass rate across iteration caps");
    std::string s_dataset, s_data_out = "sweep.dat";
    int s_min = 1, s_max = 10, s_parallelism = 1;
    FixArgs sweep_fix;
    sweep_cmd->add_option("--dataset", s_dataset, "dataset JSONL")->required();
    sweep_cmd->add_option("--min-cap", s_min, "lowest iteration cap");
    sweep_cmd->add_option("--max-cap", s_max, "highest iteration cap");
    sweep_cmd->add_option("--parallelism", s_parallelism, "parallel jobs");
    sweep_cmd->add_option("--kb", sweep_fix.kb, "knowledge base file");
    sweep_cmd->add_flag("--no-slicing", sweep_fix.no_slicing,
                        "send whole files");
    sweep_cmd->add_flag("--no-retrieval", sweep_fix.no_retrieval,
                        "skip knowledge retrieval");
    sweep_cmd->add_option("--out", s_data_out, "plot data file");

    // version
    auto* version_cmd = app.add_subcommand("version", "print tool version");

    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
        for (auto* nested : sub->get_subcommands({})) nested->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        config.resolve();
        if (version_cmd->parsed()) {
            std::cout << "solfix " << kVersion << "\n";
            return kOk;
        }
        if (kb_build->parsed())
            return cmd_kb_build(html_dir, labels_path, kb_out, src_ver, dst_ver);
        if (kb_stats->parsed()) return cmd_kb_stats(kb_path, as_json);
        if (kb_query->parsed())
            return cmd_kb_query(q_kb, q_error_file, q_k, q_weight, q_boost,
                                q_src, q_dst, as_json);
        if (slice_cmd->parsed())
            return cmd_slice(slice_file, slice_line, slice_keywords, as_json);
        if (patch_apply->parsed())
            return cmd_patch_apply(p_source, p_patch, p_in_place, p_out);
        if (fix_cmd->parsed()) return cmd_fix(config, fix_args, as_json);
        if (eval_cmd->parsed())
            return cmd_eval(e_dataset, e_reports, e_out, as_json);
        if (sweep_cmd->parsed())
            return cmd_sweep(config, s_dataset, s_min, s_max, sweep_fix,
                             s_parallelism, s_data_out, as_json);
        std::cerr << "error: no subcommand\n";
        return kUsage;
    } catch (const Error& e) {
        return dispatch_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
}
