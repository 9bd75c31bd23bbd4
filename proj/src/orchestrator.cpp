#include "solfix/orchestrator.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "solfix/patch.hpp"
#include "solfix/slicer.hpp"

namespace solfix {

namespace {

using nlohmann::json;

std::string fnv_hex(const std::string& data) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

void persist(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

const Diagnostic& pick_diagnostic(const CompileResult& cr) {
    for (const auto& d : cr.diagnostics)
        if (is_compilation_error(d.category)) return d;
    return cr.diagnostics.front();
}

CodeSlice make_slice(const std::string& source, const Diagnostic& diag,
                     const RepairConfig& cfg) {
    if (cfg.ablation_no_slicing) return whole_file_slice(source, diag);
    try {
        auto root = parse_structure(source);
        return slice(*root, source, diag);
    } catch (const ParseFailure&) {
        return whole_file_slice(source, diag);
    }
}

std::string outcome_to_string(PatchOutcome o) {
    switch (o) {
        case PatchOutcome::Applied: return "applied";
        case PatchOutcome::ParseError: return "parse_error";
        case PatchOutcome::ApplyError: return "apply_error";
    }
    return "parse_error";
}

} // namespace

std::string digest(const std::string& text) { return fnv_hex(text); }

std::string status_to_string(RepairStatus s) {
    switch (s) {
        case RepairStatus::Fixed: return "fixed";
        case RepairStatus::ExhaustedIterations: return "exhausted_iterations";
        case RepairStatus::AbortedEnvironment: return "aborted_environment";
    }
    return "aborted_environment";
}

RepairReport repair(const std::string& source, const RepairConfig& cfg,
                    const RepairDeps& deps) {
    if (cfg.max_iterations < 1)
        throw UsageError("max_iterations must be >= 1");

    RepairReport report;
    report.final_source = source;
    std::string current = source;

    try {
        if (!deps.compiler_table)
            throw CompilerNotFound("no compiler table configured");
        std::filesystem::create_directories(deps.workdir);

        CompileOptions copts;
        copts.log_path = deps.workdir / "iter0.compile.log";
        CompileResult cr = compile(current, cfg.target_version,
                                   deps.workdir / "iter0", *deps.compiler_table,
                                   copts);
        if (cr.success) {
            report.status = RepairStatus::Fixed;
            report.fixed_at_iteration = 0;
            return report;
        }

        std::string feedback;
        const std::pair<std::string, std::string> versions{
            cfg.source_version.empty() ? "an earlier version" : cfg.source_version,
            cfg.target_version};

        for (int i = 1; i <= cfg.max_iterations; ++i) {
            IterationRecord rec;
            rec.index = i;
            rec.diagnostic = pick_diagnostic(cr);

            const CodeSlice code_slice = make_slice(current, rec.diagnostic, cfg);
            size_t slice_lines = 0;
            for (const auto& s : code_slice.snippets)
                slice_lines += static_cast<size_t>(s.span.end_line -
                                                   s.span.start_line + 1);
            rec.slice_summary = std::to_string(code_slice.snippets.size()) +
                                " snippets, " + std::to_string(slice_lines) +
                                " lines";

            Granularity g = cfg.granularity;
            std::vector<KnowledgeEntry> knowledge;
            if (cfg.ablation_no_retrieval) {
                if (g == Granularity::FineGrained) g = Granularity::CoarseGrained;
            } else if (g == Granularity::FineGrained) {
                if (!deps.store) throw EmptyStore("no knowledge store loaded");
                Query query = clean_query(rec.diagnostic);
                if (!cfg.source_version.empty())
                    query.version_pair = versions;
                rec.retrieved = retrieve(query, *deps.store, cfg.k_knowledge,
                                         deps.score_params);
                for (const auto& r : rec.retrieved)
                    for (const auto& e : deps.store->entries)
                        if (e.id == r.entry_id) knowledge.push_back(e);
            }

            PromptOptions popts;
            popts.task_template = cfg.task_template;
            popts.feedback = feedback;
            std::optional<Diagnostic> diag_opt;
            if (g != Granularity::General) diag_opt = rec.diagnostic;
            Prompt prompt = build_prompt(g, code_slice, diag_opt, knowledge,
                                         versions, popts);
            prompt = truncate_to_budget(prompt, cfg.prompt_budget);
            rec.prompt_digest = digest(prompt.rendered);
            if (cfg.keep_artifacts)
                persist(deps.workdir / ("iter" + std::to_string(i) + ".prompt.txt"),
                        prompt.rendered);

            LlmRequest req;
            req.prompt = prompt.rendered;
            const LlmResponse resp = deps.provider->complete(req);
            rec.response_digest = digest(resp.text);
            if (cfg.keep_artifacts)
                persist(deps.workdir / ("iter" + std::to_string(i) + ".response.txt"),
                        resp.text);

            try {
                const PatchSet patch = parse_patch(resp.text);
                std::string next;
                try {
                    next = solfix::apply(patch, current);
                } catch (const SearchNotFound&) {
                    next = apply_fallback_whitespace(patch, current);
                }
                current = std::move(next);
                rec.patch_outcome = PatchOutcome::Applied;
                feedback.clear();
            } catch (const NoEditsFound& e) {
                rec.patch_outcome = PatchOutcome::ParseError;
                rec.patch_error = e.what();
                feedback = std::string("Your previous reply contained no "
                                       "search/replace edit blocks: ") + e.what();
            } catch (const MalformedBlock& e) {
                rec.patch_outcome = PatchOutcome::ParseError;
                rec.patch_error = e.what();
                feedback = std::string("Your previous reply had a malformed "
                                       "edit block: ") + e.what();
            } catch (const PatchError& e) {
                rec.patch_outcome = PatchOutcome::ApplyError;
                rec.patch_error = e.what();
                feedback = std::string("Your previous edit could not be "
                                       "applied: ") + e.what();
            }

            copts.log_path =
                deps.workdir / ("iter" + std::to_string(i) + ".compile.log");
            cr = compile(current, cfg.target_version,
                         deps.workdir / ("iter" + std::to_string(i)),
                         *deps.compiler_table, copts);
            rec.compile_success_after = cr.success;
            report.iterations.push_back(std::move(rec));

            if (cr.success) {
                report.status = RepairStatus::Fixed;
                report.fixed_at_iteration = i;
                report.final_source = current;
                return report;
            }
        }

        report.status = RepairStatus::ExhaustedIterations;
        report.final_source = current;
        return report;
    } catch (const CompilerNotFound& e) {
        report.status = RepairStatus::AbortedEnvironment;
        report.abort_reason = e.what();
    } catch (const ProviderUnavailable& e) {
        report.status = RepairStatus::AbortedEnvironment;
        report.abort_reason = e.what();
    } catch (const EmptyStore& e) {
        report.status = RepairStatus::AbortedEnvironment;
        report.abort_reason = e.what();
    } catch (const TranscriptExhausted& e) {
        report.status = RepairStatus::AbortedEnvironment;
        report.abort_reason = e.what();
    } catch (const ProcessFailure& e) {
        report.status = RepairStatus::AbortedEnvironment;
        report.abort_reason = e.what();
    }
    report.final_source = current;
    return report;
}

std::vector<RepairReport> repair_batch(const std::vector<BatchJob>& jobs,
                                       const RepairDeps& shared_deps,
                                       int parallelism) {
    if (parallelism < 1) throw UsageError("parallelism must be >= 1");
    std::vector<RepairReport> reports(jobs.size());
    std::atomic<size_t> next{0};

    auto worker = [&] {
        while (true) {
            const size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) break;
            const BatchJob& job = jobs[idx];
            RepairDeps deps = shared_deps;
            deps.workdir = shared_deps.workdir /
                           ("job-" + std::to_string(idx) + "-" + job.id);
            std::unique_ptr<LlmProvider> provider;
            try {
                provider = job.make_provider ? job.make_provider() : nullptr;
                deps.provider = provider.get();
                reports[idx] = repair(job.source, job.cfg, deps);
            } catch (const Error& e) {
                RepairReport r;
                r.status = RepairStatus::AbortedEnvironment;
                r.abort_reason = e.what();
                r.final_source = job.source;
                reports[idx] = std::move(r);
            }
        }
    };

    std::vector<std::thread> threads;
    const int n = std::min<int>(parallelism, static_cast<int>(jobs.size()));
    for (int t = 0; t < std::max(1, n); ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return reports;
}

namespace {

json record_to_json(const IterationRecord& rec) {
    json j;
    j["index"] = rec.index;
    j["diagnostic"] = {
        {"category", to_string(rec.diagnostic.category)},
        {"message", rec.diagnostic.message},
        {"file", rec.diagnostic.file},
    };
    if (rec.diagnostic.location) {
        j["diagnostic"]["line"] = rec.diagnostic.location->line;
        j["diagnostic"]["column"] = rec.diagnostic.location->column;
    }
    j["slice_summary"] = rec.slice_summary;
    auto retrieved = json::array();
    for (const auto& r : rec.retrieved)
        retrieved.push_back({{"entry_id", r.entry_id},
                             {"score", r.score},
                             {"rank", r.rank}});
    j["retrieved"] = retrieved;
    j["prompt_digest"] = rec.prompt_digest;
    j["response_digest"] = rec.response_digest;
    j["patch_outcome"] = outcome_to_string(rec.patch_outcome);
    if (!rec.patch_error.empty()) j["patch_error"] = rec.patch_error;
    j["compile_success_after"] = rec.compile_success_after;
    return j;
}

json report_to_json_obj(const RepairReport& report) {
    json j;
    j["status"] = status_to_string(report.status);
    if (report.status == RepairStatus::Fixed)
        j["fixed_at_iteration"] = report.fixed_at_iteration;
    if (!report.abort_reason.empty()) j["abort_reason"] = report.abort_reason;
    auto iters = json::array();
    for (const auto& rec : report.iterations) iters.push_back(record_to_json(rec));
    j["iterations"] = iters;
    j["final_source"] = report.final_source;
    return j;
}

} // namespace

std::string report_to_json(const RepairReport& report) {
    return report_to_json_obj(report).dump(2);
}

std::string reports_to_json(const std::vector<RepairReport>& reports) {
    auto arr = json::array();
    for (const auto& r : reports) arr.push_back(report_to_json_obj(r));
    return arr.dump(2);
}

} // namespace solfix
