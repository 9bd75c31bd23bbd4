#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/knowledge.hpp"
#include "solfix/llm.hpp"
#include "solfix/prompting.hpp"
#include "solfix/retriever.hpp"

namespace solfix {

struct RepairConfig {
    int max_iterations = 5;
    Granularity granularity = Granularity::FineGrained;
    bool ablation_no_slicing = false;
    bool ablation_no_retrieval = false;
    int k_knowledge = 1;
    std::string target_version;
    std::string source_version; // informational
    size_t prompt_budget = kDefaultPromptBudget;
    std::string task_template; // empty = built-in default
    bool keep_artifacts = true;
};

enum class PatchOutcome { Applied, ParseError, ApplyError };

struct IterationRecord {
    int index = 1; // strictly increasing from 1
    Diagnostic diagnostic;
    std::string slice_summary; // "<n> snippets, <m> lines"
    std::vector<RetrievalResult> retrieved;
    std::string prompt_digest;
    std::string response_digest;
    PatchOutcome patch_outcome = PatchOutcome::ParseError;
    std::string patch_error; // empty when applied
    bool compile_success_after = false;
};

enum class RepairStatus { Fixed, ExhaustedIterations, AbortedEnvironment };

struct RepairReport {
    RepairStatus status = RepairStatus::ExhaustedIterations;
    int fixed_at_iteration = 0; // 0 = compiled before any iteration
    std::vector<IterationRecord> iterations;
    std::string final_source;
    std::string abort_reason; // set for AbortedEnvironment
};

struct RepairDeps {
    const CompilerTable* compiler_table = nullptr;
    const KnowledgeStore* store = nullptr; // may be null under no-retrieval
    LlmProvider* provider = nullptr;
    ScoreParams score_params;
    std::filesystem::path workdir;
};

// Content digest used in iteration records (prompts and responses are also
// persisted to the workdir when keep_artifacts is set).
std::string digest(const std::string& text);

std::string status_to_string(RepairStatus s);

// The compile -> slice -> retrieve -> prompt -> complete -> patch ->
// recompile loop, capped at cfg.max_iterations. Patch parse/apply failures
// are recorded and fed back into the next prompt. Environment failures
// (CompilerNotFound, ProviderUnavailable, EmptyStore) abort the job.
RepairReport repair(const std::string& source, const RepairConfig& cfg,
                    const RepairDeps& deps);

struct BatchJob {
    std::string id;
    std::string source;
    RepairConfig cfg;
    // per-job provider (mock transcripts are per job, never shared)
    std::function<std::unique_ptr<LlmProvider>()> make_provider;
};

// Independent jobs, each in its own workdir; result order matches input
// order regardless of completion order. Per-job errors are captured in
// that job's report.
std::vector<RepairReport> repair_batch(const std::vector<BatchJob>& jobs,
                                       const RepairDeps& shared_deps,
                                       int parallelism);

std::string report_to_json(const RepairReport& report);
std::string reports_to_json(const std::vector<RepairReport>& reports);

} // namespace solfix
