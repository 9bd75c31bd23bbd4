#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/orchestrator.hpp"

namespace solfix {

struct DatasetInstance {
    std::string breaking_change_id; // KnowledgeEntry id
    std::string source_version;
    std::string target_version;
    std::string error_contract;    // contract text that fails on target
    std::string groundtruth_patch; // repaired contract text
    ErrorCategory error_category = ErrorCategory::Other;
    std::string transcript; // optional per-instance mock transcript path
};

struct MetricRow {
    int count = 0;
    double pass_rate = 0.0; // percentages in [0,100]
    double bleu4 = 0.0;
    double es = 0.0;
};

struct EvalSummary {
    std::map<std::string, MetricRow> per_category;
    MetricRow average;            // instance-weighted, over all instances
    MetricRow average_fixed_only; // BLEU/ES over successfully fixed instances
    int fixed_count = 0;
};

// Percentage of reports whose status is a fix. Throws EmptyInput.
double pass_rate(const std::vector<RepairReport>& reports);

// Geometric mean of 1..4-gram modified precisions with brevity penalty;
// zero counts smoothed with 1e-9. Tokens: lowercase, split at whitespace
// and punctuation boundaries, punctuation kept as tokens.
double bleu4(const std::string& candidate, const std::string& reference);

std::vector<std::string> bleu_tokenize(const std::string& text);

// 1 - LevenshteinDistance / max(|a|, |b|), character-level. Two empty
// texts score 1.0 by convention.
double edit_similarity(const std::string& candidate, const std::string& reference);

size_t levenshtein_distance(const std::string& a, const std::string& b);

// Per-category and average metrics over aligned (instance, report) pairs.
EvalSummary evaluate(const std::vector<DatasetInstance>& dataset,
                     const std::vector<RepairReport>& reports);

std::string summary_to_json(const EvalSummary& s);
std::string summary_to_table(const EvalSummary& s);

// Line-delimited JSON dataset files.
std::vector<DatasetInstance> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<DatasetInstance>& dataset,
                  const std::filesystem::path& path);

} // namespace solfix
