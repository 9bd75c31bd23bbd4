#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/knowledge.hpp"

namespace solfix {

struct Query {
    std::string text; // cleaned error text, no location gutters
    std::vector<std::string> code_tokens;
    std::optional<std::pair<std::string, std::string>> version_pair;
};

struct RetrievalResult {
    std::string entry_id;
    double score = 0.0;
    int rank = 1;
};

struct LabeledTriple {
    std::string query;
    std::string answer;
    int label = 0; // 0 or 1
    std::string groundtruth_id;
};

struct ScoreParams {
    double weight_code = 2.0;    // >= 1; 1 disables code weighting
    double version_boost = 1.5;  // >= 1; applied on version-pair match
    double k1 = 1.2;             // BM25 term-frequency saturation
    double b = 0.75;             // BM25 length normalization
};

// Lowercase tokens split on non-alphanumerics; member-access chains survive
// as one token plus their parts ("msg.sender" -> msg.sender, msg, sender).
std::vector<std::string> tokenize(const std::string& text);

// Strips location gutters, caret lines and line-number pipes from the
// diagnostic; keeps the message sentence plus the flagged source line.
// Tokens from the flagged line and quoted identifiers become code_tokens.
Query clean_query(const Diagnostic& diag);

// Code-weighted lexical relevance (BM25 over the store), where tokens inside
// an entry's code spans and query code_tokens contribute weight_code times
// more. With weight_code = 1 and version_boost = 1 this is the plain
// lexical baseline, exactly.
double score(const Query& query, const KnowledgeEntry& entry,
             const KnowledgeStore& store, const ScoreParams& params = {});

// Top-k by score, ties broken by ascending entry id, ranks contiguous
// from 1. Throws EmptyStore.
std::vector<RetrievalResult> retrieve(const Query& query,
                                      const KnowledgeStore& store, int k,
                                      const ScoreParams& params = {});

// Per-query hit rate within the top k, as a percentage.
double acc_at_k(const std::vector<std::pair<Query, std::string>>& eval_set,
                const KnowledgeStore& store, int k,
                const ScoreParams& params = {});

// External embedding provider; throws BackendUnavailable when unreachable.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<std::vector<double>> embed(
        const std::vector<std::string>& texts) = 0;
};

// Embedding backend over an HTTP endpoint: POST /embeddings with
// {"model": ..., "input": [...]}, response {"data": [{"embedding": [...]}]}.
std::unique_ptr<EmbeddingBackend> make_http_embedding_backend(
    const std::string& base_url, const std::string& model);

// Cosine-similarity ranking over backend vectors, same tie-break contract
// as retrieve.
std::vector<RetrievalResult> embed_backend_retrieve(const Query& query,
                                                    const KnowledgeStore& store,
                                                    int k,
                                                    EmbeddingBackend& backend);

// Line-delimited JSON eval set: {"query","answer","label","groundtruth_id"}.
std::vector<LabeledTriple> load_eval_set(const std::filesystem::path& path);

} // namespace solfix
