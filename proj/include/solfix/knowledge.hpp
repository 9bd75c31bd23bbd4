#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/errors.hpp"

namespace solfix {

struct CodeSpan {
    size_t start = 0; // byte offsets into KnowledgeEntry::text, [start, end)
    size_t end = 0;

    bool operator==(const CodeSpan&) const = default;
};

struct KnowledgeEntry {
    std::string id;             // stable short hash
    std::string source_version; // version family, e.g. "0.6"
    std::string target_version; // e.g. "0.8"
    std::optional<ErrorCategory> category_hint;
    std::string text;                 // plain-text change description
    std::vector<CodeSpan> code_spans; // sorted, non-overlapping, inside text
};

struct KnowledgeStore {
    std::vector<KnowledgeEntry> entries;
    // source file digest -> file name, plus curation drop count
    std::map<std::string, std::string> provenance;
    int curated_dropped = 0;
};

enum class CurationLabel { ErrorInducing, Benign };

// Stable id: short FNV-1a hash over (source_version, target_version,
// whitespace-normalized text).
std::string entry_id(const std::string& source_version,
                     const std::string& target_version,
                     const std::string& text);

// One entry per <p> change item inside the page's <section> content.
// Header (<h*>) content is dropped, all markup except <code> stripped, and
// each <code> run recorded as a byte range over the resulting plain text.
// Throws MalformedHtml when the document has no <section>.
std::vector<KnowledgeEntry> ingest_html(const std::string& html,
                                        const std::string& source_version,
                                        const std::string& target_version);

// Keeps only entries labeled error-inducing. Every entry id must appear in
// `labels`, otherwise MissingLabel naming the missing id.
KnowledgeStore curate(const std::vector<KnowledgeEntry>& entries,
                      const std::map<std::string, CurationLabel>& labels);

// Line-delimited JSON, schema_version header line first.
void save(const KnowledgeStore& store, const std::filesystem::path& path);
KnowledgeStore load(const std::filesystem::path& path);

} // namespace solfix
