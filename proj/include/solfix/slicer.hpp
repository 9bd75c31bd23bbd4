#pragma once

#include <string>
#include <utility>
#include <vector>

#include "solfix/ast.hpp"
#include "solfix/compiler.hpp"

namespace solfix {

struct Snippet {
    Span span;
    std::string text; // verbatim source lines covering the span
};

struct CodeSlice {
    std::vector<Snippet> snippets; // source order, pairwise non-overlapping
    std::vector<std::string> error_keywords;
    bool covers_error_line = false;
};

struct SliceOptions {
    // Beyond this many lines, keyword-matching snippets win over purely
    // line-adjacent ones.
    int max_lines = 200;
};

// Keywords from a diagnostic, in priority order: identifiers quoted in the
// message, the token under the error column of the excerpt, then remaining
// identifier-shaped message tokens. Reserved words excluded, duplicates
// removed.
std::vector<std::string> extract_keywords(const Diagnostic& diag);

// Error-relevant snippets: leaf nodes at the error line, keyword-matching
// declarations, one layer of structurally connected context, plus the
// pragma. Empty selection degrades to the whole file.
CodeSlice slice(const AstNode& root, const std::string& source,
                const Diagnostic& diag, const SliceOptions& opts = {});

// Degenerate slice covering the entire source (--no-slicing mode and the
// ParseFailure fallback).
CodeSlice whole_file_slice(const std::string& source, const Diagnostic& diag);

} // namespace solfix
