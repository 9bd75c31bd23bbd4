#pragma once

#include <string>
#include <vector>

#include "solfix/errors.hpp"

namespace solfix {

struct Edit {
    std::string search;  // contiguous lines, non-empty
    std::string replace; // may be empty (deletion)
};

struct PatchSet {
    std::vector<Edit> edits; // applied in order, each against the current buffer
    std::string raw;         // the model output this was parsed from
};

// Extracts every well-formed block between the SEARCH / ======= / REPLACE
// marker lines (6-8 repeated marker characters tolerated). Content outside
// blocks is ignored; "N | " line-number gutters are stripped when present on
// every line of a chunk. Throws NoEditsFound or MalformedBlock (with byte
// offset).
PatchSet parse_patch(const std::string& raw);

// Canonical rendering; parse_patch(render_patch(p)) round-trips.
std::string render_patch(const PatchSet& patch);

// Applies edits in order. Each search chunk must match exactly once as
// contiguous whole lines; SearchNotFound / AmbiguousMatch abort the whole
// application and the caller keeps the original source.
std::string apply(const PatchSet& patch, const std::string& source);

// Retry with trailing-whitespace-insensitive line matching. The buffer's
// line endings are preserved outside the replaced region.
std::string apply_fallback_whitespace(const PatchSet& patch,
                                      const std::string& source);

} // namespace solfix
