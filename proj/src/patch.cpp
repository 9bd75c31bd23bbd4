#include "solfix/patch.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace solfix {

namespace {

const std::regex kSearchMarker(R"(^\s*<{6,8}\s*SEARCH\s*$)");
const std::regex kDividerMarker(R"(^\s*={6,8}\s*$)");
const std::regex kReplaceMarker(R"(^\s*>{6,8}\s*REPLACE\s*$)");
const std::regex kGutter(R"(^\s*\d+ ?\|( (.*))?$)");

struct Line {
    std::string text;
    size_t offset = 0; // byte offset of the line start in the raw input
};

std::vector<Line> lines_with_offsets(const std::string& raw) {
    std::vector<Line> out;
    size_t start = 0;
    for (size_t i = 0; i <= raw.size(); ++i) {
        if (i == raw.size() || raw[i] == '\n') {
            std::string text = raw.substr(start, i - start);
            if (!text.empty() && text.back() == '\r') text.pop_back();
            out.push_back({std::move(text), start});
            start = i + 1;
        }
    }
    return out;
}

// "N | code" gutters stripped when every non-empty line of the chunk has one.
std::vector<std::string> strip_gutters(std::vector<std::string> chunk) {
    bool all = !chunk.empty();
    for (const auto& line : chunk) {
        if (line.empty()) continue;
        if (!std::regex_match(line, kGutter)) {
            all = false;
            break;
        }
    }
    if (!all) return chunk;
    for (auto& line : chunk) {
        std::smatch m;
        if (std::regex_match(line, m, kGutter))
            line = m[2].matched ? m[2].str() : std::string{};
    }
    return chunk;
}

std::string join(const std::vector<std::string>& lines) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string rtrim(const std::string& s) {
    size_t end = s.size();
    while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(0, end);
}

// Start offsets of every whole-line occurrence of `needle` (no trailing
// newline) in `haystack`.
std::vector<size_t> whole_line_occurrences(const std::string& haystack,
                                           const std::string& needle) {
    std::vector<size_t> hits;
    size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        const bool starts_line = pos == 0 || haystack[pos - 1] == '\n';
        const size_t end = pos + needle.size();
        const bool ends_line = end == haystack.size() || haystack[end] == '\n';
        if (starts_line && ends_line) hits.push_back(pos);
        ++pos;
    }
    return hits;
}

size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= b.size(); ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest_line_hint(const std::string& source, const std::string& search) {
    std::istringstream ss(search);
    std::string first_line;
    std::getline(ss, first_line);
    std::istringstream src(source);
    std::string line;
    size_t best = SIZE_MAX;
    int best_no = 0, no = 0;
    while (std::getline(src, line)) {
        ++no;
        const size_t d = levenshtein(line, first_line);
        if (d < best) {
            best = d;
            best_no = no;
        }
    }
    if (best_no == 0) return "no candidate line";
    return "nearest line " + std::to_string(best_no);
}

std::string normalize_chunk(const std::string& chunk) {
    std::string s = chunk;
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

} // namespace

PatchSet parse_patch(const std::string& raw) {
    const auto lines = lines_with_offsets(raw);
    PatchSet patch;
    patch.raw = raw;

    size_t i = 0;
    while (i < lines.size()) {
        if (!std::regex_match(lines[i].text, kSearchMarker)) {
            ++i;
            continue;
        }
        const size_t block_offset = lines[i].offset;
        std::vector<std::string> search, replace;
        size_t j = i + 1;
        bool divider = false, terminator = false;
        for (; j < lines.size(); ++j) {
            if (!divider && std::regex_match(lines[j].text, kDividerMarker)) {
                divider = true;
            } else if (divider && std::regex_match(lines[j].text, kReplaceMarker)) {
                terminator = true;
                ++j;
                break;
            } else if (std::regex_match(lines[j].text, kSearchMarker)) {
                break; // a new block opened before this one closed
            } else {
                (divider ? replace : search).push_back(lines[j].text);
            }
        }
        if (!divider || !terminator)
            throw MalformedBlock("unterminated edit block at byte offset " +
                                 std::to_string(block_offset));
        search = strip_gutters(std::move(search));
        replace = strip_gutters(std::move(replace));
        Edit edit{join(search), join(replace)};
        if (edit.search.empty())
            throw MalformedBlock("empty search chunk at byte offset " +
                                 std::to_string(block_offset));
        if (edit.search == edit.replace)
            throw MalformedBlock("search and replace are identical at byte offset " +
                                 std::to_string(block_offset));
        patch.edits.push_back(std::move(edit));
        i = j;
    }
    if (patch.edits.empty()) throw NoEditsFound("no search/replace blocks in output");
    return patch;
}

std::string render_patch(const PatchSet& patch) {
    std::ostringstream os;
    for (const auto& e : patch.edits) {
        os << "<<<<<<< SEARCH\n"
           << e.search << "\n=======\n";
        if (!e.replace.empty()) os << e.replace << "\n";
        os << ">>>>>>> REPLACE\n";
    }
    return os.str();
}

std::string apply(const PatchSet& patch, const std::string& source) {
    std::string buffer = source;
    for (size_t idx = 0; idx < patch.edits.size(); ++idx) {
        const std::string search = normalize_chunk(patch.edits[idx].search);
        const std::string replace = normalize_chunk(patch.edits[idx].replace);
        const auto hits = whole_line_occurrences(buffer, search);
        if (hits.empty())
            throw SearchNotFound("edit " + std::to_string(idx + 1) +
                                 ": search chunk not found (" +
                                 nearest_line_hint(buffer, search) + ")");
        if (hits.size() >= 2)
            throw AmbiguousMatch("edit " + std::to_string(idx + 1) +
                                 ": search chunk occurs " +
                                 std::to_string(hits.size()) + " times");
        size_t pos = hits[0];
        size_t len = search.size();
        if (replace.empty()) {
            // deletion removes the line, not just its content
            if (pos + len < buffer.size() && buffer[pos + len] == '\n')
                ++len;
            else if (pos > 0 && buffer[pos - 1] == '\n') {
                --pos; // last line: absorb the preceding newline instead
                ++len;
            }
        }
        buffer = buffer.substr(0, pos) + replace + buffer.substr(pos + len);
    }
    return buffer;
}

namespace {

struct SourceLine {
    std::string content;
    std::string eol; // "\n", "\r\n" or "" at EOF
};

std::vector<SourceLine> split_with_eol(const std::string& text) {
    std::vector<SourceLine> out;
    std::string cur;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            std::string eol = "\n";
            if (!cur.empty() && cur.back() == '\r') {
                cur.pop_back();
                eol = "\r\n";
            }
            out.push_back({std::move(cur), std::move(eol)});
            cur.clear();
        } else {
            cur += text[i];
        }
    }
    if (!cur.empty()) out.push_back({std::move(cur), ""});
    return out;
}

std::vector<std::string> chunk_lines(const std::string& chunk) {
    std::vector<std::string> out;
    std::string cur;
    const std::string normalized = normalize_chunk(chunk);
    for (char c : normalized) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string apply_fallback_whitespace(const PatchSet& patch,
                                      const std::string& source) {
    std::string buffer = source;
    for (size_t idx = 0; idx < patch.edits.size(); ++idx) {
        auto lines = split_with_eol(buffer);
        const auto search = chunk_lines(patch.edits[idx].search);
        const auto replace_text = normalize_chunk(patch.edits[idx].replace);

        std::vector<size_t> hits;
        if (search.size() <= lines.size()) {
            for (size_t i = 0; i + search.size() <= lines.size(); ++i) {
                bool ok = true;
                for (size_t j = 0; j < search.size(); ++j) {
                    if (rtrim(lines[i + j].content) != rtrim(search[j])) {
                        ok = false;
                        break;
                    }
                }
                if (ok) hits.push_back(i);
            }
        }
        if (hits.empty())
            throw SearchNotFound("edit " + std::to_string(idx + 1) +
                                 ": search chunk not found (whitespace-insensitive)");
        if (hits.size() >= 2)
            throw AmbiguousMatch("edit " + std::to_string(idx + 1) +
                                 ": search chunk occurs " +
                                 std::to_string(hits.size()) + " times");

        const size_t start = hits[0];
        const size_t count = search.size();
        // replacement inherits the line endings of the region it replaces
        const std::string body_eol = lines[start].eol.empty() ? "\n" : lines[start].eol;
        const std::string tail_eol = lines[start + count - 1].eol;
        std::string region;
        if (!replace_text.empty()) {
            const auto rlines = chunk_lines(replace_text);
            for (size_t j = 0; j < rlines.size(); ++j)
                region += rlines[j] + (j + 1 == rlines.size() ? tail_eol : body_eol);
        }
        std::string rebuilt;
        for (size_t i = 0; i < lines.size(); ++i) {
            if (i == start) rebuilt += region;
            if (i >= start && i < start + count) continue;
            rebuilt += lines[i].content + lines[i].eol;
        }
        buffer = std::move(rebuilt);
    }
    return buffer;
}

} // namespace solfix
