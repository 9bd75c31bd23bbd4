#include "solfix/slicer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace solfix {

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_identifier_shaped(const std::string& s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    bool prev_dot = false;
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i] == '.') {
            if (prev_dot) return false;
            prev_dot = true;
        } else if (!is_ident_char(s[i])) {
            return false;
        } else {
            prev_dot = false;
        }
    }
    return !prev_dot;
}

void push_unique(std::vector<std::string>& out, const std::string& kw) {
    if (kw.empty() || is_reserved_word(kw)) return;
    if (std::find(out.begin(), out.end(), kw) == out.end()) out.push_back(kw);
}

// Identifier chain (dots allowed) covering position `pos`.
std::string chain_at(const std::string& text, size_t pos) {
    if (pos >= text.size() || !(is_ident_char(text[pos]) || text[pos] == '.'))
        return {};
    size_t begin = pos;
    while (begin > 0 && (is_ident_char(text[begin - 1]) || text[begin - 1] == '.'))
        --begin;
    size_t end = pos;
    while (end < text.size() && (is_ident_char(text[end]) || text[end] == '.'))
        ++end;
    std::string chain = text.substr(begin, end - begin);
    while (!chain.empty() && chain.front() == '.') chain.erase(chain.begin());
    while (!chain.empty() && chain.back() == '.') chain.pop_back();
    return is_identifier_shaped(chain) ? chain : std::string{};
}

std::vector<std::string> ident_tokens(const std::string& text) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < text.size()) {
        if (is_ident_start(text[i])) {
            size_t j = i;
            while (j < text.size() &&
                   (is_ident_char(text[j]) ||
                    (text[j] == '.' && j + 1 < text.size() && is_ident_start(text[j + 1]))))
                ++j;
            out.push_back(text.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<std::string> split_lines_keep(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);
    return lines;
}

} // namespace

std::vector<std::string> extract_keywords(const Diagnostic& diag) {
    std::vector<std::string> out;

    // 1. identifiers quoted in the message
    size_t pos = 0;
    while (true) {
        size_t open = diag.message.find('"', pos);
        if (open == std::string::npos) break;
        size_t close = diag.message.find('"', open + 1);
        if (close == std::string::npos) break;
        std::string quoted = diag.message.substr(open + 1, close - open - 1);
        if (is_identifier_shaped(quoted)) push_unique(out, quoted);
        pos = close + 1;
    }

    // 2. token under the error column of the flagged line
    if (diag.location && !diag.source_excerpt.empty()) {
        size_t col = static_cast<size_t>(diag.location->column) - 1;
        push_unique(out, chain_at(diag.source_excerpt, col));
    }

    // 3. remaining identifier-shaped message tokens; prose words (all
    //    lowercase alphabetic) do not count as identifiers
    std::string unquoted;
    bool in_quote = false;
    for (char c : diag.message) {
        if (c == '"') in_quote = !in_quote;
        else if (!in_quote) unquoted += c;
    }
    auto code_looking = [](const std::string& tok) {
        for (char c : tok)
            if (!std::islower(static_cast<unsigned char>(c))) return true;
        return false;
    };
    for (const auto& tok : ident_tokens(unquoted))
        if (code_looking(tok)) push_unique(out, tok);

    return out;
}

CodeSlice whole_file_slice(const std::string& source, const Diagnostic& diag) {
    CodeSlice s;
    const auto lines = split_lines_keep(source);
    Snippet snip;
    snip.span.start_line = 1;
    snip.span.start_col = 1;
    snip.span.end_line = static_cast<int>(lines.size());
    snip.span.end_col = std::max<int>(1, static_cast<int>(lines.back().size()));
    snip.text = source;
    s.snippets.push_back(std::move(snip));
    s.error_keywords = extract_keywords(diag);
    s.covers_error_line = true;
    return s;
}

namespace {

struct Selection {
    // line range -> matched a keyword
    std::map<std::pair<int, int>, bool> ranges;
    void add(const Span& span, bool keyword_matched) {
        auto key = std::make_pair(span.start_line, span.end_line);
        auto [it, inserted] = ranges.emplace(key, keyword_matched);
        if (!inserted) it->second = it->second || keyword_matched;
    }
};

void collect_leaves_at_line(const AstNode& node, int line,
                            std::vector<const AstNode*>& out) {
    bool child_hit = false;
    for (const auto& c : node.children) {
        if (c->span.contains_line(line)) {
            collect_leaves_at_line(*c, line, out);
            child_hit = true;
        }
    }
    if (!child_hit && node.span.contains_line(line)) out.push_back(&node);
}

const AstNode* parent_of(const AstNode& root, const AstNode* target) {
    for (const auto& c : root.children) {
        if (c.get() == target) return &root;
        if (const AstNode* p = parent_of(*c, target)) return p;
    }
    return nullptr;
}

std::set<std::string> expand_parts(const std::vector<std::string>& keywords) {
    std::set<std::string> parts;
    for (const auto& kw : keywords) {
        parts.insert(kw);
        std::string cur;
        for (char c : kw) {
            if (c == '.') {
                if (!cur.empty() && !is_reserved_word(cur)) parts.insert(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty() && !is_reserved_word(cur)) parts.insert(cur);
    }
    return parts;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
    for (const auto& x : a)
        if (b.count(x)) return true;
    return false;
}

// True when `text` declares `name`: the preceding token is type-shaped and
// the name is followed by '=', ';' or ','.
bool declares(const std::string& text, const std::string& name) {
    size_t pos = 0;
    while ((pos = text.find(name, pos)) != std::string::npos) {
        const size_t end = pos + name.size();
        const bool boundary_before = pos == 0 || !is_ident_char(text[pos - 1]);
        const bool boundary_after = end >= text.size() || !is_ident_char(text[end]);
        if (!boundary_before || !boundary_after) {
            pos = end;
            continue;
        }
        // next non-space must be '=', ';' or ','
        size_t j = end;
        while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        const bool tail_ok = j >= text.size() || text[j] == '=' || text[j] == ';' ||
                             text[j] == ',' || text[j] == ')';
        // previous token must be type-shaped (a type name, possibly
        // "address payable" or "uint[]"), not a statement keyword
        size_t k = pos;
        while (k > 0 && std::isspace(static_cast<unsigned char>(text[k - 1]))) --k;
        bool head_ok = false;
        if (k > 0 && (text[k - 1] == ']' || text[k - 1] == ')')) {
            head_ok = true;
        } else if (k > 0 && is_ident_char(text[k - 1])) {
            size_t tok_end = k;
            size_t tok_begin = k;
            while (tok_begin > 0 && is_ident_char(text[tok_begin - 1])) --tok_begin;
            const std::string prev = text.substr(tok_begin, tok_end - tok_begin);
            static const std::set<std::string> kTypeish = {
                "address", "bool", "string", "bytes", "byte", "mapping", "var",
                "payable", "memory", "storage", "calldata", "constant",
                "immutable", "public", "private", "internal", "indexed",
            };
            head_ok = !is_reserved_word(prev) || kTypeish.count(prev) ||
                      prev.rfind("uint", 0) == 0 || prev.rfind("int", 0) == 0 ||
                      prev.rfind("bytes", 0) == 0 || prev.rfind("fixed", 0) == 0;
        }
        if (tail_ok && head_ok) return true;
        pos = end;
    }
    return false;
}

void collect_declaration_nodes(const AstNode& node,
                               const std::set<std::string>& names,
                               Selection& sel, const std::string& source_text,
                               const std::vector<std::string>& lines) {
    for (const auto& c : node.children) {
        if (c->kind == NodeKind::StateVarDecl && intersects(c->identifiers, names)) {
            // only count it when one of the shared names is actually declared
            std::string text;
            for (int l = c->span.start_line; l <= c->span.end_line &&
                                             l <= static_cast<int>(lines.size());
                 ++l)
                text += lines[static_cast<size_t>(l - 1)] + "\n";
            for (const auto& n : names) {
                if (c->identifiers.count(n) && declares(text, n)) {
                    sel.add(c->span, true);
                    break;
                }
            }
        }
        collect_declaration_nodes(*c, names, sel, source_text, lines);
    }
}

} // namespace

CodeSlice slice(const AstNode& root, const std::string& source,
                const Diagnostic& diag, const SliceOptions& opts) {
    const auto keywords = extract_keywords(diag);
    const auto keyword_parts = expand_parts(keywords);
    const auto lines = split_lines_keep(source);
    const int total_lines = static_cast<int>(lines.size());

    Selection sel;
    std::vector<const AstNode*> line_nodes;
    if (diag.location) {
        collect_leaves_at_line(root, diag.location->line, line_nodes);
        // drop container hits (the synthetic root / contract shell)
        line_nodes.erase(std::remove_if(line_nodes.begin(), line_nodes.end(),
                                        [&](const AstNode* n) {
                                            return n == &root ||
                                                   n->kind == NodeKind::ContractDef;
                                        }),
                         line_nodes.end());
        if (line_nodes.empty()) {
            // no structural node: take the bare error line
            if (diag.location->line >= 1 && diag.location->line <= total_lines) {
                Span s;
                s.start_line = s.end_line = diag.location->line;
                s.end_col = std::max<size_t>(1, lines[diag.location->line - 1].size());
                sel.add(s, false);
            }
        }
        for (const AstNode* n : line_nodes)
            sel.add(n->span, intersects(n->identifiers, keyword_parts));
    }

    // identifiers in play: error-line node identifiers plus diagnostic keywords
    std::set<std::string> names = keyword_parts;
    for (const AstNode* n : line_nodes)
        for (const auto& id : n->identifiers) names.insert(id);

    // one-layer expansion: parent statements and identifier-sharing siblings
    for (const AstNode* n : line_nodes) {
        const AstNode* parent = parent_of(root, n);
        if (!parent) continue;
        if (parent->kind == NodeKind::Statement && parent != &root)
            sel.add(parent->span, false);
        for (const auto& sib : parent->children) {
            if (sib.get() == n) continue;
            if (!intersects(sib->identifiers, n->identifiers)) continue;
            std::string text;
            for (int l = sib->span.start_line;
                 l <= sib->span.end_line && l <= total_lines; ++l)
                text += lines[static_cast<size_t>(l - 1)] + "\n";
            for (const auto& id : n->identifiers) {
                if (sib->identifiers.count(id) &&
                    (sib->kind == NodeKind::StateVarDecl || declares(text, id))) {
                    sel.add(sib->span, false);
                    break;
                }
            }
        }
    }

    // declarations anywhere (state variables, struct fields) of shared names
    collect_declaration_nodes(root, names, sel, source, lines);

    if (sel.ranges.empty()) return whole_file_slice(source, diag);

    // pragma always included
    for (const auto& c : root.children)
        if (c->kind == NodeKind::Pragma) sel.add(c->span, false);

    // enforce the size cap: error-line ranges first, then keyword matches,
    // then the rest, all in deterministic order
    struct Ranked {
        int start, end;
        int priority; // lower wins
    };
    std::vector<Ranked> ranked;
    for (const auto& [range, kw] : sel.ranges) {
        int prio = 2;
        if (diag.location && diag.location->line >= range.first &&
            diag.location->line <= range.second)
            prio = 0;
        else if (kw)
            prio = 1;
        ranked.push_back({range.first, range.second, prio});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.priority < b.priority;
    });
    std::vector<std::pair<int, int>> kept;
    int used_lines = 0;
    for (const auto& r : ranked) {
        const int len = r.end - r.start + 1;
        if (r.priority > 0 && used_lines + len > opts.max_lines) continue;
        kept.emplace_back(r.start, r.end);
        used_lines += len;
    }

    // merge into source-ordered, non-overlapping line ranges
    std::sort(kept.begin(), kept.end());
    std::vector<std::pair<int, int>> merged;
    for (const auto& r : kept) {
        if (!merged.empty() && r.first <= merged.back().second + 1)
            merged.back().second = std::max(merged.back().second, r.second);
        else
            merged.push_back(r);
    }

    CodeSlice out;
    out.error_keywords = keywords;
    for (const auto& [start, end] : merged) {
        const int lo = std::clamp(start, 1, total_lines);
        const int hi = std::clamp(end, 1, total_lines);
        Snippet snip;
        snip.span.start_line = lo;
        snip.span.start_col = 1;
        snip.span.end_line = hi;
        snip.span.end_col =
            std::max<size_t>(1, lines[static_cast<size_t>(hi - 1)].size());
        for (int l = lo; l <= hi; ++l) {
            snip.text += lines[static_cast<size_t>(l - 1)];
            if (l < hi) snip.text += "\n";
        }
        out.snippets.push_back(std::move(snip));
        if (diag.location && diag.location->line >= lo && diag.location->line <= hi)
            out.covers_error_line = true;
    }
    if (diag.location && !out.covers_error_line)
        return whole_file_slice(source, diag);
    if (!diag.location && out.snippets.empty())
        return whole_file_slice(source, diag);
    return out;
}

} // namespace solfix
