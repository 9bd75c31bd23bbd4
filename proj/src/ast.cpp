#include "solfix/ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace solfix {

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Pragma: return "Pragma";
        case NodeKind::ContractDef: return "ContractDef";
        case NodeKind::StateVarDecl: return "StateVarDecl";
        case NodeKind::StructDef: return "StructDef";
        case NodeKind::FunctionDef: return "FunctionDef";
        case NodeKind::ModifierDef: return "ModifierDef";
        case NodeKind::EventDef: return "EventDef";
        case NodeKind::Statement: return "Statement";
        case NodeKind::Expression: return "Expression";
        case NodeKind::Identifier: return "Identifier";
    }
    return "Statement";
}

bool is_reserved_word(const std::string& word) {
    static const std::set<std::string> kReserved = {
        "pragma", "solidity", "contract", "library", "interface", "abstract",
        "struct", "enum", "function", "modifier", "event", "constructor",
        "fallback", "receive", "mapping", "using", "import", "is", "new",
        "delete", "return", "returns", "if", "else", "for", "while", "do",
        "break", "continue", "try", "catch", "throw", "emit", "revert",
        "require", "assert", "public", "private", "internal", "external",
        "pure", "view", "payable", "constant", "immutable", "virtual",
        "override", "memory", "storage", "calldata", "indexed", "anonymous",
        "unchecked", "assembly", "true", "false", "wei", "gwei", "ether",
        "seconds", "minutes", "hours", "days", "weeks", "address", "bool",
        "string", "bytes", "byte", "int", "uint", "fixed", "ufixed", "var",
    };
    if (kReserved.count(word)) return true;
    // uint256, bytes32, int8, ...
    for (const char* p : {"uint", "int", "bytes", "fixed", "ufixed"}) {
        const std::string prefix = p;
        if (word.size() > prefix.size() && word.rfind(prefix, 0) == 0 &&
            std::all_of(word.begin() + static_cast<long>(prefix.size()), word.end(),
                        [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return true;
    }
    return false;
}

namespace {

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Comments and string literals replaced by spaces, newlines preserved.
std::string mask_source(const std::string& src) {
    std::string out = src;
    size_t i = 0;
    const size_t n = src.size();
    while (i < n) {
        if (src[i] == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') out[i++] = ' ';
        } else if (src[i] == '/' && i + 1 < n && src[i + 1] == '*') {
            out[i] = out[i + 1] = ' ';
            i += 2;
            while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) {
                if (src[i] != '\n') out[i] = ' ';
                ++i;
            }
            if (i + 1 < n) { out[i] = out[i + 1] = ' '; i += 2; }
        } else if (src[i] == '"' || src[i] == '\'') {
            const char quote = src[i];
            out[i++] = ' ';
            while (i < n && src[i] != quote && src[i] != '\n') {
                if (src[i] == '\\' && i + 1 < n) out[i++] = ' ';
                out[i++] = ' ';
            }
            if (i < n && src[i] == quote) out[i++] = ' ';
        } else {
            ++i;
        }
    }
    return out;
}

class StructureParser {
public:
    explicit StructureParser(const std::string& source)
        : src_(source), masked_(mask_source(source)) {
        size_t pos = 0;
        line_starts_.push_back(0);
        while ((pos = source.find('\n', pos)) != std::string::npos)
            line_starts_.push_back(++pos);
    }

    std::unique_ptr<AstNode> parse() {
        check_balance();
        auto root = std::make_unique<AstNode>();
        root->kind = NodeKind::Statement; // synthetic SourceUnit wrapper
        root->span = span_of(0, src_.empty() ? 0 : src_.size() - 1);

        size_t i = 0;
        while (true) {
            i = skip_ws(i);
            if (i >= masked_.size()) break;
            root->children.push_back(parse_top_level(i));
        }
        if (root->children.empty())
            throw ParseFailure("no recognizable Solidity structure");
        finish(*root);
        return root;
    }

private:
    void check_balance() {
        long depth = 0;
        for (char c : masked_) {
            if (c == '{') ++depth;
            if (c == '}') --depth;
            if (depth < 0) throw ParseFailure("unbalanced braces");
        }
        if (depth != 0) throw ParseFailure("unbalanced braces");
    }

    size_t skip_ws(size_t i) const {
        while (i < masked_.size() &&
               std::isspace(static_cast<unsigned char>(masked_[i])))
            ++i;
        return i;
    }

    std::string word_at(size_t i) const {
        if (i >= masked_.size() || !is_ident_start(masked_[i])) return {};
        size_t j = i;
        while (j < masked_.size() && is_ident_char(masked_[j])) ++j;
        return masked_.substr(i, j - i);
    }

    size_t find_matching_brace(size_t open) const {
        long depth = 0;
        for (size_t i = open; i < masked_.size(); ++i) {
            if (masked_[i] == '{') ++depth;
            else if (masked_[i] == '}' && --depth == 0) return i;
        }
        throw ParseFailure("unbalanced braces");
    }

    // End of a simple statement or definition header: the ';' or the
    // matching '}' of the first block, whichever comes first.
    size_t statement_end(size_t i, size_t limit) const {
        long paren = 0;
        for (size_t j = i; j < limit; ++j) {
            const char c = masked_[j];
            if (c == '(' || c == '[') ++paren;
            else if (c == ')' || c == ']') --paren;
            else if (c == ';' && paren == 0) return j;
            else if (c == '{' && paren == 0) {
                size_t close = find_matching_brace(j);
                // chained else / catch / do-while tail
                size_t k = skip_ws(close + 1);
                std::string w = word_at(k);
                if (w == "else" || w == "catch")
                    return statement_end(k, limit);
                if (w == "while") {
                    size_t semi = masked_.find(';', k);
                    if (semi != std::string::npos && semi < limit) return semi;
                }
                return close;
            }
        }
        return limit > i ? limit - 1 : i;
    }

    Span span_of(size_t start, size_t end) const {
        Span s;
        locate(start, s.start_line, s.start_col);
        locate(end, s.end_line, s.end_col);
        return s;
    }

    void locate(size_t offset, int& line, int& col) const {
        auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
        size_t idx = static_cast<size_t>(it - line_starts_.begin()) - 1;
        line = static_cast<int>(idx) + 1;
        col = static_cast<int>(offset - line_starts_[idx]) + 1;
    }

    void collect_identifiers(AstNode& node, size_t start, size_t end) const {
        size_t i = start;
        while (i <= end && i < masked_.size()) {
            if (is_ident_start(masked_[i])) {
                size_t j = i;
                std::string chain;
                while (j <= end && j < masked_.size() && is_ident_char(masked_[j])) ++j;
                std::string word = masked_.substr(i, j - i);
                chain = word;
                if (!is_reserved_word(word)) node.identifiers.insert(word);
                // dotted member chains kept as a unit as well
                while (j <= end && j + 1 < masked_.size() && masked_[j] == '.' &&
                       is_ident_start(masked_[j + 1])) {
                    size_t k = j + 1;
                    while (k <= end && k < masked_.size() && is_ident_char(masked_[k])) ++k;
                    std::string part = masked_.substr(j + 1, k - j - 1);
                    if (!is_reserved_word(part)) node.identifiers.insert(part);
                    chain += "." + part;
                    j = k;
                }
                if (chain != word) node.identifiers.insert(chain);
                i = j;
            } else {
                ++i;
            }
        }
    }

    std::unique_ptr<AstNode> make_node(NodeKind kind, size_t start, size_t end) const {
        auto node = std::make_unique<AstNode>();
        node->kind = kind;
        node->span = span_of(start, end);
        collect_identifiers(*node, start, end);
        return node;
    }

    std::unique_ptr<AstNode> parse_top_level(size_t& i) {
        const std::string w = word_at(i);
        if (w == "pragma") {
            size_t semi = masked_.find(';', i);
            if (semi == std::string::npos) semi = masked_.size() - 1;
            auto node = make_node(NodeKind::Pragma, i, semi);
            i = semi + 1;
            return node;
        }
        if (w == "contract" || w == "library" || w == "interface" || w == "abstract") {
            size_t open = masked_.find('{', i);
            if (open == std::string::npos)
                throw ParseFailure("contract definition without body");
            size_t close = find_matching_brace(open);
            auto node = make_node(NodeKind::ContractDef, i, close);
            parse_members(*node, open + 1, close);
            i = close + 1;
            return node;
        }
        // import / using / free function / stray statement
        size_t end = statement_end(i, masked_.size());
        auto node = (w == "function")
                        ? make_node(NodeKind::FunctionDef, i, end)
                        : make_node(NodeKind::Statement, i, end);
        if (w == "function") attach_body_statements(*node, i, end);
        i = end + 1;
        return node;
    }

    void parse_members(AstNode& contract, size_t begin, size_t end) {
        size_t i = begin;
        while (true) {
            i = skip_ws(i);
            if (i >= end) break;
            const std::string w = word_at(i);
            if (w == "struct") {
                size_t open = masked_.find('{', i);
                if (open == std::string::npos || open > end)
                    throw ParseFailure("struct without body");
                size_t close = find_matching_brace(open);
                auto node = make_node(NodeKind::StructDef, i, close);
                parse_struct_fields(*node, open + 1, close);
                contract.children.push_back(std::move(node));
                i = close + 1;
            } else if (w == "function" || w == "constructor" || w == "fallback" ||
                       w == "receive" || w == "modifier") {
                size_t stmt_end = statement_end(i, end);
                auto kind = (w == "modifier") ? NodeKind::ModifierDef
                                              : NodeKind::FunctionDef;
                auto node = make_node(kind, i, stmt_end);
                attach_body_statements(*node, i, stmt_end);
                contract.children.push_back(std::move(node));
                i = stmt_end + 1;
            } else if (w == "event") {
                size_t semi = masked_.find(';', i);
                if (semi == std::string::npos || semi > end) semi = end - 1;
                contract.children.push_back(make_node(NodeKind::EventDef, i, semi));
                i = semi + 1;
            } else if (w == "using" || w == "enum") {
                size_t stmt_end = statement_end(i, end);
                contract.children.push_back(
                    make_node(NodeKind::Statement, i, stmt_end));
                i = stmt_end + 1;
            } else {
                // state variable (possibly with initializer)
                size_t semi = statement_end(i, end);
                contract.children.push_back(
                    make_node(NodeKind::StateVarDecl, i, semi));
                i = semi + 1;
            }
        }
    }

    void parse_struct_fields(AstNode& strct, size_t begin, size_t end) {
        size_t i = begin;
        while (true) {
            i = skip_ws(i);
            if (i >= end) break;
            size_t semi = masked_.find(';', i);
            if (semi == std::string::npos || semi >= end) break;
            strct.children.push_back(make_node(NodeKind::StateVarDecl, i, semi));
            i = semi + 1;
        }
    }

    // Statements inside the outermost '{...}' of a function/modifier header.
    void attach_body_statements(AstNode& node, size_t start, size_t end) {
        size_t open = std::string::npos;
        long paren = 0;
        for (size_t j = start; j < end; ++j) {
            if (masked_[j] == '(') ++paren;
            else if (masked_[j] == ')') --paren;
            else if (masked_[j] == '{' && paren == 0) { open = j; break; }
        }
        if (open == std::string::npos) return;
        size_t close = find_matching_brace(open);
        parse_statements(node, open + 1, close);
    }

    void parse_statements(AstNode& parent, size_t begin, size_t end) {
        size_t i = begin;
        while (true) {
            i = skip_ws(i);
            if (i >= end) break;
            size_t stmt_end = statement_end(i, end);
            auto node = make_node(NodeKind::Statement, i, stmt_end);
            // recurse into each block owned by this statement
            size_t j = i;
            while (j < stmt_end) {
                if (masked_[j] == '{') {
                    size_t close = find_matching_brace(j);
                    parse_statements(*node, j + 1, close);
                    j = close + 1;
                } else {
                    ++j;
                }
            }
            parent.children.push_back(std::move(node));
            i = stmt_end + 1;
        }
    }

    // Children sorted by start position, recursively.
    void finish(AstNode& node) {
        std::sort(node.children.begin(), node.children.end(),
                  [](const auto& a, const auto& b) {
                      return std::tie(a->span.start_line, a->span.start_col) <
                             std::tie(b->span.start_line, b->span.start_col);
                  });
        for (auto& c : node.children) finish(*c);
    }

    const std::string& src_;
    std::string masked_;
    std::vector<size_t> line_starts_;
};

} // namespace

std::unique_ptr<AstNode> parse_structure(const std::string& source) {
    if (source.empty()) throw ParseFailure("empty source");
    return StructureParser(source).parse();
}

} // namespace solfix
