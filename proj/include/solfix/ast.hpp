#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "solfix/errors.hpp"

namespace solfix {

enum class NodeKind {
    Pragma,
    ContractDef,
    StateVarDecl,
    StructDef,
    FunctionDef,
    ModifierDef,
    EventDef,
    Statement,
    Expression,
    Identifier,
};

std::string to_string(NodeKind k);

// 1-based inclusive source span.
struct Span {
    int start_line = 1;
    int start_col = 1;
    int end_line = 1;
    int end_col = 1;

    bool contains_line(int line) const {
        return line >= start_line && line <= end_line;
    }
};

struct AstNode {
    NodeKind kind = NodeKind::Statement;
    Span span;
    std::vector<std::unique_ptr<AstNode>> children;
    std::set<std::string> identifiers;
};

// True for Solidity keywords and elementary type names; these never count
// as identifiers.
bool is_reserved_word(const std::string& word);

// Structural parse: pragmas, contracts, state variables, structs, functions,
// modifiers, events and statements, each with a source span and the set of
// identifier names it mentions. Expression granularity is best-effort.
// Throws ParseFailure when the input has no recognizable structure; callers
// fall back to whole-file slicing.
std::unique_ptr<AstNode> parse_structure(const std::string& source);

} // namespace solfix
