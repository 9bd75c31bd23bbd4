// Simulated Solidity compiler used through the compiler table. It checks
// pragma compatibility and a small set of version-migration rules and
// reports errors in the solc text layout.

#include <cctype>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Version {
    int major = 0;
    int minor = 0;
    int patch = 0;
    bool has_patch = false;
};

std::optional<Version> parse_version(const std::string& text) {
    Version v;
    int parts[3] = {0, 0, 0};
    int idx = 0;
    size_t i = 0;
    while (idx < 3 && i < text.size() && std::isdigit((unsigned char)text[i])) {
        int val = 0;
        while (i < text.size() && std::isdigit((unsigned char)text[i]))
            val = val * 10 + (text[i++] - '0');
        parts[idx++] = val;
        if (i < text.size() && text[i] == '.')
            ++i;
        else
            break;
    }
    if (idx < 2) return std::nullopt;
    v.major = parts[0];
    v.minor = parts[1];
    v.patch = parts[2];
    v.has_patch = idx == 3;
    return v;
}

int cmp(const Version& a, const Version& b) {
    if (a.major != b.major) return a.major < b.major ? -1 : 1;
    if (a.minor != b.minor) return a.minor < b.minor ? -1 : 1;
    if (a.patch != b.patch) return a.patch < b.patch ? -1 : 1;
    return 0;
}

// Constraint tokens: ^a.b.c, >=v, <=v, <v, >v, =v, bare a.b(.c).
// A lang version with no patch acts as the newest patch of its minor.
bool satisfies(const std::string& constraint, Version lang) {
    if (!lang.has_patch) lang.patch = 99;
    std::istringstream is(constraint);
    std::string tok;
    while (is >> tok) {
        std::string op;
        size_t p = 0;
        while (p < tok.size() && !std::isdigit((unsigned char)tok[p]))
            op += tok[p++];
        auto v = parse_version(tok.substr(p));
        if (!v) continue;
        if (op == "^") {
            if (lang.major != v->major || lang.minor != v->minor ||
                cmp(lang, *v) < 0)
                return false;
        } else if (op == ">=") {
            if (cmp(lang, *v) < 0) return false;
        } else if (op == "<=") {
            if (cmp(lang, *v) > 0) return false;
        } else if (op == "<") {
            if (cmp(lang, *v) >= 0) return false;
        } else if (op == ">") {
            if (cmp(lang, *v) <= 0) return false;
        } else {
            // bare or "=": pin the major.minor pair
            if (lang.major != v->major || lang.minor != v->minor) return false;
        }
    }
    return true;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

void emit(const std::string& header, const std::string& file, size_t line,
          size_t col, const std::string& excerpt, size_t caret_len) {
    std::cout << header << "\n";
    std::cout << "  --> " << file << ":" << line << ":" << col << ":\n";
    std::cout << "   |\n";
    std::cout << line << " | " << excerpt << "\n";
    std::cout << "   | ";
    for (size_t k = 1; k < col; ++k) std::cout << ' ';
    for (size_t k = 0; k < caret_len; ++k) std::cout << '^';
    std::cout << "\n\n";
}

bool is_ident_char(char c) {
    return std::isalnum((unsigned char)c) || c == '_';
}

std::string lstrip_comment(const std::string& line) {
    size_t pos = line.find("//");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

} // namespace

int main(int argc, char** argv) {
    std::string lang_version = "0.8.0";
    std::string file;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--lang-version" && i + 1 < argc) {
            lang_version = argv[++i];
        } else if (arg == "--version") {
            std::cout << "solcsim, simulated compiler, language version "
                      << lang_version << "\n";
            return 0;
        } else if (!arg.empty() && arg[0] != '-') {
            file = arg;
        }
    }
    if (file.empty()) {
        std::cerr << "usage: solcsim [--lang-version X.Y.Z] file.sol\n";
        return 64;
    }

    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cout << "IOError: cannot open source file " << file << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string source = buf.str();
    const auto lines = split_lines(source);

    auto lang = parse_version(lang_version);
    if (!lang) {
        std::cerr << "solcsim: bad --lang-version " << lang_version << "\n";
        return 64;
    }
    const bool modern = lang->major > 0 || lang->minor >= 5;

    int errors = 0;

    // Pragma check first; an incompatible pragma masks everything else,
    // matching how solc stops at the parser stage.
    for (size_t i = 0; i < lines.size(); ++i) {
        const std::string code = lstrip_comment(lines[i]);
        size_t pos = code.find("pragma solidity");
        if (pos == std::string::npos) continue;
        size_t start = pos + std::string("pragma solidity").size();
        size_t end = code.find(';', start);
        const std::string constraint =
            code.substr(start, end == std::string::npos ? std::string::npos
                                                        : end - start);
        if (!satisfies(constraint, *lang)) {
            emit("ParserError: Source file requires different compiler version "
                 "(current compiler is " + lang_version + ")",
                 file, i + 1, pos + 1, lines[i],
                 std::min(code.size() - pos, code.size()));
            return 1;
        }
    }

    if (modern) {
        // transfer/send on a plain address needs an address payable.
        for (size_t i = 0; i < lines.size(); ++i) {
            const std::string code = lstrip_comment(lines[i]);
            for (const char* member : {".transfer(", ".send("}) {
                size_t pos = code.find(std::string("msg.sender") + member);
                if (pos == std::string::npos) continue;
                const size_t caret_len =
                    std::string("msg.sender").size() + std::string(member).size() - 1;
                emit("TypeError: \"send\" and \"transfer\" are only available "
                     "for objects of type \"address payable\", not \"address\".",
                     file, i + 1, pos + 1, lines[i], caret_len);
                ++errors;
            }
        }

        // identifiers removed from the language
        auto find_word = [](const std::string& code, const std::string& word) {
            size_t pos = 0;
            while ((pos = code.find(word, pos)) != std::string::npos) {
                const bool left = pos == 0 || !is_ident_char(code[pos - 1]);
                const size_t end = pos + word.size();
                const bool right = end >= code.size() || !is_ident_char(code[end]);
                if (left && right) return pos;
                pos = end;
            }
            return std::string::npos;
        };
        if (lang->major > 0 || lang->minor >= 7) {
            for (size_t i = 0; i < lines.size(); ++i) {
                const std::string code = lstrip_comment(lines[i]);
                size_t pos = find_word(code, "now");
                if (pos == std::string::npos) continue;
                emit("DeclarationError: Undeclared identifier. \"now\" has "
                     "been deprecated. Use \"block.timestamp\" instead.",
                     file, i + 1, pos + 1, lines[i], 3);
                ++errors;
            }
        }
        for (size_t i = 0; i < lines.size(); ++i) {
            const std::string code = lstrip_comment(lines[i]);
            size_t pos = find_word(code, "throw");
            if (pos == std::string::npos) continue;
            emit("SyntaxError: \"throw\" is deprecated in favour of "
                 "\"revert()\", \"require()\" and \"assert()\".",
                 file, i + 1, pos + 1, lines[i], 5);
            ++errors;
        }

        // assigning a plain address into an address payable variable
        std::vector<std::string> payable_names;
        for (const auto& raw : lines) {
            const std::string code = lstrip_comment(raw);
            size_t pos = code.find("address payable ");
            if (pos == std::string::npos) continue;
            size_t n = pos + std::string("address payable ").size();
            std::string name;
            while (n < code.size() && is_ident_char(code[n])) name += code[n++];
            if (!name.empty()) payable_names.push_back(name);
        }
        for (size_t i = 0; i < lines.size(); ++i) {
            const std::string code = lstrip_comment(lines[i]);
            for (const auto& name : payable_names) {
                size_t pos = code.find(name + " = msg.sender");
                if (pos == std::string::npos)
                    pos = code.find(name + " = address(");
                if (pos == std::string::npos) continue;
                if (pos > 0 && is_ident_char(code[pos - 1])) continue;
                if (code.find("payable(", pos) != std::string::npos) continue;
                emit("TypeError: Type address is not implicitly convertible "
                     "to expected type address payable.",
                     file, i + 1, pos + 1, lines[i], name.size());
                ++errors;
            }
        }
    }

    if (errors > 0) return 1;
    std::cout << "Compiler run successful. No output requested.\n";
    return 0;
}
