#pragma once

// Shared helpers for the test binaries: fixture paths, temp dirs, the
// simulated-compiler table and independent reference oracles.

#include <array>
#include <cmath>
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/patch.hpp"

namespace testsup {

inline std::filesystem::path fixtures() { return SOLFIX_FIXTURES_DIR; }
inline std::string solcsim_path() { return SOLFIX_SOLCSIM_PATH; }
inline std::string cli_path() { return SOLFIX_CLI_PATH; }
inline std::filesystem::path data_dir() { return SOLFIX_DATA_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() /
               ("solfix-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

// Compiler table routing every supported family to the simulated compiler.
inline solfix::CompilerTable sim_table() {
    solfix::CompilerTable t;
    for (const char* v : {"0.4", "0.5", "0.6", "0.7", "0.8"})
        t.add(v, solcsim_path() + " --lang-version " + v);
    return t;
}

inline std::filesystem::path write_sim_table(const std::filesystem::path& dir) {
    std::string json = "{";
    bool first = true;
    for (const char* v : {"0.4", "0.5", "0.6", "0.7", "0.8"}) {
        if (!first) json += ",";
        first = false;
        json += "\"" + std::string(v) + "\": \"" + solcsim_path() +
                " --lang-version " + v + "\"";
    }
    json += "}";
    const auto path = dir / "compiler_table.json";
    write_file(path, json);
    return path;
}

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout + stderr merged
};

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

inline CliResult run_cli(const std::vector<std::string>& args) {
    std::string cmd = shell_quote(cli_path());
    for (const auto& a : args) cmd += " " + shell_quote(a);
    cmd += " 2>&1";
    CliResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return res;
    std::array<char, 4096> buf{};
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
        res.output.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

// --- independent oracles -----------------------------------------------

// Brute-force count of whole-line occurrences of `needle` in `haystack`.
inline int occurrence_oracle(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return 0;
    int count = 0;
    for (size_t pos = 0; pos + needle.size() <= haystack.size(); ++pos) {
        if (haystack.compare(pos, needle.size(), needle) != 0) continue;
        const bool starts = pos == 0 || haystack[pos - 1] == '\n';
        const size_t end = pos + needle.size();
        const bool ends = end == haystack.size() || haystack[end] == '\n';
        if (starts && ends) ++count;
    }
    return count;
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
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

inline std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

// Reference line-diff to PatchSet converter: LCS over lines, replaced runs
// become edits, with context lines prepended until the search chunk is
// unique in the source.
inline solfix::PatchSet diff_to_patch(const std::string& source,
                                      const std::string& target) {
    const auto a = split_lines(source);
    const auto b = split_lines(target);
    const size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = n; i-- > 0;)
        for (size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);

    struct Hunk {
        size_t a_begin, a_end; // [begin, end) in source lines
        std::vector<std::string> b_lines;
    };
    std::vector<Hunk> hunks;
    size_t i = 0, j = 0;
    while (i < n || j < m) {
        if (i < n && j < m && a[i] == b[j]) {
            ++i;
            ++j;
            continue;
        }
        Hunk h{i, i, {}};
        while (i < n || j < m) {
            if (i < n && j < m && a[i] == b[j]) break;
            if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
                h.b_lines.push_back(b[j]);
                ++j;
            } else {
                ++i;
            }
        }
        h.a_end = i;
        hunks.push_back(std::move(h));
    }

    solfix::PatchSet patch;
    for (const auto& h : hunks) {
        size_t begin = h.a_begin, end = h.a_end;
        std::vector<std::string> b_lines = h.b_lines;
        // grow context symmetrically until the search chunk is unique
        while (true) {
            std::vector<std::string> search(a.begin() + begin, a.begin() + end);
            if (!search.empty() &&
                occurrence_oracle(source, join_lines(search)) == 1)
                break;
            bool grew = false;
            if (begin > 0) {
                --begin;
                b_lines.insert(b_lines.begin(), a[begin]);
                grew = true;
            }
            if (end < n) {
                b_lines.push_back(a[end]);
                ++end;
                grew = true;
            }
            if (!grew) break; // whole file already
        }
        solfix::Edit e;
        e.search = join_lines({a.begin() + begin, a.begin() + end});
        e.replace = join_lines(b_lines);
        if (e.search != e.replace) patch.edits.push_back(std::move(e));
    }
    return patch;
}

// Reference BLEU-4: textbook formula, no shared code with the library.
inline std::vector<std::string> bleu_tokens_oracle(const std::string& text) {
    std::vector<std::string> toks;
    std::string cur;
    for (char raw : text) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            if (!cur.empty()) {
                toks.push_back(cur);
                cur.clear();
            }
            if (!std::isspace(c)) toks.push_back(std::string(1, raw));
        }
    }
    if (!cur.empty()) toks.push_back(cur);
    return toks;
}

inline double bleu_oracle(const std::string& cand_text, const std::string& ref_text) {
    const auto cand = bleu_tokens_oracle(cand_text);
    const auto ref = bleu_tokens_oracle(ref_text);
    if (cand.empty()) return 0.0;
    double logsum = 0.0;
    for (size_t order = 1; order <= 4; ++order) {
        std::map<std::string, int> cc, rc;
        auto key = [&](const std::vector<std::string>& t, size_t at) {
            std::string k;
            for (size_t x = 0; x < order; ++x) k += t[at + x] + "\x1f";
            return k;
        };
        for (size_t at = 0; at + order <= cand.size(); ++at) ++cc[key(cand, at)];
        for (size_t at = 0; at + order <= ref.size(); ++at) ++rc[key(ref, at)];
        long total = 0, match = 0;
        for (const auto& [k, v] : cc) {
            total += v;
            auto it = rc.find(k);
            if (it != rc.end()) match += std::min(v, it->second);
        }
        const double p = (total == 0 || match == 0)
                             ? 1e-9
                             : static_cast<double>(match) / total;
        logsum += std::log(p) / 4.0;
    }
    double bp = 1.0;
    if (cand.size() < ref.size())
        bp = std::exp(1.0 - static_cast<double>(ref.size()) / cand.size());
    return bp * std::exp(logsum);
}

// Reference Levenshtein: full-matrix DP, no row reuse tricks.
inline size_t levenshtein_oracle(const std::string& a, const std::string& b) {
    std::vector<std::vector<size_t>> d(a.size() + 1,
                                       std::vector<size_t>(b.size() + 1, 0));
    for (size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (size_t i = 1; i <= a.size(); ++i)
        for (size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    return d[a.size()][b.size()];
}

} // namespace testsup
