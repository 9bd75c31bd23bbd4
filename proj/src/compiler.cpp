#include "solfix/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace solfix {

std::string to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::Parser: return "Parser";
        case ErrorCategory::Declaration: return "Declaration";
        case ErrorCategory::Syntax: return "Syntax";
        case ErrorCategory::Type: return "Type";
        case ErrorCategory::JsonError: return "JsonError";
        case ErrorCategory::IoError: return "IoError";
        case ErrorCategory::Other: return "Other";
    }
    return "Other";
}

bool is_compilation_error(ErrorCategory c) {
    return c == ErrorCategory::Parser || c == ErrorCategory::Declaration ||
           c == ErrorCategory::Syntax || c == ErrorCategory::Type;
}

ErrorCategory classify(const std::string& message) {
    auto starts = [&](const char* p) { return message.rfind(p, 0) == 0; };
    if (starts("ParserError")) return ErrorCategory::Parser;
    if (starts("DeclarationError")) return ErrorCategory::Declaration;
    if (starts("SyntaxError")) return ErrorCategory::Syntax;
    if (starts("TypeError")) return ErrorCategory::Type;
    if (starts("JSONError") || starts("JsonError")) return ErrorCategory::JsonError;
    if (starts("IOError") || starts("ImportError")) return ErrorCategory::IoError;
    return ErrorCategory::Other;
}

namespace {

const std::regex kHeaderRe(R"(^([A-Za-z]+(?:Error|Warning)?)\s*:\s?(.*)$)");
const std::regex kGutterRe(R"(^\s*-->\s*([^:]+):(\d+):(\d+):?\s*$)");
const std::regex kSourceLineRe(R"(^\s*(\d+)\s*\|\s?(.*)$)");

bool is_error_header(const std::string& line, std::smatch& m) {
    if (!std::regex_match(line, m, kHeaderRe)) return false;
    const std::string tok = m[1];
    // Header tokens are "SomethingError" or the bare CLI "Error"; a plain
    // "Warning" line also opens a block but we keep it as Other.
    return tok.size() >= 5 &&
           (tok.find("Error") != std::string::npos || tok == "Warning");
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

} // namespace

std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output) {
    std::vector<Diagnostic> out;
    const auto lines = split_lines(raw_output);

    size_t i = 0;
    while (i < lines.size()) {
        std::smatch m;
        if (!is_error_header(lines[i], m)) {
            ++i;
            continue;
        }
        Diagnostic d;
        d.message = lines[i];
        size_t j = i + 1;
        for (; j < lines.size(); ++j) {
            std::smatch bm;
            if (is_error_header(lines[j], bm)) break;
            if (std::regex_match(lines[j], bm, kGutterRe)) {
                d.file = bm[1];
                d.location = SourceLocation{std::stoi(bm[2]), std::stoi(bm[3])};
            } else if (std::regex_match(lines[j], bm, kSourceLineRe)) {
                d.source_excerpt = bm[2];
            }
        }
        d.category = classify(d.message);
        out.push_back(std::move(d));
        i = j;
    }
    return out;
}

std::string render_diagnostic(const Diagnostic& d) {
    std::ostringstream os;
    os << d.message << "\n";
    if (d.location) {
        os << "  --> " << d.file << ":" << d.location->line << ":"
           << d.location->column << ":\n";
        os << "   |\n";
        os << d.location->line << " | " << d.source_excerpt << "\n";
        os << "   | ";
        for (int k = 1; k < d.location->column; ++k) os << ' ';
        os << "^\n";
    }
    return os.str();
}

CompilerTable CompilerTable::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open compiler table: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoFailure("bad compiler table " + path.string() + ": " + e.what());
    }
    CompilerTable t;
    for (auto it = j.begin(); it != j.end(); ++it)
        t.add(it.key(), it.value().get<std::string>());
    return t;
}

CompilerTable CompilerTable::resolve(const std::filesystem::path& explicit_path) {
    if (!explicit_path.empty()) return from_file(explicit_path);
    if (const char* env = std::getenv("SOLFIX_COMPILER_TABLE"))
        return from_file(env);
    return {};
}

void CompilerTable::add(const std::string& version_prefix, const std::string& command) {
    entries_[version_prefix] = command;
}

std::vector<std::string> CompilerTable::command_for(const std::string& version) const {
    const std::string* best = nullptr;
    size_t best_len = 0;
    for (const auto& [prefix, cmd] : entries_) {
        if (version.rfind(prefix, 0) == 0 && prefix.size() >= best_len) {
            best = &cmd;
            best_len = prefix.size();
        }
    }
    if (!best)
        throw CompilerNotFound("no compiler configured for version " + version);
    std::vector<std::string> argv;
    std::istringstream is(*best);
    std::string tok;
    while (is >> tok) argv.push_back(tok);
    if (argv.empty())
        throw CompilerNotFound("empty compiler command for version " + version);
    return argv;
}

namespace {

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    bool signalled = false;
    std::string output; // stdout + stderr merged
};

ProcessResult run_process(const std::vector<std::string>& argv, int timeout_seconds) {
    int fds[2];
    if (pipe(fds) != 0) throw ProcessFailure("pipe() failed");

    pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        throw ProcessFailure("fork() failed");
    }
    if (pid == 0) {
        dup2(fds[1], STDOUT_FILENO);
        dup2(fds[1], STDERR_FILENO);
        close(fds[0]);
        close(fds[1]);
        std::vector<char*> cargv;
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }

    close(fds[1]);
    ProcessResult res;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
    char buf[4096];
    bool open = true;
    while (open) {
        struct pollfd pfd{fds[0], POLLIN, 0};
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - std::chrono::steady_clock::now())
                        .count();
        if (left <= 0) {
            res.timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
        int rv = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 250)));
        if (rv > 0) {
            ssize_t n = read(fds[0], buf, sizeof(buf));
            if (n > 0)
                res.output.append(buf, static_cast<size_t>(n));
            else
                open = false;
        }
    }
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        res.signalled = true;
    return res;
}

} // namespace

CompileResult compile(const std::string& source,
                      const std::string& target_version,
                      const std::filesystem::path& workdir,
                      const CompilerTable& table,
                      const CompileOptions& opts) {
    if (source.empty()) throw ProcessFailure("empty source");
    auto argv = table.command_for(target_version);

    std::filesystem::create_directories(workdir);
    const auto src_path = workdir / "contract.sol";
    {
        std::ofstream out(src_path, std::ios::binary);
        if (!out) throw ProcessFailure("cannot write " + src_path.string());
        out << source;
    }
    argv.push_back(src_path.string());

    auto proc = run_process(argv, opts.timeout_seconds);
    if (proc.timed_out)
        throw ProcessFailure("compiler timed out after " +
                             std::to_string(opts.timeout_seconds) + "s");
    if (proc.signalled) throw ProcessFailure("compiler crashed");
    if (proc.exit_code == 127)
        throw CompilerNotFound("compiler binary not executable: " + argv[0]);

    if (!opts.log_path.empty()) {
        std::ofstream log(opts.log_path, std::ios::binary);
        log << proc.output;
    }

    CompileResult result;
    result.compiler_version = target_version;
    result.raw_output = proc.output;
    result.diagnostics = parse_diagnostics(proc.output);
    // A nonzero exit with nothing parseable still surfaces the raw output.
    if (proc.exit_code != 0 && result.diagnostics.empty() && !proc.output.empty()) {
        Diagnostic d;
        d.category = classify(proc.output);
        d.message = proc.output;
        result.diagnostics.push_back(std::move(d));
    }
    bool has_compile_error = false;
    for (const auto& d : result.diagnostics)
        if (is_compilation_error(d.category)) has_compile_error = true;
    result.success = !has_compile_error;
    return result;
}

} // namespace solfix
