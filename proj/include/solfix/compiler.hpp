#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "solfix/errors.hpp"

namespace solfix {

enum class ErrorCategory {
    Parser,
    Declaration,
    Syntax,
    Type,
    JsonError,
    IoError,
    Other,
};

std::string to_string(ErrorCategory c);

// True for the four categories that make a compilation fail (as opposed to
// the CLI-level JSON/IO categories and Other).
bool is_compilation_error(ErrorCategory c);

struct SourceLocation {
    int line = 1;   // 1-based
    int column = 1; // 1-based
};

struct Diagnostic {
    ErrorCategory category = ErrorCategory::Other;
    std::string message;
    std::string file;
    std::optional<SourceLocation> location;
    std::string source_excerpt; // the flagged source line, may be empty
};

struct CompileResult {
    bool success = false;
    std::vector<Diagnostic> diagnostics;
    std::string compiler_version;
    std::string raw_output; // preserved byte-exact
};

// Maps the compiler's leading token ("TypeError: ...") to a category.
// Total and pure; unknown prefixes map to Other.
ErrorCategory classify(const std::string& message);

// Splits the compiler's human-readable text output into diagnostics.
// Location comes from the "--> file:line:col" gutter, the excerpt from the
// quoted source line. Unparseable blocks become category=Other.
std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output);

// Renders a diagnostic back into the compiler's text layout. Used for
// round-trip checks and for feeding errors back into prompts.
std::string render_diagnostic(const Diagnostic& d);

// Version-prefix -> command line table, e.g. "0.8" -> "/usr/bin/solc-0.8.23".
// The value is split on whitespace into argv; the source path is appended.
class CompilerTable {
public:
    CompilerTable() = default;

    static CompilerTable from_file(const std::filesystem::path& path);
    // Honors the SOLFIX_COMPILER_TABLE env var when path is empty.
    static CompilerTable resolve(const std::filesystem::path& explicit_path = {});

    void add(const std::string& version_prefix, const std::string& command);

    // Longest-prefix match against the requested version.
    std::vector<std::string> command_for(const std::string& version) const;

    bool empty() const { return entries_.empty(); }

private:
    std::map<std::string, std::string> entries_;
};

struct CompileOptions {
    // Seconds before the child process is killed and ProcessFailure raised.
    int timeout_seconds = 60;
    // When set, the raw compiler output is also written to this file.
    std::filesystem::path log_path;
};

// Writes `source` into `workdir`, invokes the compiler resolved for
// `target_version` and parses its output. Compilation failure is data,
// never an exception; CompilerNotFound / ProcessFailure signal environment
// problems.
CompileResult compile(const std::string& source,
                      const std::string& target_version,
                      const std::filesystem::path& workdir,
                      const CompilerTable& table,
                      const CompileOptions& opts = {});

} // namespace solfix
