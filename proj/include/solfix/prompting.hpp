#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "solfix/compiler.hpp"
#include "solfix/knowledge.hpp"
#include "solfix/slicer.hpp"

namespace solfix {

enum class Granularity { General, CoarseGrained, FineGrained };

std::string to_string(Granularity g);
Granularity granularity_from_string(const std::string& s);

// Block labels, rendered as bracketed section headers in this order.
inline constexpr const char* kTaskDescriptionLabel = "Task description";
inline constexpr const char* kUncompilableCodeLabel = "Uncompilable code";
inline constexpr const char* kErrorMessageLabel = "Error message";
inline constexpr const char* kSolidityKnowledgeLabel = "Solidity knowledge";

// Patch wire-format markers; the task description quotes them verbatim.
inline constexpr const char* kSearchMarkerText = "<<<<<<< SEARCH";
inline constexpr const char* kDividerText = "=======";
inline constexpr const char* kReplaceMarkerText = ">>>>>>> REPLACE";

struct Prompt {
    Granularity granularity = Granularity::General;
    std::vector<std::pair<std::string, std::string>> blocks; // (label, text)
    std::string rendered;
    bool truncated = false;

    // constituents kept so truncation can re-render
    std::string task_text;
    std::vector<Snippet> snippets;
    std::optional<std::string> error_text;
    std::vector<std::string> knowledge_texts; // code spans already backticked
    std::string feedback;
    std::optional<int> error_line;
};

struct PromptOptions {
    // Task-description template; placeholders {source_version},
    // {target_version}, {search_marker}, {divider}, {replace_marker}.
    // Empty means the built-in default (shipped as data/prompt_task.txt).
    std::string task_template;
    // Extra feedback appended after the error message (previous failed
    // attempt, supplied by the repair loop).
    std::string feedback;
};

std::string default_task_template();
std::string load_task_template(const std::filesystem::path& path);

// General: task + code. CoarseGrained adds the error message. FineGrained
// adds retrieved knowledge (entry code spans rendered in backticks).
// Throws MissingBlockInput when a required input is absent.
Prompt build_prompt(Granularity g, const CodeSlice& slice,
                    const std::optional<Diagnostic>& diag,
                    const std::vector<KnowledgeEntry>& knowledge,
                    const std::pair<std::string, std::string>& versions,
                    const PromptOptions& opts = {});

// Trims code snippets farthest from the error line first, then knowledge
// entries beyond the first. Task description and error message are never
// trimmed. Throws BudgetTooSmall when max_chars cannot even hold the task
// description.
Prompt truncate_to_budget(const Prompt& p, size_t max_chars);

inline constexpr size_t kDefaultPromptBudget = 24000;

} // namespace solfix
