#include "solfix/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "solfix/retriever.hpp"

namespace solfix {

std::string to_string(Granularity g) {
    switch (g) {
        case Granularity::General: return "general";
        case Granularity::CoarseGrained: return "coarse";
        case Granularity::FineGrained: return "fine";
    }
    return "fine";
}

Granularity granularity_from_string(const std::string& s) {
    if (s == "general") return Granularity::General;
    if (s == "coarse" || s == "coarse-grained") return Granularity::CoarseGrained;
    if (s == "fine" || s == "fine-grained") return Granularity::FineGrained;
    throw UsageError("unknown granularity: " + s);
}

std::string default_task_template() {
    return
        "You are an expert Solidity developer. A smart contract written for "
        "Solidity {source_version} fails to compile under Solidity "
        "{target_version}. Fix the single compilation error so that the "
        "contract compiles on {target_version}, changing as little code as "
        "possible.\n"
        "\n"
        "Reply with one or more search/replace edits and nothing else. Each "
        "edit has this exact shape:\n"
        "{search_marker}\n"
        "lines copied verbatim from the contract, without line-number gutters\n"
        "{divider}\n"
        "the corrected lines\n"
        "{replace_marker}\n";
}

std::string load_task_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open task template: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

namespace {

void replace_all_occurrences(std::string& text, const std::string& from,
                             const std::string& to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

std::string render_task(const std::string& tmpl,
                        const std::pair<std::string, std::string>& versions) {
    std::string out = tmpl;
    replace_all_occurrences(out, "{source_version}", versions.first);
    replace_all_occurrences(out, "{target_version}", versions.second);
    replace_all_occurrences(out, "{search_marker}", kSearchMarkerText);
    replace_all_occurrences(out, "{divider}", kDividerText);
    replace_all_occurrences(out, "{replace_marker}", kReplaceMarkerText);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

std::string render_snippet(const Snippet& snip) {
    std::ostringstream os;
    int line_no = snip.span.start_line;
    bool first = true;
    std::vector<std::string> lines;
    std::string cur;
    for (char c : snip.text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    lines.push_back(cur);
    for (const auto& l : lines) {
        if (!first) os << "\n";
        first = false;
        os << line_no++ << " | " << l;
    }
    return os.str();
}

std::string backtick_spans(const KnowledgeEntry& entry) {
    std::string text = entry.text;
    // insert from the back so earlier offsets stay valid
    for (auto it = entry.code_spans.rbegin(); it != entry.code_spans.rend(); ++it) {
        if (it->end <= text.size()) text.insert(it->end, "`");
        if (it->start <= text.size()) text.insert(it->start, "`");
    }
    return text;
}

void assemble(Prompt& p) {
    p.blocks.clear();
    p.blocks.emplace_back(kTaskDescriptionLabel, p.task_text);

    std::string code;
    for (size_t i = 0; i < p.snippets.size(); ++i) {
        if (i) code += "\n\n";
        code += render_snippet(p.snippets[i]);
    }
    p.blocks.emplace_back(kUncompilableCodeLabel, code);

    if (p.error_text) p.blocks.emplace_back(kErrorMessageLabel, *p.error_text);

    if (!p.knowledge_texts.empty()) {
        std::string knowledge;
        for (size_t i = 0; i < p.knowledge_texts.size(); ++i) {
            if (i) knowledge += "\n\n";
            knowledge += p.knowledge_texts[i];
        }
        p.blocks.emplace_back(kSolidityKnowledgeLabel, knowledge);
    }

    if (!p.feedback.empty())
        p.blocks.emplace_back("Previous attempt failed", p.feedback);
    if (p.truncated)
        p.blocks.emplace_back("Truncation note",
                              "Some context was omitted to fit the length budget.");

    std::ostringstream os;
    for (size_t i = 0; i < p.blocks.size(); ++i) {
        if (i) os << "\n\n";
        os << "[" << p.blocks[i].first << "]\n" << p.blocks[i].second;
    }
    p.rendered = os.str();
}

} // namespace

Prompt build_prompt(Granularity g, const CodeSlice& slice,
                    const std::optional<Diagnostic>& diag,
                    const std::vector<KnowledgeEntry>& knowledge,
                    const std::pair<std::string, std::string>& versions,
                    const PromptOptions& opts) {
    if (g != Granularity::General && !diag)
        throw MissingBlockInput("coarse and fine prompts require a diagnostic");
    if (g == Granularity::FineGrained && knowledge.empty())
        throw MissingBlockInput("fine-grained prompt requires knowledge entries");

    Prompt p;
    p.granularity = g;
    p.task_text = render_task(
        opts.task_template.empty() ? default_task_template() : opts.task_template,
        versions);
    p.snippets = slice.snippets;
    if (g != Granularity::General) {
        p.error_text = clean_query(*diag).text;
        if (diag->location) p.error_line = diag->location->line;
    }
    if (g == Granularity::FineGrained)
        for (const auto& e : knowledge) p.knowledge_texts.push_back(backtick_spans(e));
    p.feedback = opts.feedback;
    assemble(p);
    return p;
}

Prompt truncate_to_budget(const Prompt& p, size_t max_chars) {
    if (p.task_text.size() > max_chars)
        throw BudgetTooSmall("budget " + std::to_string(max_chars) +
                             " cannot hold the task description");
    Prompt out = p;
    while (out.rendered.size() > max_chars) {
        if (out.snippets.size() > 1) {
            // drop the snippet farthest from the error line (last one when
            // no error line is known)
            size_t victim = out.snippets.size() - 1;
            if (out.error_line) {
                long best = -1;
                for (size_t i = 0; i < out.snippets.size(); ++i) {
                    const auto& s = out.snippets[i].span;
                    long dist = 0;
                    if (*out.error_line < s.start_line)
                        dist = s.start_line - *out.error_line;
                    else if (*out.error_line > s.end_line)
                        dist = *out.error_line - s.end_line;
                    if (dist >= best) {
                        best = dist;
                        victim = i;
                    }
                }
            }
            out.snippets.erase(out.snippets.begin() + static_cast<long>(victim));
        } else if (out.knowledge_texts.size() > 1) {
            out.knowledge_texts.pop_back();
        } else {
            break; // nothing left that may be trimmed
        }
        out.truncated = true;
        assemble(out);
    }
    if (out.truncated) assemble(out);
    return out;
}

} // namespace solfix
