#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "solfix/prompting.hpp"
#include "solfix/slicer.hpp"
#include "support.hpp"

using namespace solfix;
using namespace testsup;

namespace {

CodeSlice tiny_slice() {
    CodeSlice s;
    Snippet sn;
    sn.span = {1, 1, 2, 1};
    sn.text = "pragma solidity ^0.8.0;\ncontract A { address payable w; }";
    s.snippets.push_back(sn);
    s.covers_error_line = true;
    return s;
}

Diagnostic sample_diag() {
    Diagnostic d;
    d.category = ErrorCategory::Type;
    d.message = "TypeError: Type address is not implicitly convertible to "
                "expected type address payable.";
    d.file = "a.sol";
    d.location = SourceLocation{2, 14};
    d.source_excerpt = "contract A { address payable w; }";
    return d;
}

KnowledgeEntry payable_entry() {
    KnowledgeEntry e;
    e.source_version = "0.7";
    e.target_version = "0.8";
    e.text = "Conversions from address to address payable are now possible "
             "via payable(x).";
    e.code_spans.push_back({65, 75});
    e.id = entry_id(e.source_version, e.target_version, e.text);
    return e;
}

size_t count_occurrences(const std::string& hay, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("block counts per granularity") {
    auto slice = tiny_slice();
    auto diag = std::optional<Diagnostic>(sample_diag());
    std::vector<KnowledgeEntry> kn = {payable_entry()};
    const std::pair<std::string, std::string> versions{"0.7", "0.8"};

    auto g = build_prompt(Granularity::General, slice, std::nullopt, {}, versions);
    REQUIRE(g.blocks.size() == 2);
    CHECK(g.blocks[0].first == kTaskDescriptionLabel);
    CHECK(g.blocks[1].first == kUncompilableCodeLabel);

    auto c = build_prompt(Granularity::CoarseGrained, slice, diag, {}, versions);
    REQUIRE(c.blocks.size() == 3);
    CHECK(c.blocks[2].first == kErrorMessageLabel);

    auto f = build_prompt(Granularity::FineGrained, slice, diag, kn, versions);
    REQUIRE(f.blocks.size() == 4);
    CHECK(f.blocks[3].first == kSolidityKnowledgeLabel);
}

TEST_CASE("fine prompt carries the knowledge code span and the markers") {
    auto p = build_prompt(Granularity::FineGrained, tiny_slice(),
                          sample_diag(), {payable_entry()}, {"0.7", "0.8"});
    CHECK(p.rendered.find("payable(x)") != std::string::npos);
    CHECK(p.rendered.find("`payable(x)`") != std::string::npos);
    CHECK(p.rendered.find(kSearchMarkerText) != std::string::npos);
    CHECK(p.rendered.find(kReplaceMarkerText) != std::string::npos);
}

TEST_CASE("missing inputs violate the granularity contract") {
    CHECK_THROWS_AS(build_prompt(Granularity::CoarseGrained, tiny_slice(),
                                 std::nullopt, {}, {"0.7", "0.8"}),
                    MissingBlockInput);
    CHECK_THROWS_AS(build_prompt(Granularity::FineGrained, tiny_slice(),
                                 sample_diag(), {}, {"0.7", "0.8"}),
                    MissingBlockInput);
}

TEST_CASE("rendered text nests by granularity as byte prefixes") {
    auto slice = tiny_slice();
    auto diag = std::optional<Diagnostic>(sample_diag());
    std::vector<KnowledgeEntry> kn = {payable_entry()};
    auto g = build_prompt(Granularity::General, slice, std::nullopt, {},
                          {"0.7", "0.8"});
    auto c = build_prompt(Granularity::CoarseGrained, slice, diag, {},
                          {"0.7", "0.8"});
    auto f = build_prompt(Granularity::FineGrained, slice, diag, kn,
                          {"0.7", "0.8"});
    CHECK(c.rendered.rfind(g.rendered, 0) == 0);
    CHECK(f.rendered.rfind(c.rendered, 0) == 0);
    CHECK(g.rendered.size() < c.rendered.size());
    CHECK(c.rendered.size() < f.rendered.size());
}

TEST_CASE("markers appear exactly once, in the task description") {
    auto p = build_prompt(Granularity::FineGrained, tiny_slice(),
                          sample_diag(), {payable_entry()}, {"0.7", "0.8"});
    CHECK(count_occurrences(p.rendered, kSearchMarkerText) == 1);
    CHECK(count_occurrences(p.rendered, kReplaceMarkerText) == 1);
    REQUIRE_FALSE(p.blocks.empty());
    CHECK(p.blocks[0].second.find(kSearchMarkerText) != std::string::npos);
    CHECK(p.blocks[0].second.find(kReplaceMarkerText) != std::string::npos);
}

TEST_CASE("prompts are deterministic and state the version pair") {
    auto a = build_prompt(Granularity::FineGrained, tiny_slice(),
                          sample_diag(), {payable_entry()}, {"0.7", "0.8"});
    auto b = build_prompt(Granularity::FineGrained, tiny_slice(),
                          sample_diag(), {payable_entry()}, {"0.7", "0.8"});
    CHECK(a.rendered == b.rendered);
    CHECK(a.rendered.find("0.7") != std::string::npos);
    CHECK(a.rendered.find("0.8") != std::string::npos);
}

TEST_CASE("code block renders snippets with their original line numbers") {
    CodeSlice s;
    Snippet sn;
    sn.span = {41, 1, 42, 1};
    sn.text = "    function f() public {\n    }";
    s.snippets.push_back(sn);
    s.covers_error_line = true;
    auto p = build_prompt(Granularity::General, s, std::nullopt, {},
                          {"0.7", "0.8"});
    CHECK(p.rendered.find("41 | ") != std::string::npos);
    CHECK(p.rendered.find("42 | ") != std::string::npos);
}

TEST_CASE("truncation is a no-op under budget") {
    auto p = build_prompt(Granularity::FineGrained, tiny_slice(),
                          sample_diag(), {payable_entry()}, {"0.7", "0.8"});
    auto t = truncate_to_budget(p, kDefaultPromptBudget);
    CHECK_FALSE(t.truncated);
    CHECK(t.rendered == p.rendered);
}

TEST_CASE("truncation drops far snippets first, keeps the error line") {
    CodeSlice s;
    Snippet near;
    near.span = {70, 1, 72, 1};
    near.text = "    function register() public {\n"
                "        wallet = msg.sender;\n"
                "    }";
    Snippet far;
    far.span = {200, 1, 230, 1};
    std::string big;
    for (int i = 0; i < 31; ++i) big += "    uint filler" + std::to_string(i) +
                                        " = " + std::to_string(i) + ";\n";
    big.pop_back();
    far.text = big;
    s.snippets = {near, far};
    s.covers_error_line = true;
    Diagnostic d = sample_diag();
    d.location = SourceLocation{71, 9};
    auto p = build_prompt(Granularity::CoarseGrained, s, d, {}, {"0.7", "0.8"});
    // budget large enough for everything but the far snippet
    const size_t budget = p.rendered.size() - far.text.size();
    auto t = truncate_to_budget(p, budget);
    CHECK(t.truncated);
    CHECK(t.rendered.size() <= budget);
    CHECK(t.rendered.find("wallet = msg.sender") != std::string::npos);
    CHECK(t.rendered.find("filler30") == std::string::npos);
    // task and error blocks survive untouched
    CHECK(t.rendered.find(kSearchMarkerText) != std::string::npos);
    CHECK(t.rendered.find("not implicitly convertible") != std::string::npos);
}

TEST_CASE("budget below the task description is BudgetTooSmall") {
    auto p = build_prompt(Granularity::General, tiny_slice(), std::nullopt, {},
                          {"0.7", "0.8"});
    CHECK_THROWS_AS(truncate_to_budget(p, 10), BudgetTooSmall);
}

TEST_CASE("shipped template file equals the built-in default") {
    auto shipped = load_task_template(data_dir() / "prompt_task.txt");
    CHECK(shipped == default_task_template());
    PromptOptions opts;
    opts.task_template = shipped;
    auto a = build_prompt(Granularity::General, tiny_slice(), std::nullopt, {},
                          {"0.7", "0.8"}, opts);
    auto b = build_prompt(Granularity::General, tiny_slice(), std::nullopt, {},
                          {"0.7", "0.8"});
    CHECK(a.rendered == b.rendered);
}

TEST_CASE("feedback from a failed attempt lands in the rendered prompt") {
    PromptOptions opts;
    opts.feedback = "Previous attempt failed: search chunk not found.";
    auto p = build_prompt(Granularity::CoarseGrained, tiny_slice(),
                          sample_diag(), {}, {"0.7", "0.8"}, opts);
    CHECK(p.rendered.find("Previous attempt failed") != std::string::npos);
}
