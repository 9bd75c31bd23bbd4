#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "solfix/llm.hpp"
#include "support.hpp"

using namespace solfix;
using namespace testsup;

TEST_CASE("mock replays scripted responses byte-exact") {
    const std::string patch_text =
        "<<<<<<< SEARCH\nold line\n=======\nnew line\n>>>>>>> REPLACE\n";
    MockProvider mock({{std::nullopt, patch_text}});
    LlmRequest req;
    req.prompt = "fix this";
    auto resp = mock.complete(req);
    CHECK(resp.text == patch_text);
    CHECK(mock.remaining() == 0);
}

TEST_CASE("exhausted transcript throws on the extra call") {
    MockProvider mock({{std::nullopt, "only answer"}});
    LlmRequest req;
    req.prompt = "p";
    mock.complete(req);
    CHECK_THROWS_AS(mock.complete(req), TranscriptExhausted);
}

TEST_CASE("match hint must occur in the prompt") {
    MockProvider mock({{std::string("payable"), "answer"}});
    LlmRequest req;
    req.prompt = "this prompt mentions nothing relevant";
    CHECK_THROWS_AS(mock.complete(req), TranscriptMismatch);
}

TEST_CASE("match hint that occurs is accepted, entries consumed in order") {
    MockProvider mock({
        {std::string("first"), "answer one"},
        {std::nullopt, "answer two"},
    });
    LlmRequest req;
    req.prompt = "the first prompt";
    CHECK(mock.complete(req).text == "answer one");
    req.prompt = "anything";
    CHECK(mock.complete(req).text == "answer two");
}

TEST_CASE("transcript file loads hints and responses") {
    auto entries = load_transcript(fixtures() / "transcripts" / "fig1.jsonl");
    REQUIRE(entries.size() == 2);
    REQUIRE(entries[0].match_hint.has_value());
    CHECK(entries[0].match_hint->find("compiler version") != std::string::npos);
    CHECK(entries[0].response_text.find("SEARCH") != std::string::npos);
    REQUIRE(entries[1].match_hint.has_value());
    CHECK(entries[1].match_hint->find("payable") != std::string::npos);

    auto mock = MockProvider::from_file(fixtures() / "transcripts" / "fig1.jsonl");
    CHECK(mock.remaining() == 2);
}

TEST_CASE("missing transcript file is IoFailure") {
    CHECK_THROWS_AS(load_transcript("/nonexistent/transcript.jsonl"), IoFailure);
}

TEST_CASE("empty base url is ProviderUnavailable immediately") {
    HttpProviderConfig cfg;
    cfg.base_url = "";
    cfg.model = "m";
    CHECK_THROWS_AS(make_http_provider(cfg), ProviderUnavailable);
}

TEST_CASE("unreachable endpoint fails with ProviderUnavailable") {
    HttpProviderConfig cfg;
    cfg.base_url = "http://127.0.0.1:9"; // discard port, nothing listens
    cfg.model = "m";
    cfg.max_retries = 0;
    cfg.backoff_ms = 1;
    auto provider = make_http_provider(cfg);
    LlmRequest req;
    req.prompt = "p";
    CHECK_THROWS_AS(provider->complete(req), ProviderUnavailable);
}

TEST_CASE("env config picks up the standard variables") {
    setenv("SOLFIX_LLM_ENDPOINT", "http://localhost:1234/v1", 1);
    setenv("SOLFIX_LLM_MODEL", "test-model", 1);
    setenv("SOLFIX_LLM_API_KEY", "k", 1);
    auto cfg = http_config_from_env();
    CHECK(cfg.base_url == "http://localhost:1234/v1");
    CHECK(cfg.model == "test-model");
    CHECK(cfg.api_key == "k");
    unsetenv("SOLFIX_LLM_ENDPOINT");
    unsetenv("SOLFIX_LLM_MODEL");
    unsetenv("SOLFIX_LLM_API_KEY");
}
