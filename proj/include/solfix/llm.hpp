#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solfix/errors.hpp"

namespace solfix {

struct LlmRequest {
    std::string prompt;
    std::string model;
    double temperature = 0.0; // in [0,1]
    int max_output = 4096;
};

struct LlmResponse {
    std::string text; // byte-exact model output
    std::string provider;
    long latency_ms = 0;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    virtual LlmResponse complete(const LlmRequest& req) = 0;
};

struct HttpProviderConfig {
    std::string base_url;   // e.g. http://localhost:8000/v1
    std::string model;
    std::string api_key;
    int max_retries = 3;    // transient transport failures
    int backoff_ms = 250;   // doubled per retry
    int in_flight_cap = 4;  // concurrent requests
};

// Chat-completion-compatible JSON POST (messages array, single user turn).
// Retries transient failures with exponential backoff, then throws
// ProviderUnavailable.
std::unique_ptr<LlmProvider> make_http_provider(const HttpProviderConfig& cfg);

// Reads SOLFIX_LLM_ENDPOINT / SOLFIX_LLM_MODEL / SOLFIX_LLM_API_KEY.
HttpProviderConfig http_config_from_env();

struct MockEntry {
    std::optional<std::string> match_hint; // must occur in the prompt it answers
    std::string response_text;
};

// Deterministic scripted provider: entries consumed strictly in order.
// Throws TranscriptExhausted when the script runs out and
// TranscriptMismatch when a match_hint does not occur in the prompt.
class MockProvider : public LlmProvider {
public:
    explicit MockProvider(std::vector<MockEntry> transcript);
    static MockProvider from_file(const std::filesystem::path& path);

    LlmResponse complete(const LlmRequest& req) override;

    size_t remaining() const { return transcript_.size() - next_; }

private:
    std::vector<MockEntry> transcript_;
    size_t next_ = 0;
};

// Line-delimited JSON: {"match_hint": optional string, "response": string}.
std::vector<MockEntry> load_transcript(const std::filesystem::path& path);

} // namespace solfix
