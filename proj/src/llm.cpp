#include "solfix/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <condition_variable>

#include <httplib.h>
#include <json.hpp>

namespace solfix {

namespace {

using nlohmann::json;

// Splits "http://host:port/v1" into client base and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    size_t scheme = url.find("://");
    size_t path_start = scheme == std::string::npos
                            ? url.find('/')
                            : url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

class HttpProvider : public LlmProvider {
public:
    explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {}

    LlmResponse complete(const LlmRequest& req) override {
        InFlightGuard guard(*this);
        const auto started = std::chrono::steady_clock::now();

        json body;
        body["model"] = req.model.empty() ? cfg_.model : req.model;
        body["temperature"] = req.temperature;
        body["max_tokens"] = req.max_output;
        body["messages"] = json::array({{{"role", "user"}, {"content", req.prompt}}});

        const auto [host, prefix] = split_base_url(cfg_.base_url);
        std::string last_error;
        int backoff = cfg_.backoff_ms;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
                backoff *= 2;
            }
            httplib::Client client(host);
            client.set_connection_timeout(10);
            client.set_read_timeout(120);
            httplib::Headers headers;
            if (!cfg_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post(prefix + "/chat/completions", headers,
                                   body.dump(), "application/json");
            if (!res) {
                last_error = "transport error";
                continue; // transient
            }
            if (res->status >= 500 || res->status == 429) {
                last_error = "status " + std::to_string(res->status);
                continue; // transient
            }
            if (res->status != 200)
                throw ProviderUnavailable("provider returned status " +
                                          std::to_string(res->status));
            try {
                auto j = json::parse(res->body);
                LlmResponse out;
                out.text = j.at("choices").at(0).at("message").at("content")
                               .get<std::string>();
                out.provider = cfg_.base_url;
                out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
                return out;
            } catch (const json::exception& e) {
                throw ProviderUnavailable(std::string("malformed provider response: ") +
                                          e.what());
            }
        }
        throw ProviderUnavailable("provider unreachable after " +
                                  std::to_string(cfg_.max_retries + 1) +
                                  " attempts (" + last_error + ")");
    }

private:
    struct InFlightGuard {
        explicit InFlightGuard(HttpProvider& p) : provider(p) {
            std::unique_lock lock(p.mutex_);
            p.cv_.wait(lock, [&] { return p.in_flight_ < p.cfg_.in_flight_cap; });
            ++p.in_flight_;
        }
        ~InFlightGuard() {
            {
                std::lock_guard lock(provider.mutex_);
                --provider.in_flight_;
            }
            provider.cv_.notify_one();
        }
        HttpProvider& provider;
    };

    HttpProviderConfig cfg_;
    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
};

} // namespace

std::unique_ptr<LlmProvider> make_http_provider(const HttpProviderConfig& cfg) {
    if (cfg.base_url.empty())
        throw ProviderUnavailable("no provider endpoint configured");
    return std::make_unique<HttpProvider>(cfg);
}

HttpProviderConfig http_config_from_env() {
    HttpProviderConfig cfg;
    if (const char* v = std::getenv("SOLFIX_LLM_ENDPOINT")) cfg.base_url = v;
    if (const char* v = std::getenv("SOLFIX_LLM_MODEL")) cfg.model = v;
    if (const char* v = std::getenv("SOLFIX_LLM_API_KEY")) cfg.api_key = v;
    return cfg;
}

MockProvider::MockProvider(std::vector<MockEntry> transcript)
    : transcript_(std::move(transcript)) {}

MockProvider MockProvider::from_file(const std::filesystem::path& path) {
    return MockProvider(load_transcript(path));
}

LlmResponse MockProvider::complete(const LlmRequest& req) {
    if (next_ >= transcript_.size())
        throw TranscriptExhausted("mock transcript exhausted after " +
                                  std::to_string(transcript_.size()) + " responses");
    const MockEntry& entry = transcript_[next_++];
    if (entry.match_hint &&
        req.prompt.find(*entry.match_hint) == std::string::npos)
        throw TranscriptMismatch("transcript entry " + std::to_string(next_) +
                                 " expects hint \"" + *entry.match_hint +
                                 "\" which the prompt does not contain");
    LlmResponse out;
    out.text = entry.response_text;
    out.provider = "mock";
    out.latency_ms = 0;
    return out;
}

std::vector<MockEntry> load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open transcript: " + path.string());
    std::vector<MockEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            MockEntry e;
            if (j.contains("match_hint") && !j["match_hint"].is_null())
                e.match_hint = j["match_hint"].get<std::string>();
            e.response_text = j.at("response").get<std::string>();
            out.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw IoFailure("bad transcript line in " + path.string() + ": " +
                            e.what());
        }
    }
    return out;
}

} // namespace solfix
