#include "solfix/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace solfix {

namespace {

bool is_tok_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct PosToken {
    std::string text;
    size_t begin = 0;
    size_t end = 0; // past-the-end
};

std::vector<PosToken> tokenize_pos(const std::string& input) {
    std::string text;
    text.reserve(input.size());
    for (char c : input) text += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::vector<PosToken> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!is_tok_char(text[i])) {
            ++i;
            continue;
        }
        // collect a dotted chain of segments
        std::vector<PosToken> parts;
        size_t j = i;
        while (true) {
            size_t k = j;
            while (k < n && is_tok_char(text[k])) ++k;
            parts.push_back({text.substr(j, k - j), j, k});
            if (k < n && text[k] == '.' && k + 1 < n && is_tok_char(text[k + 1]))
                j = k + 1;
            else {
                j = k;
                break;
            }
        }
        if (parts.size() > 1) {
            std::string chain;
            for (size_t p = 0; p < parts.size(); ++p) {
                if (p) chain += '.';
                chain += parts[p].text;
            }
            out.push_back({chain, parts.front().begin, parts.back().end});
        }
        for (auto& p : parts) out.push_back(std::move(p));
        i = j;
    }
    return out;
}

bool inside_any_span(const PosToken& tok, const std::vector<CodeSpan>& spans) {
    for (const auto& s : spans)
        if (tok.begin >= s.start && tok.end <= s.end) return true;
    return false;
}

struct StoreStats {
    std::map<std::string, int> df;
    double avgdl = 0.0;
    size_t doc_count = 0;
};

StoreStats build_stats(const KnowledgeStore& store) {
    StoreStats st;
    st.doc_count = store.entries.size();
    size_t total = 0;
    for (const auto& e : store.entries) {
        auto toks = tokenize_pos(e.text);
        total += toks.size();
        std::set<std::string> seen;
        for (const auto& t : toks) seen.insert(t.text);
        for (const auto& t : seen) ++st.df[t];
    }
    st.avgdl = st.doc_count ? static_cast<double>(total) / st.doc_count : 1.0;
    return st;
}

double score_with_stats(const Query& query, const KnowledgeEntry& entry,
                        const StoreStats& stats, const ScoreParams& params) {
    const auto entry_toks = tokenize_pos(entry.text);
    const double dl = static_cast<double>(entry_toks.size());

    // weighted term frequencies: code-span occurrences count weight_code
    std::map<std::string, double> tf;
    for (const auto& t : entry_toks)
        tf[t.text] += inside_any_span(t, entry.code_spans) ? params.weight_code : 1.0;

    // query term weights: repeated terms add up, code tokens count extra
    std::set<std::string> code_terms;
    for (const auto& ct : query.code_tokens)
        for (const auto& t : tokenize_pos(ct)) code_terms.insert(t.text);
    std::map<std::string, double> qw;
    for (const auto& t : tokenize_pos(query.text))
        qw[t.text] += code_terms.count(t.text) ? params.weight_code : 1.0;

    const double n = static_cast<double>(stats.doc_count);
    double s = 0.0;
    for (const auto& [term, weight] : qw) {
        auto it = tf.find(term);
        if (it == tf.end()) continue;
        auto dfit = stats.df.find(term);
        const double df = dfit == stats.df.end() ? 0.0 : dfit->second;
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double f = it->second;
        const double norm =
            f * (params.k1 + 1.0) /
            (f + params.k1 * (1.0 - params.b + params.b * dl / stats.avgdl));
        s += weight * idf * norm;
    }
    if (query.version_pair && query.version_pair->first == entry.source_version &&
        query.version_pair->second == entry.target_version)
        s *= params.version_boost;
    return s;
}

std::vector<RetrievalResult> rank_top_k(
    std::vector<std::pair<std::string, double>> scored, int k) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<size_t>(k) < scored.size()) scored.resize(static_cast<size_t>(k));
    std::vector<RetrievalResult> out;
    int rank = 1;
    for (const auto& [id, sc] : scored) out.push_back({id, sc, rank++});
    return out;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& t : tokenize_pos(text)) out.push_back(t.text);
    return out;
}

Query clean_query(const Diagnostic& diag) {
    Query q;
    // drop gutter / caret / line-number decoration from the message body
    std::string line;
    std::istringstream is(diag.message);
    while (std::getline(is, line)) {
        std::string trimmed = line;
        const size_t first = trimmed.find_first_not_of(" \t");
        if (first != std::string::npos) trimmed = trimmed.substr(first);
        if (trimmed.rfind("-->", 0) == 0) continue;
        if (trimmed.rfind("Error -->", 0) == 0) continue;
        if (!trimmed.empty() &&
            trimmed.find_first_not_of("^ \t") == std::string::npos)
            continue; // caret line
        if (!trimmed.empty() && trimmed[0] == '|') continue;
        size_t d = 0;
        while (d < trimmed.size() && std::isdigit(static_cast<unsigned char>(trimmed[d])))
            ++d;
        if (d > 0 && d < trimmed.size() &&
            trimmed.find_first_not_of(" \t", d) != std::string::npos &&
            trimmed[trimmed.find_first_not_of(" \t", d)] == '|')
            continue; // "27 | ..." gutter
        if (trimmed.empty()) continue;
        if (!q.text.empty()) q.text += "\n";
        q.text += trimmed;
    }
    // retain the flagged source line
    std::string excerpt = diag.source_excerpt;
    const size_t first = excerpt.find_first_not_of(" \t");
    if (first != std::string::npos) excerpt = excerpt.substr(first);
    else excerpt.clear();
    if (!excerpt.empty()) {
        if (!q.text.empty()) q.text += "\n";
        q.text += excerpt;
        for (const auto& t : tokenize(excerpt)) q.code_tokens.push_back(t);
    }
    // quoted identifiers count as code tokens too
    size_t pos = 0;
    while (true) {
        size_t open = diag.message.find('"', pos);
        if (open == std::string::npos) break;
        size_t close = diag.message.find('"', open + 1);
        if (close == std::string::npos) break;
        for (const auto& t : tokenize(diag.message.substr(open + 1, close - open - 1)))
            q.code_tokens.push_back(t);
        pos = close + 1;
    }
    // dedupe, keep first occurrence
    std::vector<std::string> deduped;
    for (auto& t : q.code_tokens)
        if (std::find(deduped.begin(), deduped.end(), t) == deduped.end())
            deduped.push_back(t);
    q.code_tokens = std::move(deduped);
    return q;
}

double score(const Query& query, const KnowledgeEntry& entry,
             const KnowledgeStore& store, const ScoreParams& params) {
    return score_with_stats(query, entry, build_stats(store), params);
}

std::vector<RetrievalResult> retrieve(const Query& query,
                                      const KnowledgeStore& store, int k,
                                      const ScoreParams& params) {
    if (store.entries.empty()) throw EmptyStore("knowledge store is empty");
    if (k < 1) throw UsageError("k must be >= 1");
    const auto stats = build_stats(store);
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& e : store.entries)
        scored.emplace_back(e.id, score_with_stats(query, e, stats, params));
    return rank_top_k(std::move(scored), k);
}

double acc_at_k(const std::vector<std::pair<Query, std::string>>& eval_set,
                const KnowledgeStore& store, int k, const ScoreParams& params) {
    if (eval_set.empty()) throw EmptyInput("empty eval set");
    for (const auto& [q, gt] : eval_set) {
        const bool known = std::any_of(store.entries.begin(), store.entries.end(),
                                       [&](const auto& e) { return e.id == gt; });
        if (!known) throw UnknownGroundTruth("groundtruth id not in store: " + gt);
    }
    int hits = 0;
    for (const auto& [q, gt] : eval_set) {
        const auto results = retrieve(q, store, k, params);
        for (const auto& r : results)
            if (r.entry_id == gt) {
                ++hits;
                break;
            }
    }
    return 100.0 * hits / static_cast<double>(eval_set.size());
}

namespace {

class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(std::string base_url, std::string model)
        : base_url_(std::move(base_url)), model_(std::move(model)) {}

    std::vector<std::vector<double>> embed(
        const std::vector<std::string>& texts) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(5);
        client.set_read_timeout(30);
        nlohmann::json body;
        body["model"] = model_;
        body["input"] = texts;
        auto res = client.Post("/embeddings", body.dump(), "application/json");
        if (!res || res->status != 200)
            throw BackendUnavailable("embedding backend unreachable: " + base_url_);
        try {
            auto j = nlohmann::json::parse(res->body);
            std::vector<std::vector<double>> out;
            for (const auto& item : j.at("data"))
                out.push_back(item.at("embedding").get<std::vector<double>>());
            if (out.size() != texts.size())
                throw BackendUnavailable("embedding backend returned wrong count");
            return out;
        } catch (const nlohmann::json::exception& e) {
            throw BackendUnavailable(std::string("bad embedding response: ") + e.what());
        }
    }

private:
    std::string base_url_;
    std::string model_;
};

} // namespace

std::unique_ptr<EmbeddingBackend> make_http_embedding_backend(
    const std::string& base_url, const std::string& model) {
    return std::make_unique<HttpEmbeddingBackend>(base_url, model);
}

std::vector<RetrievalResult> embed_backend_retrieve(const Query& query,
                                                    const KnowledgeStore& store,
                                                    int k,
                                                    EmbeddingBackend& backend) {
    if (store.entries.empty()) throw EmptyStore("knowledge store is empty");
    if (k < 1) throw UsageError("k must be >= 1");
    std::vector<std::string> texts;
    texts.push_back(query.text);
    for (const auto& e : store.entries) texts.push_back(e.text);
    const auto vectors = backend.embed(texts);

    auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0, na = 0, nb = 0;
        const size_t n = std::min(a.size(), b.size());
        for (size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if (na == 0 || nb == 0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };

    std::vector<std::pair<std::string, double>> scored;
    for (size_t i = 0; i < store.entries.size(); ++i)
        scored.emplace_back(store.entries[i].id, cosine(vectors[0], vectors[i + 1]));
    return rank_top_k(std::move(scored), k);
}

std::vector<LabeledTriple> load_eval_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open eval set: " + path.string());
    std::vector<LabeledTriple> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            LabeledTriple t;
            t.query = j.at("query").get<std::string>();
            t.answer = j.value("answer", std::string{});
            t.label = j.value("label", 0);
            t.groundtruth_id = j.value("groundtruth_id", std::string{});
            out.push_back(std::move(t));
        } catch (const nlohmann::json::exception& e) {
            throw IoFailure("bad eval set line: " + std::string(e.what()));
        }
    }
    return out;
}

} // namespace solfix
