#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "solfix/retriever.hpp"
#include "support.hpp"

using namespace solfix;
using namespace testsup;

namespace {

KnowledgeEntry make_entry(const std::string& text,
                          const std::vector<std::pair<size_t, size_t>>& spans,
                          const std::string& sv = "0.7",
                          const std::string& tv = "0.8") {
    KnowledgeEntry e;
    e.source_version = sv;
    e.target_version = tv;
    e.text = text;
    for (auto [s, t] : spans) e.code_spans.push_back({s, t});
    e.id = entry_id(sv, tv, text);
    return e;
}

KnowledgeStore make_store(std::vector<KnowledgeEntry> entries) {
    KnowledgeStore s;
    s.entries = std::move(entries);
    return s;
}

Diagnostic fig7_diagnostic() {
    Diagnostic d;
    d.category = ErrorCategory::Type;
    d.message = "TypeError: \"send\" and \"transfer\" are only available for "
                "objects of type \"address payable\", not \"address\".";
    d.file = "contracts/3.sol";
    d.location = SourceLocation{27, 9};
    d.source_excerpt =
        "        msg.sender.transfer(payable(address(this)).balance);";
    return d;
}

struct OracleToken {
    std::string text;
    size_t begin = 0;
    size_t end = 0;
};

// Straight-line reimplementation of the documented tokenizer: lowercase,
// runs of [a-z0-9_], dotted chains emitted as one token plus their parts.
std::vector<OracleToken> oracle_tokens(const std::string& input) {
    std::string text;
    for (char c : input) text += (char)std::tolower((unsigned char)c);
    auto tok_char = [](char c) {
        return std::isalnum((unsigned char)c) || c == '_';
    };
    std::vector<OracleToken> out;
    size_t i = 0;
    while (i < text.size()) {
        if (!tok_char(text[i])) {
            ++i;
            continue;
        }
        std::vector<OracleToken> parts;
        size_t j = i;
        while (true) {
            size_t k = j;
            while (k < text.size() && tok_char(text[k])) ++k;
            parts.push_back({text.substr(j, k - j), j, k});
            if (k + 1 < text.size() && text[k] == '.' && tok_char(text[k + 1]))
                j = k + 1;
            else {
                j = k;
                break;
            }
        }
        if (parts.size() > 1) {
            std::string chain;
            for (size_t p = 0; p < parts.size(); ++p)
                chain += (p ? "." : "") + parts[p].text;
            out.push_back({chain, parts.front().begin, parts.back().end});
        }
        for (const auto& p : parts) out.push_back(p);
        i = j;
    }
    return out;
}

// Brute-force recomputation of the code-weighted BM25 formula: occurrence
// tf with weight_code inside code spans, additive query weights, raw token
// count as document length, idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
double score_oracle(const Query& q, const KnowledgeEntry& entry,
                    const KnowledgeStore& store, const ScoreParams& p) {
    double avgdl = 0;
    for (const auto& e : store.entries)
        avgdl += (double)oracle_tokens(e.text).size();
    avgdl /= (double)store.entries.size();

    auto df_of = [&](const std::string& tok) {
        int df = 0;
        for (const auto& e : store.entries) {
            for (const auto& t : oracle_tokens(e.text))
                if (t.text == tok) {
                    ++df;
                    break;
                }
        }
        return (double)df;
    };

    const auto etoks = oracle_tokens(entry.text);
    const double dl = (double)etoks.size();
    std::map<std::string, double> tf;
    for (const auto& t : etoks) {
        bool in_span = false;
        for (const auto& s : entry.code_spans)
            if (t.begin >= s.start && t.end <= s.end) in_span = true;
        tf[t.text] += in_span ? p.weight_code : 1.0;
    }

    std::set<std::string> code_terms;
    for (const auto& ct : q.code_tokens)
        for (const auto& t : oracle_tokens(ct)) code_terms.insert(t.text);
    std::map<std::string, double> qw;
    for (const auto& t : oracle_tokens(q.text))
        qw[t.text] += code_terms.count(t.text) ? p.weight_code : 1.0;

    const double n = (double)store.entries.size();
    double total = 0;
    for (const auto& [tok, weight] : qw) {
        auto it = tf.find(tok);
        if (it == tf.end()) continue;
        const double f = it->second;
        const double df = df_of(tok);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double denom = f + p.k1 * (1.0 - p.b + p.b * dl / avgdl);
        total += weight * idf * f * (p.k1 + 1.0) / denom;
    }
    if (q.version_pair && q.version_pair->first == entry.source_version &&
        q.version_pair->second == entry.target_version)
        total *= p.version_boost;
    return total;
}

} // namespace

TEST_CASE("tokenize keeps member-access chains plus their parts") {
    auto toks = tokenize("msg.sender.transfer(1 ether);");
    auto has = [&](const std::string& t) {
        return std::find(toks.begin(), toks.end(), t) != toks.end();
    };
    CHECK(has("msg.sender.transfer"));
    CHECK(has("msg"));
    CHECK(has("sender"));
    CHECK(has("transfer"));
    CHECK(has("ether"));
    // lowercase
    auto up = tokenize("TypeError Address");
    CHECK(std::find(up.begin(), up.end(), "typeerror") != up.end());
    CHECK(std::find(up.begin(), up.end(), "address") != up.end());
}

TEST_CASE("clean_query keeps the message and flagged line, drops gutters") {
    auto q = clean_query(fig7_diagnostic());
    CHECK(q.text.find("are only available for objects of type \"address "
                      "payable\"") != std::string::npos);
    CHECK(std::find(q.code_tokens.begin(), q.code_tokens.end(), "transfer")
          != q.code_tokens.end());
    CHECK(q.text.find("-->") == std::string::npos);
}

TEST_CASE("clean_query strips every gutter decoration line (regex oracle)") {
    Diagnostic d;
    d.category = ErrorCategory::Type;
    d.message = "TypeError: bad conversion\n"
                "  --> contracts/a.sol:3:5:\n"
                "   |\n"
                "3 |     uint x = now;\n"
                "   |     ^^^\n"
                "  --> contracts/b.sol:9:1:\n"
                "  --> contracts/c.sol:12:7:\n";
    d.source_excerpt = "    uint x = now;";
    auto q = clean_query(d);
    // oracle: no line of the cleaned text may look like decoration
    std::regex decoration(R"(^\s*(-->.*|\|.*|\d+\s*\|.*|\^+\s*)$)");
    std::istringstream is(q.text);
    std::string line;
    while (std::getline(is, line)) {
        CHECK_FALSE(std::regex_match(line, decoration));
    }
    CHECK(q.text.find("bad conversion") != std::string::npos);
}

TEST_CASE("empty excerpt leaves only quoted identifiers as code tokens") {
    Diagnostic d;
    d.category = ErrorCategory::Declaration;
    d.message = "DeclarationError: Undeclared identifier \"player\".";
    auto q = clean_query(d);
    REQUIRE_FALSE(q.code_tokens.empty());
    for (const auto& t : q.code_tokens) CHECK(t == "player");
}

TEST_CASE("weight 1 and boost 1 equal the plain lexical baseline") {
    auto store = make_store({
        make_entry("transfer is restricted to address payable targets", {}),
        make_entry("explicit conversion via payable is required", {{25, 32}}),
        make_entry("integer division truncates toward zero", {}),
    });
    Query q;
    q.text = "transfer is only available for address payable";
    q.code_tokens = {"transfer"};
    ScoreParams plain;
    plain.weight_code = 1.0;
    plain.version_boost = 1.0;
    for (const auto& e : store.entries) {
        // with weighting disabled the code spans must not matter
        auto no_span = e;
        no_span.code_spans.clear();
        CHECK(score(q, e, store, plain)
              == doctest::Approx(score(q, no_span, store, plain)).epsilon(1e-12));
    }
    // version pair present but boost 1: no effect
    Query qv = q;
    qv.version_pair = {{"0.7", "0.8"}};
    CHECK(score(qv, store.entries[0], store, plain)
          == doctest::Approx(score(q, store.entries[0], store, plain)));
}

TEST_CASE("score matches the brute-force oracle to 1e-9") {
    auto store = make_store({
        make_entry("Conversions from address to address payable are now "
                   "possible via payable(x).", {{57, 67}}),
        make_entry("The transfer member moved to address payable only.",
                   {{4, 12}}),
        make_entry("now has been deprecated, use block.timestamp instead.",
                   {{0, 3}, {29, 44}}),
        make_entry("throw is replaced by revert(), require() and assert().",
                   {{0, 5}}),
        make_entry("integer division always truncates", {}),
    });
    std::vector<Query> queries;
    {
        Query q;
        q.text = "transfer only available for address payable";
        q.code_tokens = {"transfer", "msg.sender"};
        queries.push_back(q);
        Query q2;
        q2.text = "undeclared identifier now deprecated block.timestamp";
        q2.code_tokens = {"now"};
        q2.version_pair = {{"0.7", "0.8"}};
        queries.push_back(q2);
        Query q3;
        q3.text = "throw deprecated revert";
        queries.push_back(q3);
    }
    for (const auto& q : queries)
        for (const auto& e : store.entries) {
            ScoreParams p;
            CHECK(score(q, e, store, p)
                  == doctest::Approx(score_oracle(q, e, store, p)).epsilon(1e-9));
            p.weight_code = 1.0;
            p.version_boost = 1.0;
            CHECK(score(q, e, store, p)
                  == doctest::Approx(score_oracle(q, e, store, p)).epsilon(1e-9));
        }
}

TEST_CASE("code weighting ranks the payable(x) entry first") {
    auto store = make_store({
        make_entry("Conversions from address to address payable are now "
                   "possible via payable(x).", {{57, 67}}),
        make_entry("Use address(uint160(literal)) instead of address payable "
                   "literals.", {}),
    });
    Query q;
    q.text = "not implicitly convertible to address payable";
    q.code_tokens = {"payable"};
    ScoreParams p;
    p.weight_code = 2.0;
    auto top = retrieve(q, store, 1, p);
    REQUIRE(top.size() == 1);
    CHECK(top[0].entry_id == store.entries[0].id);
}

TEST_CASE("retrieve basics: single entry, oversized k, tie-break, ranks") {
    auto single = make_store({make_entry("one entry about transfer", {})});
    Query q;
    q.text = "transfer";
    auto r1 = retrieve(q, single, 1);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0].rank == 1);
    CHECK(r1[0].entry_id == single.entries[0].id);

    auto store = make_store({
        make_entry("alpha beta", {}),
        make_entry("gamma delta", {}),
        make_entry("epsilon zeta", {}),
    });
    Query none;
    none.text = "omega"; // matches nothing: all scores tie at 0
    auto all = retrieve(none, store, 10);
    REQUIRE(all.size() == 3);
    for (size_t i = 0; i < all.size(); ++i) CHECK(all[i].rank == (int)(i + 1));
    CHECK(std::is_sorted(all.begin(), all.end(),
                         [](const auto& a, const auto& b) {
                             return a.entry_id < b.entry_id;
                         }));
    CHECK_THROWS_AS(retrieve(q, KnowledgeStore{}, 1), EmptyStore);
}

TEST_CASE("retrieve(k) is a prefix of retrieve(k+1)") {
    auto store = make_store({
        make_entry("transfer to payable address", {{12, 27}}),
        make_entry("payable conversion payable(x)", {{19, 29}}),
        make_entry("timestamp replaces now", {}),
        make_entry("revert replaces throw", {}),
        make_entry("abi coder v2 default", {}),
    });
    Query q;
    q.text = "transfer payable conversion";
    q.code_tokens = {"payable"};
    for (int k = 1; k < (int)store.entries.size(); ++k) {
        auto a = retrieve(q, store, k);
        auto b = retrieve(q, store, k + 1);
        REQUIRE(a.size() <= b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].entry_id == b[i].entry_id);
            CHECK(a[i].rank == b[i].rank);
        }
    }
}

TEST_CASE("acc_at_k arithmetic and monotonicity") {
    // store engineered so the groundtruth for q_far sits at rank 2 or 4
    auto store = make_store({
        make_entry("red red red red", {}),
        make_entry("red red red blue", {}),
        make_entry("red red blue blue", {}),
        make_entry("red blue blue blue", {}),
    });
    Query q;
    q.text = "red";
    // all entries contain "red"; ranking by tf. groundtruths at ranks 2 and 4
    auto full = retrieve(q, store, 4);
    REQUIRE(full.size() == 4);
    std::vector<std::pair<Query, std::string>> eval = {
        {q, full[1].entry_id},
        {q, full[3].entry_id},
    };
    CHECK(acc_at_k(eval, store, 3) == doctest::Approx(50.0));
    CHECK(acc_at_k({{q, full[0].entry_id}}, store, 1) == doctest::Approx(100.0));
    double prev = 0;
    for (int k = 1; k <= 4; ++k) {
        double v = acc_at_k(eval, store, k);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(acc_at_k({{q, "no-such-id"}}, store, 1),
                    UnknownGroundTruth);
}

namespace {

class FixedBackend : public EmbeddingBackend {
public:
    explicit FixedBackend(std::map<std::string, std::vector<double>> by_text,
                          std::vector<double> fallback)
        : by_text_(std::move(by_text)), fallback_(std::move(fallback)) {}
    std::vector<std::vector<double>> embed(
        const std::vector<std::string>& texts) override {
        std::vector<std::vector<double>> out;
        for (const auto& t : texts) {
            auto it = by_text_.find(t);
            out.push_back(it != by_text_.end() ? it->second : fallback_);
        }
        return out;
    }

private:
    std::map<std::string, std::vector<double>> by_text_;
    std::vector<double> fallback_;
};

class DownBackend : public EmbeddingBackend {
public:
    std::vector<std::vector<double>> embed(
        const std::vector<std::string>&) override {
        throw BackendUnavailable("endpoint down");
    }
};

} // namespace

TEST_CASE("identical embedding vectors degenerate to tie-break order") {
    auto store = make_store({
        make_entry("zebra entry", {}),
        make_entry("aardvark entry", {}),
        make_entry("mango entry", {}),
    });
    Query q;
    q.text = "anything";
    FixedBackend backend({}, {1.0, 0.0});
    auto r = embed_backend_retrieve(q, store, 3, backend);
    REQUIRE(r.size() == 3);
    CHECK(std::is_sorted(r.begin(), r.end(), [](const auto& a, const auto& b) {
        return a.entry_id < b.entry_id;
    }));
}

TEST_CASE("one-hot embedding puts the matching entry at rank 1") {
    auto store = make_store({
        make_entry("first entry", {}),
        make_entry("second entry", {}),
    });
    Query q;
    q.text = "wanted";
    FixedBackend backend(
        {{"wanted", {0.0, 1.0}}, {store.entries[1].text, {0.0, 1.0}}},
        {1.0, 0.0});
    auto r = embed_backend_retrieve(q, store, 1, backend);
    REQUIRE(r.size() == 1);
    CHECK(r[0].entry_id == store.entries[1].id);
}

TEST_CASE("backend failure surfaces as BackendUnavailable") {
    auto store = make_store({make_entry("entry", {})});
    Query q;
    q.text = "x";
    DownBackend down;
    CHECK_THROWS_AS(embed_backend_retrieve(q, store, 1, down),
                    BackendUnavailable);
}

TEST_CASE("raising weight_code never demotes a code-span-only match") {
    auto store = make_store({
        make_entry("conversion payable(x) does the trick", {{11, 21}}),
        make_entry("plain prose about conversion rules and trick usage", {}),
    });
    Query q;
    q.text = "conversion trick";
    q.code_tokens = {"payable"};
    int prev_rank = 99;
    for (double w : {1.0, 1.5, 2.0, 3.0, 5.0}) {
        ScoreParams p;
        p.weight_code = w;
        auto r = retrieve(q, store, 2, p);
        int rank = 0;
        for (const auto& res : r)
            if (res.entry_id == store.entries[0].id) rank = res.rank;
        REQUIRE(rank > 0);
        CHECK(rank <= prev_rank);
        prev_rank = rank;
    }
}

TEST_CASE("eval set file loads labeled triples") {
    auto dir = temp_dir("evalset");
    write_file(dir / "eval.jsonl",
               "{\"query\":\"q1\",\"answer\":\"a1\",\"label\":1,"
               "\"groundtruth_id\":\"g1\"}\n"
               "{\"query\":\"q2\",\"answer\":\"a2\",\"label\":0,"
               "\"groundtruth_id\":\"g2\"}\n");
    auto triples = load_eval_set(dir / "eval.jsonl");
    REQUIRE(triples.size() == 2);
    CHECK(triples[0].query == "q1");
    CHECK(triples[0].label == 1);
    CHECK(triples[1].groundtruth_id == "g2");
}
