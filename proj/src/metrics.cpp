#include "solfix/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace solfix {

namespace {

using nlohmann::json;

constexpr double kBleuEpsilon = 1e-9;

std::map<std::vector<std::string>, int> ngram_counts(
    const std::vector<std::string>& tokens, size_t n) {
    std::map<std::vector<std::string>, int> counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
        ++counts[std::move(gram)];
    }
    return counts;
}

ErrorCategory category_from_string(const std::string& name) {
    if (name == "Parser") return ErrorCategory::Parser;
    if (name == "Declaration") return ErrorCategory::Declaration;
    if (name == "Syntax") return ErrorCategory::Syntax;
    if (name == "Type") return ErrorCategory::Type;
    if (name == "JsonError") return ErrorCategory::JsonError;
    if (name == "IoError") return ErrorCategory::IoError;
    return ErrorCategory::Other;
}

} // namespace

std::vector<std::string> bleu_tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
            if (!std::isspace(c)) tokens.push_back(std::string(1, raw));
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

double bleu4(const std::string& candidate, const std::string& reference) {
    const auto cand = bleu_tokenize(candidate);
    const auto ref = bleu_tokenize(reference);
    if (cand.empty() || ref.empty())
        throw EmptyText("bleu4 requires non-empty texts after tokenization");

    double log_sum = 0.0;
    for (size_t n = 1; n <= 4; ++n) {
        const auto cand_counts = ngram_counts(cand, n);
        const auto ref_counts = ngram_counts(ref, n);
        long matched = 0;
        long total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end())
                matched += std::min<long>(count, it->second);
        }
        double precision;
        if (total == 0 || matched == 0)
            precision = kBleuEpsilon;
        else
            precision = static_cast<double>(matched) / static_cast<double>(total);
        log_sum += std::log(precision);
    }
    const double geo_mean = std::exp(log_sum / 4.0);

    double bp = 1.0;
    if (cand.size() < ref.size())
        bp = std::exp(1.0 - static_cast<double>(ref.size()) /
                                static_cast<double>(cand.size()));
    return bp * geo_mean;
}

size_t levenshtein_distance(const std::string& a, const std::string& b) {
    const size_t n = a.size();
    const size_t m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> prev(m + 1);
    std::vector<size_t> curr(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        curr[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            const size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

double edit_similarity(const std::string& candidate, const std::string& reference) {
    if (candidate.empty() && reference.empty()) return 1.0;
    const size_t longest = std::max(candidate.size(), reference.size());
    const size_t dist = levenshtein_distance(candidate, reference);
    return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

double pass_rate(const std::vector<RepairReport>& reports) {
    if (reports.empty()) throw EmptyInput("pass_rate over zero reports");
    int fixed = 0;
    for (const auto& r : reports)
        if (r.status == RepairStatus::Fixed) ++fixed;
    return 100.0 * static_cast<double>(fixed) /
           static_cast<double>(reports.size());
}

EvalSummary evaluate(const std::vector<DatasetInstance>& dataset,
                     const std::vector<RepairReport>& reports) {
    if (dataset.empty()) throw EmptyInput("evaluate over zero instances");
    if (dataset.size() != reports.size())
        throw LengthMismatch("dataset has " + std::to_string(dataset.size()) +
                             " instances but " + std::to_string(reports.size()) +
                             " reports");

    struct Acc {
        int count = 0;
        int fixed = 0;
        double bleu_sum = 0.0;
        double es_sum = 0.0;
    };
    std::map<std::string, Acc> by_category;
    Acc all;
    Acc fixed_only;

    for (size_t i = 0; i < dataset.size(); ++i) {
        const auto& inst = dataset[i];
        const auto& report = reports[i];
        const bool is_fixed = report.status == RepairStatus::Fixed;
        // degenerate empty texts score 0 rather than aborting the batch
        const bool scorable = !bleu_tokenize(report.final_source).empty() &&
                              !bleu_tokenize(inst.groundtruth_patch).empty();
        const double b =
            scorable ? bleu4(report.final_source, inst.groundtruth_patch) : 0.0;
        const double e = edit_similarity(report.final_source,
                                         inst.groundtruth_patch);

        auto& cat = by_category[to_string(inst.error_category)];
        for (Acc* acc : {&cat, &all}) {
            ++acc->count;
            if (is_fixed) ++acc->fixed;
            acc->bleu_sum += b;
            acc->es_sum += e;
        }
        if (is_fixed) {
            ++fixed_only.count;
            ++fixed_only.fixed;
            fixed_only.bleu_sum += b;
            fixed_only.es_sum += e;
        }
    }

    auto to_row = [](const Acc& acc) {
        MetricRow row;
        row.count = acc.count;
        if (acc.count > 0) {
            row.pass_rate = 100.0 * acc.fixed / acc.count;
            row.bleu4 = acc.bleu_sum / acc.count;
            row.es = acc.es_sum / acc.count;
        }
        return row;
    };

    EvalSummary summary;
    for (const auto& [name, acc] : by_category)
        summary.per_category[name] = to_row(acc);
    summary.average = to_row(all);
    summary.average_fixed_only = to_row(fixed_only);
    summary.fixed_count = all.fixed;
    return summary;
}

namespace {

json row_to_json(const MetricRow& row) {
    return {{"count", row.count},
            {"pass_rate", row.pass_rate},
            {"bleu4", row.bleu4},
            {"es", row.es}};
}

} // namespace

std::string summary_to_json(const EvalSummary& s) {
    json j;
    json cats = json::object();
    for (const auto& [name, row] : s.per_category)
        cats[name] = row_to_json(row);
    j["per_category"] = cats;
    j["average"] = row_to_json(s.average);
    j["average_fixed_only"] = row_to_json(s.average_fixed_only);
    j["fixed_count"] = s.fixed_count;
    return j.dump(2);
}

std::string summary_to_table(const EvalSummary& s) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    auto line = [&](const std::string& name, const MetricRow& row) {
        os << name;
        for (size_t pad = name.size(); pad < 14; ++pad) os << ' ';
        os << row.count << '\t' << row.pass_rate << '\t' << row.bleu4 << '\t'
           << row.es << '\n';
    };
    os << "category      count\tpass_rate\tbleu4\tes\n";
    for (const auto& [name, row] : s.per_category) line(name, row);
    line("average", s.average);
    line("fixed_only", s.average_fixed_only);
    return os.str();
}

std::vector<DatasetInstance> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open dataset: " + path.string());
    std::vector<DatasetInstance> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            DatasetInstance inst;
            inst.breaking_change_id = j.at("breaking_change_id").get<std::string>();
            inst.source_version = j.at("source_version").get<std::string>();
            inst.target_version = j.at("target_version").get<std::string>();
            inst.error_contract = j.at("error_contract").get<std::string>();
            inst.groundtruth_patch = j.at("groundtruth_patch").get<std::string>();
            inst.error_category =
                category_from_string(j.at("error_category").get<std::string>());
            if (j.contains("transcript") && !j["transcript"].is_null())
                inst.transcript = j["transcript"].get<std::string>();
            out.push_back(std::move(inst));
        } catch (const json::exception& e) {
            throw IoFailure("bad dataset line " + std::to_string(lineno) +
                            " in " + path.string() + ": " + e.what());
        }
    }
    return out;
}

void save_dataset(const std::vector<DatasetInstance>& dataset,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot write dataset: " + path.string());
    for (const auto& inst : dataset) {
        json j;
        j["breaking_change_id"] = inst.breaking_change_id;
        j["source_version"] = inst.source_version;
        j["target_version"] = inst.target_version;
        j["error_contract"] = inst.error_contract;
        j["groundtruth_patch"] = inst.groundtruth_patch;
        j["error_category"] = to_string(inst.error_category);
        if (!inst.transcript.empty()) j["transcript"] = inst.transcript;
        out << j.dump() << '\n';
    }
}

} // namespace solfix
