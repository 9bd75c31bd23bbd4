#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "solfix/compiler.hpp"
#include "solfix/knowledge.hpp"
#include "solfix/llm.hpp"
#include "solfix/metrics.hpp"
#include "solfix/orchestrator.hpp"
#include "solfix/patch.hpp"
#include "solfix/prompting.hpp"
#include "solfix/retriever.hpp"
#include "solfix/slicer.hpp"

namespace py = pybind11;
using namespace solfix;

namespace {

py::dict diagnostic_to_dict(const Diagnostic& d) {
    py::dict out;
    out["category"] = to_string(d.category);
    out["message"] = d.message;
    out["file"] = d.file;
    if (d.location) {
        out["line"] = d.location->line;
        out["column"] = d.location->column;
    }
    out["source_excerpt"] = d.source_excerpt;
    return out;
}

Diagnostic synthetic_diagnostic(const std::string& message,
                                const std::string& file, int line, int column) {
    Diagnostic d;
    d.category = classify(message);
    d.message = message;
    d.file = file;
    if (line > 0) d.location = SourceLocation{line, column};
    return d;
}

} // namespace

PYBIND11_MODULE(_solfix, m) {
    m.doc() = "Solidity version-migration repair toolkit";

    py::register_exception<Error>(m, "SolfixError");

    m.def("classify", [](const std::string& message) {
        return to_string(classify(message));
    });

    m.def("parse_diagnostics", [](const std::string& raw) {
        py::list out;
        for (const auto& d : parse_diagnostics(raw))
            out.append(diagnostic_to_dict(d));
        return out;
    });

    m.def(
        "slice_source",
        [](const std::string& source, const std::string& message,
           int line, int column) {
            const Diagnostic diag =
                synthetic_diagnostic(message, "contract.sol", line, column);
            CodeSlice result;
            try {
                auto root = parse_structure(source);
                result = slice(*root, source, diag);
            } catch (const ParseFailure&) {
                result = whole_file_slice(source, diag);
            }
            py::list snippets;
            for (const auto& s : result.snippets) {
                py::dict d;
                d["start_line"] = s.span.start_line;
                d["end_line"] = s.span.end_line;
                d["text"] = s.text;
                snippets.append(d);
            }
            py::dict out;
            out["snippets"] = snippets;
            out["error_keywords"] = result.error_keywords;
            out["covers_error_line"] = result.covers_error_line;
            return out;
        },
        py::arg("source"), py::arg("message"), py::arg("line"),
        py::arg("column") = 1);

    m.def("ingest_html", [](const std::string& html, const std::string& src,
                            const std::string& dst) {
        py::list out;
        for (const auto& e : ingest_html(html, src, dst)) {
            py::dict d;
            d["id"] = e.id;
            d["source_version"] = e.source_version;
            d["target_version"] = e.target_version;
            d["text"] = e.text;
            py::list spans;
            for (const auto& s : e.code_spans)
                spans.append(py::make_tuple(s.start, s.end));
            d["code_spans"] = spans;
            out.append(d);
        }
        return out;
    });

    m.def(
        "retrieve",
        [](const std::string& kb_path, const std::string& error_text, int k,
           double weight_code, double version_boost) {
            const KnowledgeStore store = load(kb_path);
            Diagnostic diag;
            auto diags = parse_diagnostics(error_text);
            if (!diags.empty())
                diag = diags.front();
            else {
                diag.message = error_text;
                diag.category = classify(error_text);
            }
            ScoreParams params;
            params.weight_code = weight_code;
            params.version_boost = version_boost;
            py::list out;
            for (const auto& r : retrieve(clean_query(diag), store, k, params)) {
                py::dict d;
                d["entry_id"] = r.entry_id;
                d["score"] = r.score;
                d["rank"] = r.rank;
                out.append(d);
            }
            return out;
        },
        py::arg("kb_path"), py::arg("error_text"), py::arg("k") = 5,
        py::arg("weight_code") = 2.0, py::arg("version_boost") = 1.5);

    m.def("apply_patch", [](const std::string& source, const std::string& raw) {
        const PatchSet patch = parse_patch(raw);
        try {
            return apply(patch, source);
        } catch (const SearchNotFound&) {
            return apply_fallback_whitespace(patch, source);
        }
    });

    m.def(
        "build_prompt",
        [](const std::string& source, const std::string& message, int line,
           const std::string& granularity, const std::string& source_version,
           const std::string& target_version) {
            const Diagnostic diag =
                synthetic_diagnostic(message, "contract.sol", line, 1);
            CodeSlice code_slice;
            try {
                auto root = parse_structure(source);
                code_slice = slice(*root, source, diag);
            } catch (const ParseFailure&) {
                code_slice = whole_file_slice(source, diag);
            }
            const Granularity g = granularity_from_string(granularity);
            std::optional<Diagnostic> d;
            if (g != Granularity::General) d = diag;
            return build_prompt(g, code_slice, d, {},
                                {source_version, target_version})
                .rendered;
        },
        py::arg("source"), py::arg("message"), py::arg("line"),
        py::arg("granularity") = "coarse", py::arg("source_version") = "0.4",
        py::arg("target_version") = "0.8");

    m.def(
        "repair_file",
        [](const std::string& source, const std::string& target_version,
           const std::string& compiler_table_path, const std::string& kb_path,
           const std::string& transcript_path, const std::string& workdir,
           int max_iterations, bool no_slicing, bool no_retrieval) {
            const CompilerTable table =
                CompilerTable::resolve(compiler_table_path);
            KnowledgeStore store;
            RepairConfig cfg;
            cfg.max_iterations = max_iterations;
            cfg.target_version = target_version;
            cfg.ablation_no_slicing = no_slicing;
            cfg.ablation_no_retrieval = no_retrieval;
            if (!no_retrieval && !kb_path.empty()) store = load(kb_path);
            MockProvider provider(load_transcript(transcript_path));
            RepairDeps deps;
            deps.compiler_table = &table;
            deps.store = store.entries.empty() ? nullptr : &store;
            deps.provider = &provider;
            deps.workdir = workdir;
            return report_to_json(repair(source, cfg, deps));
        },
        py::arg("source"), py::arg("target_version"),
        py::arg("compiler_table_path"), py::arg("kb_path"),
        py::arg("transcript_path"), py::arg("workdir"),
        py::arg("max_iterations") = 5, py::arg("no_slicing") = false,
        py::arg("no_retrieval") = false);

    m.def("bleu4", &bleu4);
    m.def("edit_similarity", &edit_similarity);
    m.def("levenshtein_distance", [](const std::string& a, const std::string& b) {
        return levenshtein_distance(a, b);
    });
    m.def("tokenize", &tokenize);
    m.def("bleu_tokenize", &bleu_tokenize);
}
