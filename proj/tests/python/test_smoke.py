import json
import os
import pathlib

import pytest

import _solfix as solfix

FIXTURES = pathlib.Path(os.environ["SOLFIX_FIXTURES_DIR"])
SOLCSIM = os.environ["SOLFIX_SOLCSIM_PATH"]


@pytest.fixture()
def sim_table(tmp_path):
    table = tmp_path / "compilers.json"
    versions = {v: f"{SOLCSIM} --lang-version {v}"
                for v in ["0.4", "0.5", "0.6", "0.7", "0.8"]}
    table.write_text(json.dumps(versions))
    return table


def test_classify():
    assert solfix.classify("TypeError: bad cast") == "Type"
    assert solfix.classify("ParserError: expected ;") == "Parser"
    assert solfix.classify("ImportError: not found") == "IoError"
    assert solfix.classify("something else") == "Other"


def test_parse_diagnostics():
    raw = ('TypeError: "send" and "transfer" are only available for objects '
           'of type "address payable", not "address".\n'
           "  --> contracts/3.sol:27:9:\n"
           "   |\n"
           "27 |         msg.sender.transfer(x);\n"
           "   |         ^^^^^^^^^^^^^^^^^^^\n")
    diags = solfix.parse_diagnostics(raw)
    assert len(diags) == 1
    assert diags[0]["category"] == "Type"
    assert diags[0]["file"] == "contracts/3.sol"
    assert diags[0]["line"] == 27
    assert diags[0]["column"] == 9


def test_slice_source():
    source = (FIXTURES / "contracts" / "large.sol").read_text()
    result = solfix.slice_source(
        source, 'TypeError: "transfer" is unavailable for "wallet".', 71)
    assert result["covers_error_line"]
    text = "\n".join(s["text"] for s in result["snippets"])
    assert "wallet" in text
    assert "unrelated" not in text


def test_ingest_html():
    html = (FIXTURES / "kb" / "0.7_to_0.8.html").read_text()
    entries = solfix.ingest_html(html, "0.7", "0.8")
    assert len(entries) == 10
    assert any("payable(" in e["text"] for e in entries)
    assert all(e["source_version"] == "0.7" for e in entries)


def test_apply_patch():
    source = "line one\nline two\n"
    raw = ("<<<<<<< SEARCH\nline two\n=======\nline 2\n>>>>>>> REPLACE\n")
    assert solfix.apply_patch(source, raw) == "line one\nline 2\n"
    with pytest.raises(solfix.SolfixError):
        solfix.apply_patch(source, "no blocks here")


def test_build_prompt():
    source = (FIXTURES / "contracts" / "fig1.sol").read_text()
    prompt = solfix.build_prompt(
        source, "ParserError: Source file requires different compiler version", 1)
    assert "[Task description]" in prompt
    assert "[Error message]" in prompt
    assert "<<<<<<< SEARCH" in prompt


def test_metrics():
    assert solfix.bleu4("a b c d e", "a b c d e") == pytest.approx(1.0)
    assert solfix.edit_similarity("abc", "abd") == pytest.approx(2 / 3)
    assert solfix.levenshtein_distance("kitten", "sitting") == 3
    assert "msg.sender" in solfix.tokenize("msg.sender")
    assert solfix.bleu_tokenize("A, b") == ["a", ",", "b"]


def test_repair_file(tmp_path, sim_table):
    source = (FIXTURES / "contracts" / "fig1.sol").read_text()
    report = json.loads(solfix.repair_file(
        source,
        target_version="0.8",
        compiler_table_path=str(sim_table),
        kb_path="",
        transcript_path=str(FIXTURES / "transcripts" / "fig1.jsonl"),
        workdir=str(tmp_path / "wd"),
        no_retrieval=True,
    ))
    assert report["status"] == "fixed"
    assert "payable(msg.sender)" in report["final_source"]
