from ._solfix import (
    SolfixError,
    apply_patch,
    bleu4,
    bleu_tokenize,
    build_prompt,
    classify,
    edit_similarity,
    ingest_html,
    levenshtein_distance,
    parse_diagnostics,
    repair_file,
    retrieve,
    slice_source,
    tokenize,
)

__all__ = [
    "SolfixError",
    "apply_patch",
    "bleu4",
    "bleu_tokenize",
    "build_prompt",
    "classify",
    "edit_similarity",
    "ingest_html",
    "levenshtein_distance",
    "parse_diagnostics",
    "repair_file",
    "retrieve",
    "slice_source",
    "tokenize",
]
