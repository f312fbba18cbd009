"""Phrase-based SMT with pivot-language strategies (cascade, pseudo-corpus, triangulation)."""

from ._core import (
    LanguageModel,
    PhraseTable,
    PivotSmtError,
    TranslationSystem,
    align_corpus,
    bleu,
    bootstrap,
    build_phrase_table,
    extract_phrases,
    make_fixture,
    mbr_combine,
    mbr_select,
    rquantity,
    run,
    sentence_bleu,
    tokenize,
    train_ibm1,
    triangulate,
)

__all__ = [
    "LanguageModel",
    "PhraseTable",
    "PivotSmtError",
    "TranslationSystem",
    "align_corpus",
    "bleu",
    "bootstrap",
    "build_phrase_table",
    "extract_phrases",
    "make_fixture",
    "mbr_combine",
    "mbr_select",
    "rquantity",
    "run",
    "sentence_bleu",
    "tokenize",
    "train_ibm1",
    "triangulate",
]
