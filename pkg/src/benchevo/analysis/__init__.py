"""Lineage similarity, attribution aggregation, and result tables."""

from .codebleu import (
    CodeBleuScore,
    SimilarityMatrix,
    TokenSeq,
    ast_subtrees,
    codebleu,
    dataflow_items,
    ngram_precision,
    similarity_matrix,
    tokenize_source,
)
from .relevance import (
    AllZeroMatrix,
    EmptyComponent,
    RelevanceMatrix,
    aggregate_relevance,
    column_normalized,
    component_relevance,
    load_relevance,
)
from .reporting import (
    EmptyResults,
    ReportTable,
    competition_ranks,
    failure_rate,
    report_table,
)

__all__ = [
    "AllZeroMatrix",
    "CodeBleuScore",
    "EmptyComponent",
    "EmptyResults",
    "RelevanceMatrix",
    "ReportTable",
    "SimilarityMatrix",
    "TokenSeq",
    "aggregate_relevance",
    "ast_subtrees",
    "codebleu",
    "column_normalized",
    "competition_ranks",
    "component_relevance",
    "dataflow_items",
    "failure_rate",
    "load_relevance",
    "ngram_precision",
    "report_table",
    "similarity_matrix",
    "tokenize_source",
]
