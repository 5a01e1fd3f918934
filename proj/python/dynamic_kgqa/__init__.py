"""Build question answering datasets from knowledge graph subgraphs."""

from ._core import (
    ConfigError,
    DegenerateTableError,
    Error,
    KnowledgeGraph,
    chi_square,
    chi_square_sf,
    config_keys,
    consistency,
    cramers_v,
    generate,
    mehlhorn_steiner,
    normalize_label,
    normalize_question,
    question_jaccard,
    read_variant,
    regularized_gamma_q,
    variant,
)

__all__ = [
    "ConfigError",
    "DegenerateTableError",
    "Error",
    "KnowledgeGraph",
    "chi_square",
    "chi_square_sf",
    "config_keys",
    "consistency",
    "cramers_v",
    "generate",
    "mehlhorn_steiner",
    "normalize_label",
    "normalize_question",
    "question_jaccard",
    "read_variant",
    "regularized_gamma_q",
    "variant",
]
