"""Prefix tree, clusters and template pool."""

from babylon.parse_core.state import (
    NO_MATCH,
    LogCluster,
    Loose,
    MatchResult,
    NoMatch,
    ParserState,
    Strict,
    audit_consistency,
    check_merge,
    classify_candidates,
    find_loose_matches,
    search,
)
from babylon.parse_core.syntax import (
    PLACEHOLDER,
    WILDCARD,
    Literal,
    SyntaxTemplate,
    Wildcard,
    aligns,
    canonical,
    derive_syntax_template,
    render_template,
)
from babylon.parse_core.tree import Node, ParseTree, update_tree

__all__ = [
    "NO_MATCH", "PLACEHOLDER", "WILDCARD", "Literal", "LogCluster", "Loose", "MatchResult", "NoMatch",
    "Node", "ParseTree", "ParserState", "Strict", "SyntaxTemplate", "Wildcard", "aligns",
    "audit_consistency", "canonical", "check_merge", "classify_candidates", "derive_syntax_template",
    "find_loose_matches", "render_template", "search", "update_tree",
]
