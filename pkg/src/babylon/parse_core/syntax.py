"""Token-granular syntax templates and their derivation from log templates."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from babylon import kernels
from babylon.errors import AlignmentError

PLACEHOLDER = "<*>"


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class Wildcard:
    """Matches any single token.

    ``pattern`` keeps the template fragment when a placeholder sat inside a
    token (``size=<*>``); strict matching then requires the token to fit it.
    """

    pattern: str | None = None


WILDCARD = Wildcard()
Token = Union[Literal, Wildcard]


@lru_cache(maxsize=4096)
def fragment_regex(fragment: str) -> re.Pattern:
    parts = fragment.split(PLACEHOLDER)
    return re.compile(".*".join(re.escape(p) for p in parts), re.DOTALL)


@dataclass(frozen=True)
class SyntaxTemplate:
    tokens: tuple[Token, ...]

    @property
    def arity(self) -> int:
        return len(self.tokens)

    @property
    def mask(self) -> tuple[str | None, ...]:
        """Literal text per position, ``None`` for wildcards."""
        m = self.__dict__.get("_mask")
        if m is None:
            m = tuple(t.text if isinstance(t, Literal) else None for t in self.tokens)
            object.__setattr__(self, "_mask", m)
        return m

    @property
    def literal_count(self) -> int:
        return sum(1 for t in self.tokens if isinstance(t, Literal))

    def loose_matches(self, tokens: Sequence[str]) -> bool:
        return kernels.loose_match(self.mask, tokens)

    def matches(self, tokens: Sequence[str]) -> bool:
        """Strict match: literals equal and every patterned wildcard fits."""
        if not kernels.loose_match(self.mask, tokens):
            return False
        for tok, raw in zip(self.tokens, tokens):
            if isinstance(tok, Wildcard) and tok.pattern is not None:
                if not fragment_regex(tok.pattern).fullmatch(raw):
                    return False
        return True

    def overlap(self, tokens: Sequence[str]) -> int:
        return kernels.literal_overlap(self.mask, tokens)

    @classmethod
    def from_mask(cls, mask: Sequence[str | None]) -> "SyntaxTemplate":
        return cls(tuple(WILDCARD if m is None else Literal(m) for m in mask))

    def to_json(self):
        out = []
        for t in self.tokens:
            if isinstance(t, Literal):
                out.append(t.text)
            elif t.pattern is None:
                out.append(None)
            else:
                out.append({"pattern": t.pattern})
        return out

    @classmethod
    def from_json(cls, items) -> "SyntaxTemplate":
        toks = []
        for item in items:
            if item is None:
                toks.append(WILDCARD)
            elif isinstance(item, dict):
                toks.append(Wildcard(item["pattern"]))
            else:
                toks.append(Literal(item))
        return cls(tuple(toks))

    def __str__(self):
        return " ".join(render_token(t) for t in self.tokens)


def render_token(tok: Token) -> str:
    if isinstance(tok, Literal):
        return tok.text
    return tok.pattern or PLACEHOLDER


def render_template(tokens: Sequence[Token]) -> str:
    """Template text for a token mask; runs of plain wildcards collapse to one."""
    out: list[str] = []
    for tok in tokens:
        text = render_token(tok)
        if text == PLACEHOLDER and out and out[-1] == PLACEHOLDER:
            continue
        out.append(text)
    return " ".join(out)


def canonical(text: str) -> str:
    return " ".join(text.split())


_LIT, _VAR, _MIXED = 0, 1, 2


def _classify(piece: str) -> int:
    if PLACEHOLDER not in piece:
        return _LIT
    if not piece.replace(PLACEHOLDER, ""):
        return _VAR
    return _MIXED


def derive_syntax_template(template: str, tokens: Sequence[str]) -> SyntaxTemplate:
    """Align a log template against concrete tokens.

    Each placeholder consumes the fewest whole tokens (at least one) that still
    lets the rest of the template align; backtracks otherwise. A token that
    mixes literal text and a placeholder becomes a patterned wildcard.
    """
    pieces = template.split()
    if not pieces:
        raise AlignmentError("template is blank")
    kinds = [_classify(p) for p in pieces]
    n, m = len(pieces), len(tokens)
    failed: set[tuple[int, int]] = set()

    def solve(i: int, j: int):
        if i == n:
            return [] if j == m else None
        if (i, j) in failed:
            return None
        remaining = n - i - 1
        kind = kinds[i]
        if kind == _LIT:
            if j < m and tokens[j] == pieces[i]:
                rest = solve(i + 1, j + 1)
                if rest is not None:
                    return [Literal(pieces[i])] + rest
        else:
            regex = fragment_regex(pieces[i]) if kind == _MIXED else None
            for k in range(1, m - j - remaining + 1):
                if regex is not None and not regex.fullmatch(" ".join(tokens[j:j + k])):
                    continue
                rest = solve(i + 1, j + k)
                if rest is not None:
                    if kind == _MIXED and k == 1:
                        head = [Wildcard(pieces[i])]
                    else:
                        head = [WILDCARD] * k
                    return head + rest
        failed.add((i, j))
        return None

    result = solve(0, 0)
    if result is None:
        raise AlignmentError(f"template {template!r} does not align with {len(tokens)} tokens")
    return SyntaxTemplate(tuple(result))


def aligns(template: str, tokens: Sequence[str]) -> bool:
    try:
        derive_syntax_template(template, tokens)
    except AlignmentError:
        return False
    return True
