"""Rectification, prenex normal form and quantifier-prefix classes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Optional, Set, Tuple

from ..errors import NotASentence
from .syntax import (
    And,
    Atom,
    Binary,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Quantified,
    all_names,
    free_vars,
    is_quantifier_free,
    substitute,
)

EXISTS = "exists"
FORALL = "forall"
_SYMBOL = {EXISTS: "∃", FORALL: "∀"}


def _fresh(base: str, used: Set[str]) -> str:
    if base not in used:
        return base
    for i in itertools.count(1):
        candidate = f"{base}_{i}"
        if candidate not in used:
            return candidate
    raise AssertionError("unreachable")


def rectify(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """Rename bound variables so no variable is bound twice or both free and bound.

    Names in ``reserved`` (e.g. vocabulary constants) are never introduced.
    """
    used = set(free_vars(f)) | set(reserved) | set(all_names(f) - _bound_names(f))
    return _rectify(f, used)


def _bound_names(f):
    from .syntax import subformulas

    return {g.var for g in subformulas(f) if isinstance(g, Quantified)}


def _rectify(f: Formula, used: Set[str]) -> Formula:
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(_rectify(f.body, used))
    if isinstance(f, Binary):
        left = _rectify(f.left, used)
        right = _rectify(f.right, used)
        return type(f)(left, right)
    if isinstance(f, Quantified):
        new = _fresh(f.var, used)
        used.add(new)
        body = f.body if new == f.var else substitute(f.body, f.var, new)
        return type(f)(new, _rectify(body, used))
    raise TypeError(f"not a formula: {f!r}")


def _flip(prefix):
    return [(FORALL if q == EXISTS else EXISTS, v) for q, v in prefix]


def _pull(f: Formula) -> Tuple[List[Tuple[str, str]], Formula]:
    if isinstance(f, (Atom, Eq)):
        return [], f
    if isinstance(f, Not):
        p, m = _pull(f.body)
        return _flip(p), Not(m)
    if isinstance(f, Implies):
        pl, ml = _pull(f.left)
        pr, mr = _pull(f.right)
        return _flip(pl) + pr, Implies(ml, mr)
    if isinstance(f, (And, Or)):
        pl, ml = _pull(f.left)
        pr, mr = _pull(f.right)
        return pl + pr, type(f)(ml, mr)
    if isinstance(f, Exists):
        p, m = _pull(f.body)
        return [(EXISTS, f.var)] + p, m
    if isinstance(f, Forall):
        p, m = _pull(f.body)
        return [(FORALL, f.var)] + p, m
    raise TypeError(f"not a formula: {f!r}")


def split_prenex(f: Formula) -> Tuple[List[Tuple[str, str]], Formula]:
    """Peel leading quantifiers off ``f`` without transforming anything."""
    prefix = []
    while isinstance(f, Quantified):
        prefix.append((EXISTS if isinstance(f, Exists) else FORALL, f.var))
        f = f.body
    return prefix, f


def build_prenex(prefix, matrix: Formula) -> Formula:
    for q, v in reversed(list(prefix)):
        matrix = (Exists if q == EXISTS else Forall)(v, matrix)
    return matrix


def to_prenex(f: Formula, reserved: Iterable[str] = ()) -> Formula:
    """An equivalent formula with every quantifier outermost.

    Quantifiers are hoisted left to right, outermost first; an implication's
    antecedent contributes its prefix dualized.
    """
    prefix, matrix = _pull(rectify(f, reserved))
    return build_prenex(prefix, matrix)


def is_prenex(f: Formula) -> bool:
    _, matrix = split_prenex(f)
    return is_quantifier_free(matrix)


@dataclass(frozen=True)
class PrefixClass:
    """Quantifier blocks ``((kind, count), ...)`` read left to right."""

    blocks: Tuple[Tuple[str, int], ...]
    matrix_quantifier_free: bool = True

    @classmethod
    def from_prefix(cls, prefix, matrix_quantifier_free=True) -> "PrefixClass":
        blocks = []
        for q, _ in prefix:
            if blocks and blocks[-1][0] == q:
                blocks[-1] = (q, blocks[-1][1] + 1)
            else:
                blocks.append((q, 1))
        return cls(tuple(blocks), matrix_quantifier_free)

    def __str__(self):
        if not self.blocks:
            return "quantifier-free"
        return "".join(f"{_SYMBOL[q]}^{c}" for q, c in self.blocks)

    @property
    def alternations(self) -> int:
        return max(0, len(self.blocks) - 1)

    def count(self, kind: str) -> int:
        return sum(c for q, c in self.blocks if q == kind)

    @property
    def leading_existentials(self) -> int:
        if self.blocks and self.blocks[0][0] == EXISTS:
            return self.blocks[0][1]
        return 0

    @property
    def leading_universals(self) -> int:
        if self.blocks and self.blocks[0][0] == FORALL:
            return self.blocks[0][1]
        return 0

    def is_existential(self) -> bool:
        return all(q == EXISTS for q, _ in self.blocks)

    def is_universal(self) -> bool:
        return all(q == FORALL for q, _ in self.blocks)

    def is_ek_forall_star(self, k: int) -> bool:
        """Shape ``∃^j ∀^*`` with ``j <= k``."""
        return self.leading_existentials <= k and all(
            q == FORALL for q, _ in self.blocks[1 if self.leading_existentials else 0 :]
        )

    def is_fk_exists_star(self, k: int) -> bool:
        """Shape ``∀^j ∃^*`` with ``j <= k``."""
        return self.leading_universals <= k and all(
            q == EXISTS for q, _ in self.blocks[1 if self.leading_universals else 0 :]
        )

    def dual(self) -> "PrefixClass":
        return PrefixClass(
            tuple((FORALL if q == EXISTS else EXISTS, c) for q, c in self.blocks),
            self.matrix_quantifier_free,
        )


def prefix_of(f: Formula) -> PrefixClass:
    """Prefix class of ``f`` as written (``f`` is expected to be prenex)."""
    prefix, matrix = split_prenex(f)
    return PrefixClass.from_prefix(prefix, is_quantifier_free(matrix))


def classify_prefix(f: Formula, reserved: Iterable[str] = ()) -> PrefixClass:
    """Block structure of :func:`to_prenex` applied to the sentence ``f``."""
    if free_vars(f):
        raise NotASentence(f"free variables {sorted(free_vars(f))}")
    return prefix_of(to_prenex(f, reserved))
