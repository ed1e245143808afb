"""Cruxes, covers, hereditariness and extension closure over finite structures.

Sets "of size at most k" include the empty set, so 0-cruxes and 0-ary
covers make 0-hereditariness coincide with hereditariness and 0-extension
closure with extension closure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from .errors import EmptyCollection, NotAnExtension, NotASubset, PreconditionFailed
from .logic.semantics import CompiledFormula
from .logic.syntax import Formula, Not, atom, disj, eq, exists, forall
from .structures import (
    Structure,
    _lex_subsets,
    enumerate_substructures,
    induced_substructure,
    is_extension,
)

StructurePredicate = Callable[[Structure], bool]


@dataclass
class CruxReport:
    structure: Structure
    k: int
    cruxes: List[frozenset]
    exhaustive: bool = True


@dataclass
class PropertyVerdict:
    """``counterexample`` is present exactly when ``holds`` is false."""

    holds: bool
    counterexample: Optional[tuple] = None
    checked: int = 0
    detail: str = ""

    def __bool__(self):
        return self.holds


def _sat(S: Structure, f: Formula) -> bool:
    return CompiledFormula(S, f)()


def _small_subsets(elements: Sequence[int], k: int):
    for size in range(0, min(k, len(elements)) + 1):
        for combo in itertools.combinations(elements, size):
            yield frozenset(combo)


def is_crux(
    S: Structure,
    C: Iterable[int],
    f: Formula,
    k: int,
    family: Optional[StructurePredicate] = None,
) -> bool:
    """Is ``C`` a k-crux of ``S`` for ``f``?

    Every induced substructure containing ``C`` (and passing ``family``,
    when given) must satisfy ``f``.
    """
    C = frozenset(C)
    if not C <= S.universe:
        raise NotASubset(f"{sorted(C - S.universe)} not in the universe")
    if not _sat(S, f):
        raise PreconditionFailed("the structure does not satisfy the formula")
    if len(C) > k:
        return False
    for subset in _lex_subsets(S.elements, S.pinned | C, None):
        sub = induced_substructure(S, subset)
        if family is not None and not family(sub):
            continue
        if not _sat(sub, f):
            return False
    return True


def _failing_subsets(S: Structure, f: Formula, family=None) -> List[frozenset]:
    bad = []
    for subset in _lex_subsets(S.elements, S.pinned, None):
        sub = induced_substructure(S, subset)
        if family is not None and not family(sub):
            continue
        if not _sat(sub, f):
            bad.append(frozenset(subset))
    return bad


def find_k_cruxes(
    S: Structure, f: Formula, k: int, family: Optional[StructurePredicate] = None
) -> CruxReport:
    """All k-cruxes of ``S``, smallest first, then lexicographic.

    Every substructure is evaluated once; a candidate is a crux iff no
    failing substructure contains it.
    """
    if not _sat(S, f):
        raise PreconditionFailed("the structure does not satisfy the formula")
    bad = _failing_subsets(S, f, family)
    cruxes = [C for C in _small_subsets(S.elements, k) if not any(C <= b for b in bad)]
    return CruxReport(S, k, cruxes, exhaustive=True)


def is_hereditary_over(f: Formula, family: Iterable[Structure]) -> PropertyVerdict:
    checked = 0
    for S in family:
        if not _sat(S, f):
            continue
        for sub in enumerate_substructures(S):
            checked += 1
            if not _sat(sub, f):
                return PropertyVerdict(False, (S, sub), checked)
    return PropertyVerdict(True, None, checked)


def is_k_hereditary_over(f: Formula, family: Iterable[Structure], k: int) -> PropertyVerdict:
    """Every model of ``f`` in ``family`` has a k-crux.

    The crux condition ranges over all induced substructures.
    """
    checked = 0
    for S in family:
        if not _sat(S, f):
            continue
        checked += 1
        if not find_k_cruxes(S, f, k).cruxes:
            return PropertyVerdict(False, (S,), checked, "model without a k-crux")
    return PropertyVerdict(True, None, checked)


def is_k_ary_cover(host: Structure, members: Sequence[Structure], k: int) -> bool:
    members = list(members)
    if not members:
        raise EmptyCollection("a cover needs at least one member")
    for m in members:
        if m.vocab != host.vocab or not is_extension(m, host):
            return False
    universes = [m.universe for m in members]
    return all(
        any(X <= u for u in universes) for X in _small_subsets(host.elements, k)
    )


def is_k_ary_cover_in(
    base: Structure, ext: Structure, members: Sequence[Structure], k: int
) -> bool:
    """Do ``members`` (substructures of ``ext``) cover the small subsets of ``base``?"""
    if not is_extension(base, ext):
        raise NotAnExtension("base is not an induced substructure of ext")
    members = list(members)
    if not members:
        raise EmptyCollection("a cover needs at least one member")
    for m in members:
        if m.vocab != ext.vocab or not is_extension(m, ext):
            return False
    universes = [m.universe for m in members]
    return all(
        any(X <= u for u in universes) for X in _small_subsets(base.elements, k)
    )


def is_k_extension_closed_over(
    f: Formula,
    family: Iterable[Structure],
    k: int,
    within: Optional[StructurePredicate] = None,
) -> PropertyVerdict:
    """Any host covered by its own ``f``-satisfying substructures satisfies ``f``.

    Cover members are the induced substructures of each host that satisfy
    ``f`` (and ``within``, when given).
    """
    checked = 0
    for A in family:
        checked += 1
        if _sat(A, f):
            continue
        members = []
        for sub in enumerate_substructures(A):
            if within is not None and not within(sub):
                continue
            if _sat(sub, f):
                members.append(sub)
        if members and is_k_ary_cover(A, members, k):
            return PropertyVerdict(False, (A, members), checked, "covered non-model")
    return PropertyVerdict(True, None, checked)


def check_duality(f: Formula, family: Iterable[Structure], k: int) -> PropertyVerdict:
    """``f`` is k-hereditary over the family iff ``¬f`` is k-extension closed over it."""
    family = list(family)
    here = is_k_hereditary_over(f, family, k)
    ext = is_k_extension_closed_over(Not(f), family, k)
    if here.holds == ext.holds:
        return PropertyVerdict(
            True,
            None,
            here.checked + ext.checked,
            f"k-hereditary={here.holds}, complement k-extension-closed={ext.holds}",
        )
    return PropertyVerdict(
        False,
        (here, ext),
        here.checked + ext.checked,
        f"k-hereditary={here.holds} but complement k-extension-closed={ext.holds}",
    )


def dominating_set_sentence(k: int) -> Formula:
    """``∃x1..∃xk ∀y OR_i (y = xi | E(y, xi))`` over ``{E/2}``.

    For ``k = 0`` the empty disjunction is falsum, written ``!(y = y)``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return forall("y", Not(eq("y", "y")))
    xs = [f"x{i}" for i in range(1, k + 1)]
    body = disj(eq("y", x) | atom("E", "y", x) for x in xs)
    return exists(xs, forall("y", body))


def dominating_witnesses(G: Structure, k: int) -> List[Tuple[int, ...]]:
    """All ``k``-tuples witnessing the existential block of the sentence."""
    if k == 0:
        return []
    E = G.relations["E"]
    out = []
    for xs in itertools.product(G.elements, repeat=k):
        if all(any(y == x or (y, x) in E for x in xs) for y in G.elements):
            out.append(xs)
    return out


def is_hereditary_over_lattice(f: Formula, host: Structure) -> PropertyVerdict:
    """Hereditariness of ``f`` over all induced substructures of ``host``.

    Each substructure is evaluated once; the models are downward closed iff
    no model loses the property by dropping one unpinned element.
    """
    verdicts = {}
    for subset in _lex_subsets(host.elements, host.pinned, None):
        verdicts[frozenset(subset)] = _sat(induced_substructure(host, subset), f)
    for subset, ok in verdicts.items():
        if not ok:
            continue
        for x in sorted(subset - host.pinned):
            smaller = subset - {x}
            if smaller and not verdicts[smaller]:
                sup = induced_substructure(host, subset)
                return PropertyVerdict(
                    False, (sup, induced_substructure(host, smaller)), len(verdicts)
                )
    return PropertyVerdict(True, None, len(verdicts))
