"""Finite relational structures, induced substructures and partial isomorphisms.

Structures are immutable once built. Universe elements are integers; the
structures of the Los-Tarski counterexample use ``1..N`` throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from .errors import (
    MissingConstant,
    NotASubset,
    SizeLimitExceeded,
    StructureError,
    VocabularyError,
    VocabularyMismatch,
)

Element = int
Row = Tuple[int, ...]

DEFAULT_ISOMORPHISM_LIMIT = 12


@dataclass(frozen=True)
class Vocabulary:
    """Relation symbols with arities plus constant symbols."""

    relations: Tuple[Tuple[str, int], ...] = ()
    constants: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "relations", tuple((str(r), int(a)) for r, a in self.relations))
        object.__setattr__(self, "constants", tuple(str(c) for c in self.constants))
        names = [r for r, _ in self.relations] + list(self.constants)
        if len(set(names)) != len(names):
            raise VocabularyError(f"duplicate symbol names in {names}")
        for name, arity in self.relations:
            if arity < 1:
                raise VocabularyError(f"relation {name} has arity {arity}; arities must be >= 1")

    @property
    def relation_names(self) -> Tuple[str, ...]:
        return tuple(r for r, _ in self.relations)

    def arity(self, name: str) -> int:
        for r, a in self.relations:
            if r == name:
                return a
        raise KeyError(name)

    def has_relation(self, name: str) -> bool:
        return any(r == name for r, _ in self.relations)

    def has_constant(self, name: str) -> bool:
        return name in self.constants


class Structure:
    """A finite structure over a relational vocabulary with constants.

    ``relations`` maps each relation symbol to a set of tuples; unary
    relations are stored as 1-tuples. ``constants`` maps each constant
    symbol to a universe element.
    """

    __slots__ = ("vocab", "universe", "elements", "relations", "constants", "_hash")

    def __init__(
        self,
        vocab: Vocabulary,
        universe: Iterable[Element],
        relations: Optional[Mapping[str, Iterable[Sequence[Element]]]] = None,
        constants: Optional[Mapping[str, Element]] = None,
        *,
        _trusted: bool = False,
    ):
        relations = relations or {}
        constants = constants or {}
        universe = frozenset(universe)
        if _trusted:
            rels = dict(relations)
        else:
            if not universe:
                raise StructureError("universe must be non-empty")
            unknown = set(relations) - set(vocab.relation_names)
            if unknown:
                raise VocabularyError(f"relations {sorted(unknown)} are not in the vocabulary")
            rels = {}
            for name, arity in vocab.relations:
                rows = set()
                for row in relations.get(name, ()):
                    row = (row,) if isinstance(row, int) else tuple(row)
                    if len(row) != arity:
                        raise StructureError(f"tuple {row} in {name} does not have arity {arity}")
                    if not all(e in universe for e in row):
                        raise StructureError(f"tuple {row} in {name} leaves the universe")
                    rows.add(row)
                rels[name] = frozenset(rows)
            for c in vocab.constants:
                if c not in constants:
                    raise StructureError(f"constant {c} is not interpreted")
                if constants[c] not in universe:
                    raise StructureError(f"constant {c} = {constants[c]} is outside the universe")
            extra = set(constants) - set(vocab.constants)
            if extra:
                raise VocabularyError(f"constants {sorted(extra)} are not in the vocabulary")
        self.vocab = vocab
        self.universe = universe
        self.elements = tuple(sorted(universe))
        self.relations = MappingProxyType(rels)
        self.constants = MappingProxyType(dict(constants))
        self._hash = None

    def __len__(self):
        return len(self.universe)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.universe == other.universe
            and dict(self.relations) == dict(other.relations)
            and dict(self.constants) == dict(other.constants)
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (
                    self.vocab,
                    self.universe,
                    tuple(sorted(self.relations.items())),
                    tuple(sorted(self.constants.items())),
                )
            )
        return self._hash

    def __repr__(self):
        rels = ", ".join(f"{r}:{len(t)}" for r, t in self.relations.items())
        return f"Structure(|U|={len(self.universe)}, {rels}, consts={dict(self.constants)})"

    def holds(self, name: str, *row: Element) -> bool:
        return tuple(row) in self.relations[name]

    @property
    def pinned(self) -> frozenset:
        """Elements interpreting some constant."""
        return frozenset(self.constants.values())


@dataclass(frozen=True)
class PartialMap:
    """A finite element correspondence ``source -> target``.

    Construction does not validate; malformed maps are reported by
    :func:`is_partial_isomorphism` returning ``False``.
    """

    pairs: Tuple[Tuple[Element, Element], ...]
    source: Structure
    target: Structure

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(a), int(b)) for a, b in self.pairs))

    @classmethod
    def from_dict(cls, mapping: Mapping[Element, Element], source, target) -> "PartialMap":
        return cls(tuple(sorted(mapping.items())), source, target)

    def is_functional(self) -> bool:
        seen: Dict[int, int] = {}
        for a, b in self.pairs:
            if seen.setdefault(a, b) != b:
                return False
        return True

    def is_injective(self) -> bool:
        seen: Dict[int, int] = {}
        for a, b in self.pairs:
            if seen.setdefault(b, a) != a:
                return False
        return True

    def as_dict(self) -> Dict[Element, Element]:
        return dict(self.pairs)

    @property
    def domain(self) -> frozenset:
        return frozenset(a for a, _ in self.pairs)

    @property
    def range(self) -> frozenset:
        return frozenset(b for _, b in self.pairs)

    def inverse(self) -> "PartialMap":
        return PartialMap(tuple((b, a) for a, b in self.pairs), self.target, self.source)

    def compose(self, other: "PartialMap") -> "PartialMap":
        """``other`` after ``self``: maps ``x`` to ``other(self(x))``."""
        second = other.as_dict()
        pairs = tuple((a, second[b]) for a, b in self.pairs if b in second)
        return PartialMap(pairs, self.source, other.target)


def induced_substructure(S: Structure, subset: Iterable[Element]) -> Structure:
    """Restrict ``S`` to ``subset``, which must keep every constant."""
    subset = frozenset(subset)
    if not subset <= S.universe:
        raise NotASubset(f"elements {sorted(subset - S.universe)} are not in the universe")
    for c, e in S.constants.items():
        if e not in subset:
            raise MissingConstant(f"constant {c} is interpreted as {e}, which the subset omits")
    if not subset:
        raise StructureError("induced substructure would be empty")
    if subset == S.universe:
        return S
    rels = {}
    for name, rows in S.relations.items():
        rels[name] = frozenset(row for row in rows if all(e in subset for e in row))
    return Structure(S.vocab, subset, rels, S.constants, _trusted=True)


def _lex_subsets(elements: Sequence[Element], pinned: frozenset, size_bound: Optional[int]):
    """Subsets of ``elements`` (sorted) containing ``pinned``, in lexicographic order."""
    n = len(elements)
    pinned_idx = [i for i, e in enumerate(elements) if e in pinned]
    # next_pinned[i]: smallest pinned index >= i, or n
    next_pinned = [n] * (n + 1)
    for i in range(n - 1, -1, -1):
        next_pinned[i] = i if elements[i] in pinned else next_pinned[i + 1]
    limit = n if size_bound is None else size_bound
    if len(pinned_idx) > limit:
        return
    chosen = []

    def walk(start):
        if chosen and next_pinned[start] == n:
            yield tuple(chosen)
        if len(chosen) >= limit:
            return
        last = min(next_pinned[start], n - 1)
        for j in range(start, last + 1):
            chosen.append(elements[j])
            yield from walk(j + 1)
            chosen.pop()

    yield from walk(0)


def enumerate_substructures(S: Structure, size_bound: Optional[int] = None) -> Iterator[Structure]:
    """Yield every non-empty induced substructure of ``S`` exactly once.

    Subsets are produced in lexicographic order of their sorted element
    lists; with ``size_bound`` only subsets of at most that size appear.
    """
    for subset in _lex_subsets(S.elements, S.pinned, size_bound):
        yield induced_substructure(S, subset)


def enumerate_subsets(S: Structure, size_bound: Optional[int] = None) -> Iterator[Tuple[Element, ...]]:
    """The element sets behind :func:`enumerate_substructures`, same order."""
    return _lex_subsets(S.elements, S.pinned, size_bound)


def is_extension(A: Structure, B: Structure) -> bool:
    """True iff ``A`` is the substructure of ``B`` induced on ``A``'s universe."""
    if A.vocab != B.vocab:
        raise VocabularyMismatch("structures have different vocabularies")
    if not A.universe <= B.universe:
        return False
    if dict(A.constants) != dict(B.constants):
        return False
    U = A.universe
    for name, rows in B.relations.items():
        restricted = frozenset(row for row in rows if all(e in U for e in row))
        if restricted != A.relations[name]:
            return False
    return True


def _atoms_agree(source: Structure, target: Structure, fwd: Dict[int, int]) -> bool:
    items = list(fwd.items())
    d = len(items)
    for name, arity in source.vocab.relations:
        rs = source.relations[name]
        rt = target.relations[name]
        if arity == 1:
            for x, y in items:
                if ((x,) in rs) != ((y,) in rt):
                    return False
        elif arity == 2:
            if d * d <= len(rs) + len(rt):
                for x1, y1 in items:
                    for x2, y2 in items:
                        if ((x1, x2) in rs) != ((y1, y2) in rt):
                            return False
            else:
                if not _tables_agree(rs, rt, fwd):
                    return False
        else:
            if d**arity <= len(rs) + len(rt):
                for combo in itertools.product(items, repeat=arity):
                    src = tuple(x for x, _ in combo)
                    tgt = tuple(y for _, y in combo)
                    if (src in rs) != (tgt in rt):
                        return False
            elif not _tables_agree(rs, rt, fwd):
                return False
    return True


def _tables_agree(rs, rt, fwd) -> bool:
    image = set()
    for row in rs:
        if all(e in fwd for e in row):
            image.add(tuple(fwd[e] for e in row))
    rng = set(fwd.values())
    expected = {row for row in rt if all(e in rng for e in row)}
    return image == expected


def partial_iso_pairs(source: Structure, target: Structure, pairs: Iterable[Tuple[int, int]]) -> bool:
    """Partial-isomorphism test on raw pairs; constant pairs are implied.

    Returns ``False`` on any malformed input (elements outside the
    universes, non-functional or non-injective correspondences).
    """
    fwd: Dict[int, int] = {}
    bwd: Dict[int, int] = {}
    pairs = list(pairs)
    for c in source.vocab.constants:
        pairs.append((source.constants[c], target.constants[c]))
    su, tu = source.universe, target.universe
    for a, b in pairs:
        if a not in su or b not in tu:
            return False
        if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
            return False
    return _atoms_agree(source, target, fwd)


def is_partial_isomorphism(m: PartialMap) -> bool:
    """True iff ``m`` is an injective map preserving constants and all atoms."""
    if m.source.vocab != m.target.vocab:
        return False
    return partial_iso_pairs(m.source, m.target, m.pairs)


def find_isomorphism(
    A: Structure, B: Structure, limit: int = DEFAULT_ISOMORPHISM_LIMIT
) -> Optional[PartialMap]:
    """Backtracking search for a total isomorphism ``A -> B``."""
    if A.vocab != B.vocab:
        raise VocabularyMismatch("structures have different vocabularies")
    if len(A) != len(B):
        return None
    if len(A) > limit:
        raise SizeLimitExceeded(f"universe of size {len(A)} exceeds the isomorphism limit {limit}")
    fwd: Dict[int, int] = {}
    for c in A.vocab.constants:
        a, b = A.constants[c], B.constants[c]
        if fwd.setdefault(a, b) != b:
            return None
    if len(set(fwd.values())) != len(fwd) or not _atoms_agree(A, B, fwd):
        return None
    todo = [e for e in A.elements if e not in fwd]

    def extend(i):
        if i == len(todo):
            return True
        a = todo[i]
        used = set(fwd.values())
        for b in B.elements:
            if b in used:
                continue
            fwd[a] = b
            if _atoms_agree(A, B, fwd) and extend(i + 1):
                return True
            del fwd[a]
        return False

    if not extend(0):
        return None
    return PartialMap.from_dict(fwd, A, B)
