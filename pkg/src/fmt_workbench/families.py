"""Finite families of structures: exhaustive enumerations and seeded samplers."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, List, Optional

from .structures import Structure, Vocabulary, enumerate_substructures

GRAPH = Vocabulary((("E", 2),))
UNARY = Vocabulary((("P", 1),))


def all_structures(vocab: Vocabulary, max_size: int, min_size: int = 1) -> Iterator[Structure]:
    """Every labeled structure on ``{1..m}`` for ``min_size <= m <= max_size``.

    Relations range over all subsets of ``U^arity``; constants over all
    elements. Intended for micro sizes only.
    """
    for m in range(min_size, max_size + 1):
        U = range(1, m + 1)
        spaces = [list(itertools.product(U, repeat=a)) for _, a in vocab.relations]
        names = vocab.relation_names
        const_choices = itertools.product(U, repeat=len(vocab.constants))
        const_choices = list(const_choices)
        masks = [range(2 ** len(space)) for space in spaces]
        for bits in itertools.product(*masks):
            rels = {
                name: [row for j, row in enumerate(space) if b >> j & 1]
                for name, space, b in zip(names, spaces, bits)
            }
            for cs in const_choices:
                yield Structure(vocab, U, rels, dict(zip(vocab.constants, cs)))


def all_graphs(size: int) -> Iterator[Structure]:
    """All simple undirected graphs on ``{1..size}`` (symmetric, loop-free E)."""
    U = range(1, size + 1)
    edges = list(itertools.combinations(U, 2))
    for bits in range(2 ** len(edges)):
        E = []
        for j, (u, v) in enumerate(edges):
            if bits >> j & 1:
                E += [(u, v), (v, u)]
        yield Structure(GRAPH, U, {"E": E})


def random_graph(size: int, rng: random.Random, p: float = 0.5) -> Structure:
    E = []
    for u, v in itertools.combinations(range(1, size + 1), 2):
        if rng.random() < p:
            E += [(u, v), (v, u)]
    return Structure(GRAPH, range(1, size + 1), {"E": E})


def star_graph(leaves: int) -> Structure:
    """``K_{1,leaves}`` with centre 1."""
    E = []
    for v in range(2, leaves + 2):
        E += [(1, v), (v, 1)]
    return Structure(GRAPH, range(1, leaves + 2), {"E": E})


def random_structure(
    vocab: Vocabulary,
    size: int,
    rng: random.Random,
    density: Optional[float] = None,
) -> Structure:
    """Each tuple is included independently; density is drawn if not given."""
    U = range(1, size + 1)
    rels = {}
    for name, arity in vocab.relations:
        p = rng.random() if density is None else density
        rels[name] = [row for row in itertools.product(U, repeat=arity) if rng.random() < p]
    consts = {c: rng.randint(1, size) for c in vocab.constants}
    return Structure(vocab, U, rels, consts)


def substructure_lattice(S: Structure) -> List[Structure]:
    return list(enumerate_substructures(S))
