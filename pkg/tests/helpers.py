"""Seeded generators shared by the test modules."""

import itertools
import random

from fmt_workbench.counterexample import TAU
from fmt_workbench.logic.syntax import (
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Implies,
    Not,
    Or,
    Var,
)
from fmt_workbench.structures import Structure, Vocabulary

SMALL = Vocabulary((("P", 1), ("E", 2)), ("c",))
VAR_POOL = ("x", "y", "z", "w")


def random_term(rng, vocab, bound):
    choices = [Var(v) for v in bound] + [Const(c) for c in vocab.constants]
    return rng.choice(choices)


def random_atomic(rng, vocab, bound):
    if rng.random() < 0.25 or not vocab.relations:
        return Eq(random_term(rng, vocab, bound), random_term(rng, vocab, bound))
    name, arity = rng.choice(vocab.relations)
    return Atom(name, tuple(random_term(rng, vocab, bound) for _ in range(arity)))


def random_formula(rng, vocab, depth, bound=()):
    """A random formula whose free variables are among ``bound``.

    Variable names are reused on purpose so shadowing is exercised.
    """
    if not bound and not vocab.constants:
        v = rng.choice(VAR_POOL)
        cls = rng.choice((Exists, Forall))
        return cls(v, random_formula(rng, vocab, max(depth - 1, 0), (v,)))
    if depth <= 0:
        return random_atomic(rng, vocab, bound)
    kind = rng.choice(("atom", "not", "and", "or", "imp", "ex", "all", "ex", "all"))
    if kind == "atom":
        return random_atomic(rng, vocab, bound)
    if kind == "not":
        return Not(random_formula(rng, vocab, depth - 1, bound))
    if kind in ("and", "or", "imp"):
        cls = {"and": And, "or": Or, "imp": Implies}[kind]
        return cls(
            random_formula(rng, vocab, depth - 1, bound),
            random_formula(rng, vocab, depth - 1, bound),
        )
    v = rng.choice(VAR_POOL)
    cls = Exists if kind == "ex" else Forall
    inner = tuple(sorted(set(bound) | {v}))
    return cls(v, random_formula(rng, vocab, depth - 1, inner))


def random_qf(rng, vocab, names, depth):
    if depth <= 0:
        return random_atomic(rng, vocab, names)
    kind = rng.choice(("atom", "not", "and", "or", "imp"))
    if kind == "atom":
        return random_atomic(rng, vocab, names)
    if kind == "not":
        return Not(random_qf(rng, vocab, names, depth - 1))
    cls = {"and": And, "or": Or, "imp": Implies}[kind]
    return cls(random_qf(rng, vocab, names, depth - 1), random_qf(rng, vocab, names, depth - 1))


def random_block_sentence(rng, vocab, kind, nvars, depth=3):
    """``forall``- or ``exists``-block sentence over a quantifier-free matrix."""
    names = tuple(f"v{i}" for i in range(1, nvars + 1))
    f = random_qf(rng, vocab, names, depth)
    cls = Forall if kind == "forall" else Exists
    for v in reversed(names):
        f = cls(v, f)
    return f


def random_structure(rng, vocab, size, density=None):
    U = range(1, size + 1)
    rels = {}
    for name, arity in vocab.relations:
        p = rng.random() if density is None else density
        rels[name] = [t for t in itertools.product(U, repeat=arity) if rng.random() < p]
    consts = {c: rng.randint(1, size) for c in vocab.constants}
    return Structure(vocab, U, rels, consts)


def relabel(S, perm):
    """Isomorphic copy of ``S`` along the dict ``perm``."""
    rels = {name: [tuple(perm[x] for x in t) for t in S.relations[name]] for name in S.relations}
    consts = {c: perm[v] for c, v in S.constants.items()}
    return Structure(S.vocab, [perm[x] for x in S.elements], rels, consts)


def random_permutation(rng, S):
    els = list(S.elements)
    image = els[:]
    rng.shuffle(image)
    return dict(zip(els, image))


def random_tau_structure(rng, size):
    """A tau-structure that is often close to a model of phi.

    ``le`` is a linear order of a random permutation with probability 0.8;
    ``S`` is a random subset of the successor pairs plus noise; ``c``/``d``
    are the endpoints most of the time.
    """
    U = list(range(1, size + 1))
    order = U[:]
    rng.shuffle(order)
    if rng.random() < 0.8:
        le = [(order[i], order[j]) for i in range(size) for j in range(i, size)]
    else:
        le = [t for t in itertools.product(U, repeat=2) if rng.random() < 0.5]
    succ = [(order[i], order[i + 1]) for i in range(size - 1) if rng.random() < 0.85]
    if rng.random() < 0.2:
        succ.append((rng.choice(U), rng.choice(U)))
    P = [x for x in U if rng.random() < 0.4]
    if rng.random() < 0.8:
        c, d = order[0], order[-1]
    else:
        c, d = rng.choice(U), rng.choice(U)
    return Structure(TAU, U, {"le": le, "S": succ, "P": [(x,) for x in P]}, {"c": c, "d": d})


def seeded(seed):
    return random.Random(seed)
