"""Tarskian satisfaction over finite structures.

Formulas are compiled, per structure, into nested closures over a flat
variable environment; quantifiers enumerate the universe in increasing
order and short-circuit on the first decisive element.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Mapping, Optional

from ..errors import StructureError, UnboundVariable
from ..structures import Structure
from .syntax import (
    And,
    Atom,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    all_names,
    check_vocabulary,
    free_vars,
)

Assignment = Mapping[str, int]
Compiled = Callable[[List[int]], bool]


def _term_getter(t, slots, S):
    if isinstance(t, Const):
        value = S.constants[t.name]
        return None, value
    return slots[t.name], None


def _compile(f: Formula, S: Structure, slots: Dict[str, int]) -> Compiled:
    if isinstance(f, Atom):
        rel = S.relations[f.rel]
        getters = [_term_getter(t, slots, S) for t in f.args]
        if len(getters) == 1:
            (i, c), = getters
            if i is None:
                result = (c,) in rel
                return lambda env: result
            return lambda env: (env[i],) in rel
        if len(getters) == 2:
            (i, c), (j, d) = getters
            if i is not None and j is not None:
                return lambda env: (env[i], env[j]) in rel
            if i is not None:
                return lambda env: (env[i], d) in rel
            if j is not None:
                return lambda env: (c, env[j]) in rel
            result = (c, d) in rel
            return lambda env: result

        def general(env):
            return tuple(env[i] if i is not None else c for i, c in getters) in rel

        return general
    if isinstance(f, Eq):
        (i, c), (j, d) = _term_getter(f.left, slots, S), _term_getter(f.right, slots, S)
        if i is not None and j is not None:
            return lambda env: env[i] == env[j]
        if i is not None:
            return lambda env: env[i] == d
        if j is not None:
            return lambda env: c == env[j]
        result = c == d
        return lambda env: result
    if isinstance(f, Not):
        body = _compile(f.body, S, slots)
        return lambda env: not body(env)
    if isinstance(f, And):
        left, right = _compile(f.left, S, slots), _compile(f.right, S, slots)
        return lambda env: left(env) and right(env)
    if isinstance(f, Or):
        left, right = _compile(f.left, S, slots), _compile(f.right, S, slots)
        return lambda env: left(env) or right(env)
    if isinstance(f, Implies):
        left, right = _compile(f.left, S, slots), _compile(f.right, S, slots)
        return lambda env: (not left(env)) or right(env)
    if isinstance(f, (Exists, Forall)):
        body = _compile(f.body, S, slots)
        i = slots[f.var]
        universe = S.elements
        want = isinstance(f, Exists)

        def quantify(env):
            saved = env[i]
            for v in universe:
                env[i] = v
                if body(env) is want:
                    env[i] = saved
                    return want
            env[i] = saved
            return not want

        return quantify
    raise TypeError(f"not a formula: {f!r}")


class CompiledFormula:
    """A formula bound to one structure, reusable across assignments."""

    def __init__(self, S: Structure, f: Formula):
        check_vocabulary(f, S.vocab)
        self.structure = S
        self.formula = f
        names = sorted(n for n in all_names(f) if not S.vocab.has_constant(n))
        self.slots = {name: k for k, name in enumerate(names)}
        self.free = free_vars(f)
        self._fn = _compile(f, S, self.slots)

    def __call__(self, a: Optional[Assignment] = None) -> bool:
        a = a or {}
        missing = self.free - set(a)
        if missing:
            raise UnboundVariable(f"free variables {sorted(missing)} are not assigned")
        env = [0] * len(self.slots)
        for name, value in a.items():
            if name in self.slots:
                if value not in self.structure.universe:
                    raise StructureError(f"{name} = {value} is outside the universe")
                env[self.slots[name]] = value
        return bool(self._fn(env))


def evaluate(S: Structure, f: Formula, a: Optional[Assignment] = None) -> bool:
    """Does ``S`` satisfy ``f`` under assignment ``a``?"""
    return CompiledFormula(S, f)(a)


def models(S: Structure, f: Formula) -> bool:
    return evaluate(S, f, {})
