"""First-order syntax: terms, formulas, a recursive-descent parser and a printer.

Concrete syntax::

    forall x. phi      exists x. phi
    phi & psi          phi | psi        phi -> psi      !phi
    R(t1,...,tn)       t1 = t2          ( phi )

Precedence is ``!`` > ``&`` > ``|`` > ``->``; ``->`` associates to the
right, ``&`` and ``|`` to the left, and quantifier bodies extend as far
right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import FrozenSet, Iterator, List, Optional, Tuple, Union

from ..errors import ArityError, FormulaSyntaxError, UnknownSymbol
from ..structures import Vocabulary


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


Term = Union[Var, Const]


class Formula:
    """Base class of the formula AST. Nodes are frozen dataclasses."""

    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __rshift__(self, other):
        return Implies(self, other)

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


Binary = (And, Or, Implies)
Quantified = (Exists, Forall)


# -- builders ---------------------------------------------------------------


def atom(rel: str, *args: Union[Term, str]) -> Atom:
    """``atom("S", "x", "y")``; bare strings become variables."""
    return Atom(rel, tuple(Var(a) if isinstance(a, str) else a for a in args))


def eq(left, right) -> Eq:
    left = Var(left) if isinstance(left, str) else left
    right = Var(right) if isinstance(right, str) else right
    return Eq(left, right)


def neq(left, right) -> Not:
    return Not(eq(left, right))


def conj(parts) -> Formula:
    """Left-nested conjunction; an empty list is rejected."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def forall(variables, body) -> Formula:
    if isinstance(variables, str):
        variables = [variables]
    for v in reversed(list(variables)):
        body = Forall(v, body)
    return body


def exists(variables, body) -> Formula:
    if isinstance(variables, str):
        variables = [variables]
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


# -- traversal --------------------------------------------------------------


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.body)
    elif isinstance(f, Binary):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Quantified):
        yield from subformulas(f.body)


def _terms(f: Formula):
    if isinstance(f, Atom):
        return f.args
    if isinstance(f, Eq):
        return (f.left, f.right)
    return ()


def free_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, (Atom, Eq)):
        return frozenset(t.name for t in _terms(f) if isinstance(t, Var))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, Binary):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quantified):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def all_names(f: Formula) -> FrozenSet[str]:
    """Every variable or constant name occurring in ``f``, bound or free."""
    names = set()
    for g in subformulas(f):
        names.update(t.name for t in _terms(g))
        if isinstance(g, Quantified):
            names.add(g.var)
    return frozenset(names)


def constants_of(f: Formula) -> FrozenSet[str]:
    return frozenset(t.name for g in subformulas(f) for t in _terms(g) if isinstance(t, Const))


def vocabulary_of(f: Formula) -> Vocabulary:
    """The smallest vocabulary ``f`` is written over.

    Raises ArityError when one relation name is used with two arities.
    """
    arities = {}
    for g in subformulas(f):
        if isinstance(g, Atom):
            seen = arities.setdefault(g.rel, len(g.args))
            if seen != len(g.args):
                raise ArityError(f"{g.rel} is used with arities {seen} and {len(g.args)}")
    return Vocabulary(tuple(sorted(arities.items())), tuple(sorted(constants_of(f))))


def quantifier_depth(f: Formula) -> int:
    if isinstance(f, Not):
        return quantifier_depth(f.body)
    if isinstance(f, Binary):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    if isinstance(f, Quantified):
        return 1 + quantifier_depth(f.body)
    return 0


def is_quantifier_free(f: Formula) -> bool:
    return not any(isinstance(g, Quantified) for g in subformulas(f))


def substitute(f: Formula, old: str, new: str) -> Formula:
    """Replace free occurrences of variable ``old`` by variable ``new``.

    The caller guarantees ``new`` is not captured (rectified input).
    """
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(Var(new) if t == Var(old) else t for t in f.args))
    if isinstance(f, Eq):
        return Eq(
            Var(new) if f.left == Var(old) else f.left,
            Var(new) if f.right == Var(old) else f.right,
        )
    if isinstance(f, Not):
        return Not(substitute(f.body, old, new))
    if isinstance(f, Binary):
        return type(f)(substitute(f.left, old, new), substitute(f.right, old, new))
    if isinstance(f, Quantified):
        if f.var == old:
            return f
        return type(f)(f.var, substitute(f.body, old, new))
    raise TypeError(f"not a formula: {f!r}")


def check_vocabulary(f: Formula, vocab: Vocabulary) -> None:
    """Raise if ``f`` uses unknown symbols or wrong arities."""
    for g in subformulas(f):
        if isinstance(g, Atom):
            if not vocab.has_relation(g.rel):
                raise UnknownSymbol(f"unknown relation symbol {g.rel!r}")
            if vocab.arity(g.rel) != len(g.args):
                raise ArityError(
                    f"{g.rel} has arity {vocab.arity(g.rel)} but is applied to {len(g.args)} terms"
                )
        for t in _terms(g):
            if isinstance(t, Const) and not vocab.has_constant(t.name):
                raise UnknownSymbol(f"unknown constant symbol {t.name!r}")


# -- printing ---------------------------------------------------------------

_OPS = {And: "&", Or: "|", Implies: "->"}


def _render_term(t: Term) -> str:
    return t.name


def _render_operand(f: Formula) -> str:
    if isinstance(f, Quantified):
        return "(" + render(f) + ")"
    return render(f)


def render(f: Formula) -> str:
    """Print ``f`` in the concrete syntax accepted by :func:`parse`."""
    if isinstance(f, Atom):
        return f"{f.rel}(" + ",".join(_render_term(t) for t in f.args) + ")"
    if isinstance(f, Eq):
        return f"{_render_term(f.left)} = {_render_term(f.right)}"
    if isinstance(f, Not):
        inner = f.body
        if isinstance(inner, (Atom, Not)):
            return "!" + render(inner)
        if isinstance(inner, Binary):
            return "!" + render(inner)
        return "!(" + render(inner) + ")"
    if isinstance(f, Binary):
        return f"({_render_operand(f.left)} {_OPS[type(f)]} {_render_operand(f.right)})"
    if isinstance(f, Exists):
        return f"exists {f.var}. {render(f.body)}"
    if isinstance(f, Forall):
        return f"forall {f.var}. {render(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(->)|([A-Za-z_][A-Za-z0-9_]*)|([()!&|=,.]))")
_KEYWORDS = {"forall", "exists"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("op", "->", start))
        elif m.group(2):
            word = m.group(2)
            tokens.append(("kw" if word in _KEYWORDS else "ident", word, start))
        else:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocab: Optional[Vocabulary]):
        self.text = text
        self.vocab = vocab
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.advance()
        if val != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(val)
            raise FormulaSyntaxError(f"expected {value!r}, found {found}", pos, self.text)

    def error(self, message):
        raise FormulaSyntaxError(message, self.peek()[2], self.text)

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek()[0] != "eof":
            self.error(f"unexpected {self.peek()[1]!r}")
        return f

    def implication(self):
        left = self.disjunction()
        if self.peek()[1] == "->":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[1] == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.peek()[1] == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if val == "!" and kind == "op":
            self.advance()
            return Not(self.unary())
        if kind == "kw":
            self.advance()
            vkind, var, vpos = self.advance()
            if vkind != "ident":
                raise FormulaSyntaxError(f"expected a variable after {val!r}", vpos, self.text)
            if self.vocab is not None and (
                self.vocab.has_constant(var) or self.vocab.has_relation(var)
            ):
                raise FormulaSyntaxError(f"cannot quantify over symbol {var!r}", vpos, self.text)
            self.expect(".")
            body = self.implication()
            return (Forall if val == "forall" else Exists)(var, body)
        return self.primary()

    def term(self):
        kind, name, pos = self.advance()
        if kind != "ident":
            found = "end of input" if kind == "eof" else repr(name)
            raise FormulaSyntaxError(f"expected a term, found {found}", pos, self.text)
        if self.vocab is not None:
            if self.vocab.has_constant(name):
                return Const(name)
            if self.vocab.has_relation(name):
                raise UnknownSymbol(f"relation symbol {name!r} used as a term at position {pos}")
        return Var(name)

    def primary(self):
        kind, val, pos = self.peek()
        if val == "(" and kind == "op":
            self.advance()
            f = self.implication()
            self.expect(")")
            return f
        if kind != "ident":
            found = "end of input" if kind == "eof" else repr(val)
            self.error(f"expected a formula, found {found}")
        nxt = self.tokens[self.i + 1]
        if nxt[1] == "(":
            self.advance()
            self.advance()
            args = [self.term()]
            while self.peek()[1] == ",":
                self.advance()
                args.append(self.term())
            self.expect(")")
            if self.vocab is not None:
                if not self.vocab.has_relation(val):
                    raise UnknownSymbol(f"unknown relation symbol {val!r} at position {pos}")
                if self.vocab.arity(val) != len(args):
                    raise ArityError(
                        f"{val} has arity {self.vocab.arity(val)} but is applied to "
                        f"{len(args)} terms at position {pos}"
                    )
            return Atom(val, tuple(args))
        left = self.term()
        if self.peek()[1] != "=":
            self.error(f"expected '=' after term {val!r}")
        self.advance()
        right = self.term()
        return Eq(left, right)


def parse(text: str, vocab: Optional[Vocabulary] = None) -> Formula:
    """Parse ``text``; with a vocabulary, also resolve constants and check arities."""
    return _Parser(text, vocab).parse()
