"""The two-move Ehrenfeucht-Fraisse game for ∃^k∀^n sentences.

Spoiler picks ``a`` in ``A^k``, Duplicator answers ``b`` in ``B^k``; Spoiler
picks ``e`` in ``B^n``, Duplicator answers ``f`` in ``A^n``. Duplicator wins
when constants, ``a -> b`` and ``f -> e`` together form a partial
isomorphism ``A -> B``. For relational vocabularies Duplicator wins exactly
when every ∃^k∀^n sentence true in ``A`` is true in ``B``.

The family variant lets Duplicator pick the target ``B`` from a list
together with ``b``; it wins exactly when every ∃^k∀^n sentence true in
``A`` holds in at least one member of the list.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded, MissingCertificate, VocabularyMismatch
from .logic.syntax import Const, Formula, Not, Var, atom, conj, disj, eq, exists, forall
from .structures import Structure, partial_iso_pairs

DUPLICATOR = "duplicator"
SPOILER = "spoiler"

DEFAULT_BUDGET = 10**8
DEFAULT_TABLE_LIMIT = 100_000

Tup = Tuple[int, ...]


def default_budget() -> int:
    value = os.environ.get("FMT_WORKBENCH_BUDGET")
    return int(value) if value else DEFAULT_BUDGET


@dataclass(frozen=True)
class GameConfig:
    k: int
    n: int
    budget: Optional[int] = None

    def __post_init__(self):
        if self.k < 0 or self.n < 0:
            raise ValueError("k and n must be >= 0")

    @property
    def limit(self) -> int:
        return self.budget if self.budget is not None else default_budget()


@dataclass
class GameOutcome:
    """Winner plus a re-checkable certificate.

    Duplicator: ``strategy`` maps each ``a`` to ``b``, ``targets`` maps it
    to the index of the chosen target structure (always 0 against a single
    ``B``) and ``responses`` maps ``(a, e)`` to ``f``. Spoiler: ``spoiler_a``
    and ``chooser`` mapping each ``(target index, b)`` to a defeating ``e``.
    Tables above the size limit are elided and cannot be re-checked.
    """

    winner: str
    k: int
    n: int
    strategy: Optional[Dict[Tup, Tup]] = None
    targets: Optional[Dict[Tup, int]] = None
    responses: Optional[Dict[Tuple[Tup, Tup], Tup]] = None
    spoiler_a: Optional[Tup] = None
    chooser: Optional[Dict[Tuple[int, Tup], Tup]] = None
    positions: int = 0
    certificate_elided: bool = False

    @property
    def has_certificate(self) -> bool:
        if self.winner == DUPLICATOR:
            return None not in (self.strategy, self.targets, self.responses)
        return self.spoiler_a is not None and self.chooser is not None

    def table_size(self) -> int:
        if self.winner == DUPLICATOR:
            return len(self.responses or ())
        return len(self.chooser or ())


class _Solver:
    def __init__(self, A: Structure, B: Structure, n: int):
        self.A, self.B, self.n = A, B, n
        self.positions = 0
        self.memo: Dict[frozenset, Optional[Dict[Tup, Tup]]] = {}

    def ok(self, pairs) -> bool:
        self.positions += 1
        return partial_iso_pairs(self.A, self.B, pairs)

    def answer(self, base: List[Tuple[int, int]], e: Tup) -> Optional[Tup]:
        """First ``f`` (lexicographic) completing ``base`` against ``e``."""
        chosen: List[int] = []

        def extend(j):
            if j == len(e):
                return True
            for x in self.A.elements:
                chosen.append(x)
                if self.ok(base + list(zip(chosen, e[: j + 1]))) and extend(j + 1):
                    return True
                chosen.pop()
            return False

        return tuple(chosen) if extend(0) else None

    def survive(self, a: Tup, b: Tup) -> Optional[Dict[Tup, Tup]]:
        """Responses to every ``e`` from position ``a -> b``, or None."""
        key = frozenset(zip(a, b))
        if key in self.memo:
            return self.memo[key]
        base = list(zip(a, b))
        table: Optional[Dict[Tup, Tup]] = {}
        if not self.ok(base):
            table = None
        else:
            for e in itertools.product(self.B.elements, repeat=self.n):
                f = self.answer(base, e)
                if f is None:
                    table = None
                    break
                table[e] = f
        self.memo[key] = table
        return table

    def defeat(self, a: Tup, b: Tup) -> Tup:
        """First ``e`` with no answer from position ``a -> b``."""
        base = list(zip(a, b))
        if not self.ok(base):
            return tuple(self.B.elements[:1]) * self.n
        for e in itertools.product(self.B.elements, repeat=self.n):
            if self.answer(base, e) is None:
                return e
        raise AssertionError("position is not lost")


def _check_targets(A, Bs):
    if not Bs:
        raise ValueError("need at least one target structure")
    for B in Bs:
        if A.vocab != B.vocab:
            raise VocabularyMismatch("structures have different vocabularies")


def game_space(A: Structure, Bs: Sequence[Structure], k: int, n: int) -> int:
    """Upper bound on the positions an exhaustive solve may visit."""
    return sum(len(A) ** k * len(B) ** k * len(B) ** n * len(A) ** n for B in Bs)


def solve_family_game(
    A: Structure,
    Bs: Sequence[Structure],
    cfg: GameConfig,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> GameOutcome:
    """Exhaustive solve where Duplicator also picks the target from ``Bs``.

    Search order: ``a`` lexicographic outermost, then target index, then
    ``b`` lexicographic; the first surviving answer is kept.
    """
    Bs = list(Bs)
    _check_targets(A, Bs)
    k, n = cfg.k, cfg.n
    bound = game_space(A, Bs, k, n)
    if bound > cfg.limit:
        raise BudgetExceeded(f"game space {bound} exceeds the budget {cfg.limit}")
    solvers = [_Solver(A, B, n) for B in Bs]
    strategy: Dict[Tup, Tup] = {}
    targets: Dict[Tup, int] = {}
    responses: Dict[Tuple[Tup, Tup], Tup] = {}

    def explored():
        return sum(s.positions for s in solvers)

    for a in itertools.product(A.elements, repeat=k):
        found = None
        for i, solver in enumerate(solvers):
            for b in itertools.product(solver.B.elements, repeat=k):
                table = solver.survive(a, b)
                if table is not None:
                    found = (i, b, table)
                    break
            if found:
                break
        if found is None:
            chooser = {
                (i, b): solver.defeat(a, b)
                for i, solver in enumerate(solvers)
                for b in itertools.product(solver.B.elements, repeat=k)
            }
            return GameOutcome(SPOILER, k, n, spoiler_a=a, chooser=chooser, positions=explored())
        i, b, table = found
        strategy[a] = b
        targets[a] = i
        if len(responses) <= table_limit:
            for e, f in table.items():
                responses[(a, e)] = f
    if len(responses) > table_limit:
        return GameOutcome(DUPLICATOR, k, n, positions=explored(), certificate_elided=True)
    return GameOutcome(
        DUPLICATOR,
        k,
        n,
        strategy=strategy,
        targets=targets,
        responses=responses,
        positions=explored(),
    )


def solve_prefix_game(
    A: Structure,
    B: Structure,
    cfg: GameConfig,
    table_limit: int = DEFAULT_TABLE_LIMIT,
) -> GameOutcome:
    """Decide the (k, n) game on the fixed pair ``(A, B)`` by exhaustive search."""
    return solve_family_game(A, [B], cfg, table_limit)


def check_family_certificate(
    A: Structure, Bs: Sequence[Structure], cfg: GameConfig, outcome: GameOutcome
) -> bool:
    """Re-verify a certificate by direct partial-isomorphism checks."""
    if not outcome.has_certificate:
        raise MissingCertificate("outcome carries no certificate")
    Bs = list(Bs)
    k, n = cfg.k, cfg.n
    if (outcome.k, outcome.n) != (k, n):
        return False
    if outcome.winner == DUPLICATOR:
        for a in itertools.product(A.elements, repeat=k):
            b = outcome.strategy.get(a)
            i = outcome.targets.get(a)
            if b is None or len(b) != k or i is None or not 0 <= i < len(Bs):
                return False
            B = Bs[i]
            base = list(zip(a, b))
            for e in itertools.product(B.elements, repeat=n):
                f = outcome.responses.get((a, e))
                if f is None or len(f) != n:
                    return False
                if not partial_iso_pairs(A, B, base + list(zip(f, e))):
                    return False
        return True
    a = outcome.spoiler_a
    if len(a) != k:
        return False
    for i, B in enumerate(Bs):
        for b in itertools.product(B.elements, repeat=k):
            e = outcome.chooser.get((i, b))
            if e is None or len(e) != n:
                return False
            base = list(zip(a, b))
            for f in itertools.product(A.elements, repeat=n):
                if partial_iso_pairs(A, B, base + list(zip(f, e))):
                    return False
    return True


def check_certificate(A: Structure, B: Structure, cfg: GameConfig, outcome: GameOutcome) -> bool:
    return check_family_certificate(A, [B], cfg, outcome)


# -- sentences induced by positions ---------------------------------------------


def atomic_type(S: Structure, values: Tup, names: List[str]) -> Formula:
    """Conjunction of all atomic facts and their negations about ``values``.

    Terms are the variables ``names`` (interpreted as ``values``) and the
    constant symbols.
    """
    terms = [(Var(v), x) for v, x in zip(names, values)]
    terms += [(Const(c), S.constants[c]) for c in S.vocab.constants]
    lits = []
    for (t1, x1), (t2, x2) in itertools.combinations(terms, 2):
        lits.append(eq(t1, t2) if x1 == x2 else Not(eq(t1, t2)))
    for name, arity in S.vocab.relations:
        rel = S.relations[name]
        for combo in itertools.product(terms, repeat=arity):
            ts = tuple(t for t, _ in combo)
            xs = tuple(x for _, x in combo)
            a = atom(name, *ts)
            lits.append(a if xs in rel else Not(a))
    if not lits:
        if not terms:
            raise ValueError("no variables or constants to describe")
        return eq(terms[0][0], terms[0][0])
    return conj(lits)


def characteristic_sentence(A: Structure, a: Tup, n: int) -> Formula:
    """The strongest ∃^k∀^n sentence that ``a`` witnesses in ``A``.

    ``∃x̄ ∀ȳ OR_f type_A(a, f)(x̄, ȳ)``: true in ``A``; true in ``B`` exactly
    when Duplicator has an answer ``b`` to ``a`` surviving every ``e``.
    """
    k = len(a)
    xs = [f"x{i}" for i in range(1, k + 1)]
    ys = [f"y{j}" for j in range(1, n + 1)]
    seen = {}
    for f in itertools.product(A.elements, repeat=n):
        t = atomic_type(A, tuple(a) + f, xs + ys)
        seen.setdefault(t, None)
    return exists(xs, forall(ys, disj(list(seen))))


def separating_sentence(A: Structure, outcome: GameOutcome) -> Formula:
    """For a Spoiler win, an ∃^k∀^n sentence true in ``A`` and false in ``B``."""
    if outcome.winner != SPOILER or outcome.spoiler_a is None:
        raise MissingCertificate("only Spoiler wins induce a separating sentence")
    return characteristic_sentence(A, outcome.spoiler_a, outcome.n)


# -- the counterexample as a game ------------------------------------------------


def strategy_certificate(n: int, k: int) -> GameOutcome:
    """Duplicator table for ``(build_A, [build_B(i)])`` built from the segment strategy.

    Targets are chosen per ``a`` by the smallest witness-free block; answers
    are the inverse of the strategy's map ``B -> A``.
    """
    from . import counterexample as cx

    A = cx.build_A(n, k)
    strategy, targets, responses = {}, {}, {}
    for a in itertools.product(A.elements, repeat=k):
        istar = cx.choose_istar(a, n, k)
        strategy[a] = a
        targets[a] = istar
        for e in itertools.product(A.elements, repeat=n):
            plan = cx.segment_plan(e, n, k, istar, a)
            responses[(a, e)] = plan.response
    return GameOutcome(
        DUPLICATOR, k, n, strategy=strategy, targets=targets, responses=responses
    )


@dataclass
class FixedGameResult:
    istar: int
    winner: Optional[str] = None
    positions: int = 0
    certificate_ok: Optional[bool] = None
    separates: Optional[bool] = None
    note: str = ""


@dataclass
class TransferReport:
    n: int
    k: int
    a_models_phi: bool = False
    b_models_phi: Dict[int, bool] = None
    family_winner: str = ""
    family_method: str = ""
    family_positions: int = 0
    family_certificate_ok: bool = False
    fixed_games: List[FixedGameResult] = None
    prenex_prefix: str = ""
    prenex_leading_existentials: int = 0
    prenex_true_in_a: bool = False
    prenex_false_in_all_b: bool = False

    @property
    def passed(self) -> bool:
        return (
            self.a_models_phi
            and not any(self.b_models_phi.values())
            and self.family_winner == DUPLICATOR
            and self.family_certificate_ok
            and self.prenex_leading_existentials == self.k + 1
            and self.prenex_true_in_a
            and self.prenex_false_in_all_b
        )

    def records(self):
        rows = [
            ("command", "transfer"),
            ("n", self.n),
            ("k", self.k),
            ("a_models_phi", self.a_models_phi),
        ]
        for i, v in sorted(self.b_models_phi.items()):
            rows.append((f"b{i}_models_phi", v))
        rows += [
            ("family_game.winner", self.family_winner),
            ("family_game.method", self.family_method),
            ("family_game.positions", self.family_positions),
            ("family_game.certificate_ok", self.family_certificate_ok),
        ]
        for g in self.fixed_games:
            p = f"fixed_game.b{g.istar}"
            rows += [
                (f"{p}.winner", g.winner or "skipped"),
                (f"{p}.positions", g.positions),
                (f"{p}.certificate_ok", "n/a" if g.certificate_ok is None else g.certificate_ok),
                (f"{p}.separating_sentence_checked", "n/a" if g.separates is None else g.separates),
                (f"{p}.note", g.note or "none"),
            ]
        rows += [
            ("phi_prenex.prefix", self.prenex_prefix),
            ("phi_prenex.leading_existentials", self.prenex_leading_existentials),
            ("phi_prenex.true_in_a", self.prenex_true_in_a),
            ("phi_prenex.false_in_all_b", self.prenex_false_in_all_b),
            ("passed", self.passed),
        ]
        return rows


def transfer_separation_report(
    n: int, k: int, budget: Optional[int] = None, exhaustive_limit: int = 2_000_000
) -> TransferReport:
    """Evidence that ∃^k∀^n sentences cannot tell A from the B family while phi can.

    The family game is solved exhaustively when its space is at most
    ``exhaustive_limit`` and otherwise replaced by the segment-strategy
    table, which is certificate-checked either way. Fixed-target games are
    solved when within ``budget`` and reported as found. Raises
    :class:`BudgetExceeded` only when even re-checking a certificate would
    exceed ``budget``.
    """
    from . import counterexample as cx
    from .logic.semantics import evaluate

    A = cx.build_A(n, k)
    Bs = [cx.build_B(n, k, i) for i in range(k + 1)]
    cfg = GameConfig(k, n, budget)
    report = TransferReport(n=n, k=k, b_models_phi={}, fixed_games=[])
    f = cx.phi(k)
    report.a_models_phi = evaluate(A, f)
    for i, B in enumerate(Bs):
        report.b_models_phi[i] = evaluate(B, f)

    # re-checking any Duplicator table visits |A|^k * |B|^n positions
    check_space = len(A) ** k * len(A) ** n
    if check_space > cfg.limit:
        raise BudgetExceeded(f"certificate check {check_space} exceeds the budget {cfg.limit}")
    space = game_space(A, Bs, k, n)
    if space <= min(exhaustive_limit, cfg.limit):
        outcome = solve_family_game(A, Bs, cfg)
        report.family_method = "exhaustive"
        report.family_positions = outcome.positions
        imported = strategy_certificate(n, k)
        # cross-check: the imported table must also verify
        imported_ok = check_family_certificate(A, Bs, cfg, imported)
    else:
        outcome = strategy_certificate(n, k)
        report.family_method = "strategy-import"
        imported_ok = True
    report.family_winner = outcome.winner
    report.family_certificate_ok = (
        outcome.has_certificate and check_family_certificate(A, Bs, cfg, outcome) and imported_ok
    )

    for i, B in enumerate(Bs):
        g = FixedGameResult(istar=i)
        single = game_space(A, [B], k, n)
        if single > min(exhaustive_limit, cfg.limit):
            g.note = f"skipped: game space {single}"
        else:
            o = solve_prefix_game(A, B, cfg)
            g.winner, g.positions = o.winner, o.positions
            g.certificate_ok = check_certificate(A, B, cfg, o)
            if o.winner == SPOILER:
                s = separating_sentence(A, o)
                g.separates = evaluate(A, s) and not evaluate(B, s)
        report.fixed_games.append(g)

    g = cx.phi_prenex(k)
    prefix = cx.phi_prenex_prefix(k)
    report.prenex_prefix = str(prefix)
    report.prenex_leading_existentials = prefix.leading_existentials
    report.prenex_true_in_a = evaluate(A, g)
    report.prenex_false_in_all_b = not any(evaluate(B, g) for B in Bs)
    return report


# -- certificate serialization ------------------------------------------------------


def certificate_records(outcome: GameOutcome):
    """Key/value lines encoding ``outcome`` and its certificate."""
    from .reports import format_tuple as ft

    rows = [
        ("game.winner", outcome.winner),
        ("game.k", outcome.k),
        ("game.n", outcome.n),
        ("game.positions", outcome.positions),
        ("game.certificate", "elided" if outcome.certificate_elided else "present"),
    ]
    if not outcome.has_certificate:
        return rows
    if outcome.winner == DUPLICATOR:
        for a in sorted(outcome.strategy):
            rows.append((f"cert.answer[{ft(a)}]", f"{outcome.targets[a]}:{ft(outcome.strategy[a])}"))
        for (a, e) in sorted(outcome.responses):
            rows.append((f"cert.response[{ft(a)};{ft(e)}]", ft(outcome.responses[(a, e)])))
    else:
        rows.append(("cert.spoiler_a", ft(outcome.spoiler_a)))
        for (i, b) in sorted(outcome.chooser):
            rows.append((f"cert.defeat[{i}:{ft(b)}]", ft(outcome.chooser[(i, b)])))
    return rows


def outcome_from_records(records) -> GameOutcome:
    """Inverse of :func:`certificate_records` (extra keys are ignored)."""
    from .reports import ReportFormatError, parse_tuple as pt

    d = dict(records)
    try:
        outcome = GameOutcome(
            winner=d["game.winner"],
            k=int(d["game.k"]),
            n=int(d["game.n"]),
            positions=int(d.get("game.positions", 0)),
            certificate_elided=d.get("game.certificate") == "elided",
        )
    except KeyError as exc:
        raise ReportFormatError(f"missing key {exc}") from None
    if outcome.certificate_elided:
        return outcome
    if outcome.winner == DUPLICATOR:
        outcome.strategy, outcome.targets, outcome.responses = {}, {}, {}
        for key, value in records:
            if key.startswith("cert.answer["):
                a = pt(key[len("cert.answer[") : -1])
                i, _, b = value.partition(":")
                outcome.targets[a] = int(i)
                outcome.strategy[a] = pt(b)
            elif key.startswith("cert.response["):
                a, _, e = key[len("cert.response[") : -1].partition(";")
                outcome.responses[(pt(a), pt(e))] = pt(value)
        if not outcome.strategy:
            outcome.strategy = outcome.targets = outcome.responses = None
    else:
        outcome.chooser = {}
        outcome.spoiler_a = pt(d.get("cert.spoiler_a", ""))
        for key, value in records:
            if key.startswith("cert.defeat["):
                i, _, b = key[len("cert.defeat[") : -1].partition(":")
                outcome.chooser[(int(i), pt(b))] = pt(value)
        if not outcome.chooser:
            outcome.chooser = None
    return outcome
