"""The hereditary sentence that no ∃^k∀* sentence defines over finite structures.

Vocabulary ``le/2 S/2 P/1 ; c d``. ``phi(k)`` says: ``le`` is a linear
order with minimum ``c`` and maximum ``d``, ``S`` only relates
``le``-successors, and it is *not* the case that ``S`` is total below
``d`` while ``P`` has at most ``k`` elements.

``build_A(n, k)`` is the order ``1..(8n+1)(k+1)`` cut into ``k+1`` blocks
of length ``8n+1`` with one ``P``-point at offset ``4n+1`` of each block;
``build_B(n, k, i)`` drops the ``P``-point of block ``i``. The duplicator
strategy answers any ``n`` picks in ``B`` with ``n`` picks in ``A`` so
that, together with ``c``, ``d`` and the ``k`` witnesses, the
correspondence is a partial isomorphism ``B -> A``.
"""

from __future__ import annotations

import itertools
import logging
import random
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BudgetExceeded, PreconditionFailed, WrongArity
from .logic.semantics import evaluate
from .logic.syntax import (
    Const,
    Formula,
    Not,
    Var,
    atom,
    conj,
    disj,
    eq,
    exists,
    forall,
    neq,
)
from .logic.prenex import FORALL, EXISTS, PrefixClass, prefix_of
from .structures import PartialMap, Structure, Vocabulary, partial_iso_pairs

log = logging.getLogger(__name__)

TAU = Vocabulary((("le", 2), ("S", 2), ("P", 1)), ("c", "d"))
C = Const("c")
D = Const("d")

DEFAULT_BUDGET = 10**8


def _le(a, b):
    return atom("le", a, b)


def _S(a, b):
    return atom("S", a, b)


def _P(a):
    return atom("P", a)


# -- sentences ----------------------------------------------------------------


def _linear_order_matrix(x, y, z):
    return conj(
        [
            _le(x, x),
            _le(x, y) | _le(y, x),
            (_le(x, y) & _le(y, x)) >> eq(x, y),
            (_le(x, y) & _le(y, z)) >> _le(x, z),
        ]
    )


def _endpoints_matrix(x):
    return _le(C, x) & _le(x, D)


def _successor_matrix(x, y, z):
    between = (_le(x, z) & _le(z, y)) >> (eq(z, x) | eq(z, y))
    return _S(x, y) >> conj([_le(x, y), neq(x, y), between])


def _at_most(k: int) -> Formula:
    """At most ``k`` elements in P, as nested guarded universals (∀^{k+1})."""
    xs = [f"x{i}" for i in range(1, k + 2)]
    if k == 0:
        return forall("x1", Not(_P("x1")))
    body = disj(eq(xs[i], xs[j]) for i in range(k + 1) for j in range(i + 1, k + 1))
    for v in reversed(xs):
        body = forall(v, _P(v) >> body)
    return body


def xi(index: int, k: int) -> Formula:
    """The five conjuncts of :func:`phi`. ``k`` matters only for index 5."""
    if index == 1:
        # nested so that transitivity is only explored below le(x,y)
        x, y, z = "x", "y", "z"
        return forall(
            x,
            _le(x, x)
            & forall(
                y,
                conj(
                    [
                        _le(x, y) | _le(y, x),
                        (_le(x, y) & _le(y, x)) >> eq(x, y),
                        _le(x, y) >> forall(z, _le(y, z) >> _le(x, z)),
                    ]
                ),
            ),
        )
    if index == 2:
        return forall("x", _endpoints_matrix("x"))
    if index == 3:
        between = forall("z", (_le("x", "z") & _le("z", "y")) >> (eq("z", "x") | eq("z", "y")))
        return forall(["x", "y"], _S("x", "y") >> conj([_le("x", "y"), neq("x", "y"), between]))
    if index == 4:
        return forall("x", neq("x", D) >> exists("y", _S("x", "y")))
    if index == 5:
        if k < 0:
            raise ValueError("k must be >= 0")
        return _at_most(k)
    raise ValueError(f"xi index must be in 1..5, got {index}")


def alpha() -> Formula:
    return conj([xi(1, 0), xi(2, 0), xi(3, 0)])


def phi(k: int) -> Formula:
    return alpha() & Not(xi(4, k) & xi(5, k))


def phi_prenex(k: int) -> Formula:
    """An ∃^{k+1}∀^3 sentence equivalent to :func:`phi` ``(k)``.

    The first existential doubles as the witness of ``¬ξ4`` and of ``¬ξ5``;
    the innermost universal doubles as ``¬ξ4``'s universal.
    """
    xs = [f"x{i}" for i in range(1, k + 2)]
    y1, y2, y3 = "y1", "y2", "y3"
    stuck = neq(xs[0], D) & Not(_S(xs[0], y3))
    crowded = conj(
        [neq(xs[i], xs[j]) for i in range(k + 1) for j in range(i + 1, k + 1)]
        + [_P(v) for v in xs]
    )
    matrix = conj(
        [
            stuck | crowded,
            _linear_order_matrix(y1, y2, y3),
            _endpoints_matrix(y1),
            _successor_matrix(y1, y2, y3),
        ]
    )
    return exists(xs, forall([y1, y2, y3], matrix))


def phi_prenex_prefix(k: int) -> PrefixClass:
    return prefix_of(phi_prenex(k))


# -- structures ---------------------------------------------------------------


def block_size(n: int) -> int:
    return 8 * n + 1


def universe_size(n: int, k: int) -> int:
    return block_size(n) * (k + 1)


def _check_params(n, k):
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")


def p_points(n: int, k: int) -> Tuple[int, ...]:
    return tuple(4 * n + 1 + i * block_size(n) for i in range(k + 1))


def block(n: int, i: int) -> range:
    """Elements of block ``i`` (0-based)."""
    size = block_size(n)
    return range(size * i + 1, size * (i + 1) + 1)


def _order_structure(size: int, P: Sequence[int]) -> Structure:
    le = [(i, j) for i in range(1, size + 1) for j in range(i, size + 1)]
    succ = [(i, i + 1) for i in range(1, size)]
    return Structure(
        TAU,
        range(1, size + 1),
        {"le": le, "S": succ, "P": [(p,) for p in P]},
        {"c": 1, "d": size},
    )


@lru_cache(maxsize=64)
def build_A(n: int, k: int) -> Structure:
    _check_params(n, k)
    return _order_structure(universe_size(n, k), p_points(n, k))


@lru_cache(maxsize=256)
def build_B(n: int, k: int, istar: int) -> Structure:
    _check_params(n, k)
    if not 0 <= istar <= k:
        raise PreconditionFailed(f"istar must be in 0..{k}, got {istar}")
    removed = p_points(n, k)[istar]
    return _order_structure(universe_size(n, k), [p for p in p_points(n, k) if p != removed])


# -- duplicator strategy --------------------------------------------------------


def choose_istar(witnesses: Sequence[int], n: int, k: int) -> int:
    """Smallest block index containing none of ``witnesses``."""
    size = block_size(n)
    hit = {(w - 1) // size for w in witnesses}
    for i in range(k + 1):
        if i not in hit:
            return i
    raise PreconditionFailed(f"{len(witnesses)} witnesses meet all {k + 1} blocks")


@dataclass(frozen=True)
class SegmentPlan:
    """Duplicator's answer to ``e`` and the segment bookkeeping behind it.

    ``cs3_start_offset`` is the 1-based offset inside block ``istar`` where
    the first relocated segment starts.
    """

    n: int
    k: int
    istar: int
    e: Tuple[int, ...]
    witnesses: Tuple[int, ...]
    cs: Tuple[Tuple[int, int], ...]
    cs1: Tuple[Tuple[int, int], ...]
    cs2: Tuple[Tuple[int, int], ...]
    cs3: Tuple[Tuple[int, int], ...]
    response: Tuple[int, ...]
    cs3_start_offset: int
    literal: bool = False

    @property
    def block_start(self) -> int:
        return block_size(self.n) * self.istar + 1

    @property
    def block_end(self) -> int:
        return block_size(self.n) * (self.istar + 1)

    def offset(self, element: int) -> int:
        return element - block_size(self.n) * self.istar

    @property
    def mapping(self) -> Dict[int, int]:
        return dict(zip(self.e, self.response))


def contiguous_segments(elements) -> List[Tuple[int, int]]:
    """Maximal runs of consecutive integers, as ``[lo, hi]`` pairs."""
    segments: List[List[int]] = []
    for x in sorted(set(elements)):
        if segments and segments[-1][1] == x - 1:
            segments[-1][1] = x
        else:
            segments.append([x, x])
    return [tuple(s) for s in segments]


def segment_plan(
    e_tuple: Sequence[int],
    n: int,
    k: int,
    istar: int,
    witnesses: Sequence[int] = (),
    *,
    literal: bool = False,
) -> SegmentPlan:
    """Split ``e`` into maximal segments and relocate the ones inside block ``istar``.

    A segment stays in place when it leaves block ``istar`` or when it
    contains or is adjacent to a fixed element (``1``, the maximum, or a
    witness). The remaining segments are packed, one gap apart, starting at
    offset ``max(n + 1, reach + 2)`` of the block, where ``reach`` is the
    highest offset in the lower half of the block held by a fixed or
    stay-put element.

    ``literal=True`` ignores fixed elements and always starts at offset
    ``n + 1``; that variant is kept for comparison and is not sound.
    """
    e_tuple = tuple(int(x) for x in e_tuple)
    witnesses = tuple(int(x) for x in witnesses)
    _check_params(n, k)
    if len(e_tuple) != n:
        raise WrongArity(f"expected {n} elements, got {len(e_tuple)}")
    top = universe_size(n, k)
    for x in e_tuple + witnesses:
        if not 1 <= x <= top:
            raise PreconditionFailed(f"element {x} outside 1..{top}")
    if not 0 <= istar <= k:
        raise PreconditionFailed(f"istar must be in 0..{k}")
    size = block_size(n)
    lo, hi = size * istar + 1, size * (istar + 1)
    if any(lo <= w <= hi for w in witnesses):
        raise PreconditionFailed(f"a witness lies in block {istar}")

    fixed = {1, top, *witnesses}
    cs = contiguous_segments(e_tuple)
    cs1, cs2 = [], []
    for a, b in cs:
        outside = a < lo or b > hi
        touches = not literal and any(x in fixed for x in range(a - 1, b + 2))
        (cs1 if outside or touches else cs2).append((a, b))

    if literal:
        start_offset = n + 1
    else:
        half = 4 * n
        held = [x - lo + 1 for x in fixed if lo <= x <= hi]
        held += [x - lo + 1 for a, b in cs1 for x in range(a, b + 1) if lo <= x <= hi]
        reach = max((o for o in held if o <= half), default=0)
        start_offset = max(n + 1, reach + 2)

    cs3 = []
    start = lo - 1 + start_offset
    for a, b in cs2:
        cs3.append((start, start + (b - a)))
        start += (b - a) + 2

    moved = {}
    for (a, b), (a3, _) in zip(cs2, cs3):
        for t in range(b - a + 1):
            moved[a + t] = a3 + t
    response = tuple(moved.get(x, x) for x in e_tuple)
    return SegmentPlan(
        n=n,
        k=k,
        istar=istar,
        e=e_tuple,
        witnesses=witnesses,
        cs=tuple(cs),
        cs1=tuple(cs1),
        cs2=tuple(cs2),
        cs3=tuple(cs3),
        response=response,
        cs3_start_offset=start_offset,
        literal=literal,
    )


def rho_pairs(plan: SegmentPlan) -> Tuple[Tuple[int, int], ...]:
    """The pair set of the map ``B -> A``, sorted, duplicates collapsed."""
    top = universe_size(plan.n, plan.k)
    pairs = {(1, 1), (top, top)}
    pairs.update((a, a) for a in plan.witnesses)
    pairs.update(zip(plan.e, plan.response))
    return tuple(sorted(pairs))


def duplicator_response(n: int, k: int, witnesses: Sequence[int], e_tuple: Sequence[int]):
    """Returns ``(istar, f_tuple, rho)`` with ``rho`` a map ``build_B -> build_A``."""
    witnesses = tuple(witnesses)
    if len(witnesses) > k:
        raise PreconditionFailed(f"at most {k} witnesses allowed, got {len(witnesses)}")
    istar = choose_istar(witnesses, n, k)
    plan = segment_plan(e_tuple, n, k, istar, witnesses)
    rho = PartialMap(rho_pairs(plan), build_B(n, k, istar), build_A(n, k))
    return istar, plan.response, rho


def check_calibration(plan: SegmentPlan) -> Dict[str, bool]:
    """The four geometric facts the strategy relies on, each as a boolean.

    ``cs3_upper_bound``: last relocated element at offset <= 3n+1.
    ``avoids_removed_point``: no relocated element sits on offset 4n+1.
    ``boundary_reach``: segments crossing into the block from the left stop
    at offset <= n-1, from the right start at offset >= 7n+2, and every
    stay-put or fixed element of the lower half sits at least two below the
    relocation start.
    ``single_gaps``: consecutive relocated segments are exactly one apart.
    """
    n = plan.n
    lo, hi = plan.block_start, plan.block_end
    top = universe_size(n, plan.k)
    out = {}
    last = plan.cs3[-1][1] if plan.cs3 else None
    out["cs3_upper_bound"] = last is None or last <= lo - 1 + 3 * n + 1
    removed = lo - 1 + 4 * n + 1
    out["avoids_removed_point"] = all(not a <= removed <= b for a, b in plan.cs3)
    ok = True
    for a, b in plan.cs1:
        if a < lo <= b:
            ok &= plan.offset(b) <= n - 1
        if a <= hi < b:
            ok &= plan.offset(a) >= 7 * n + 2
    held = [x for x in {1, top, *plan.witnesses} if lo <= x <= hi]
    held += [x for a, b in plan.cs1 for x in range(a, b + 1) if lo <= x <= hi]
    for x in held:
        off = plan.offset(x)
        if off <= 4 * n:
            ok &= off <= plan.cs3_start_offset - 2
        else:
            ok &= last is None or x >= last + 2
    out["boundary_reach"] = bool(ok)
    out["single_gaps"] = all(
        plan.cs3[i + 1][0] == plan.cs3[i][1] + 2 for i in range(len(plan.cs3) - 1)
    ) and [b - a for a, b in plan.cs2] == [b - a for a, b in plan.cs3]
    return out


# -- verification ----------------------------------------------------------------


@dataclass
class CounterexampleReport:
    n: int
    k: int
    mode: str
    seed: Optional[int] = None
    a_models_phi: bool = False
    b_models_phi: Dict[int, bool] = field(default_factory=dict)
    strategy_checks: int = 0
    distinct_maps: int = 0
    strategy_failures: int = 0
    first_failure: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    calibration_checks: int = 0
    calibration_failures: Dict[str, int] = field(default_factory=dict)
    first_calibration_failure: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    prenex_prefix: str = ""
    prenex_universals: int = 0
    prenex_agreement: Optional[bool] = None
    prenex_note: str = ""
    literal_checks: int = 0
    literal_failures: int = 0
    literal_first_failure: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.a_models_phi
            and not any(self.b_models_phi.values())
            and self.strategy_failures == 0
            and not any(self.calibration_failures.values())
            and self.prenex_agreement is not False
        )

    def records(self):
        """Ordered key/value pairs for the machine-readable report."""
        def tup(x):
            if x is None:
                return "none"
            a, e = x
            return "a=" + ",".join(map(str, a)) + ";e=" + ",".join(map(str, e))

        rows = [
            ("command", "counterexample"),
            ("n", self.n),
            ("k", self.k),
            ("mode", self.mode),
            ("seed", "none" if self.seed is None else self.seed),
            ("universe_size", universe_size(self.n, self.k)),
            ("a_models_phi", self.a_models_phi),
        ]
        for i, v in sorted(self.b_models_phi.items()):
            rows.append((f"b{i}_models_phi", v))
        rows += [
            ("strategy_checks", self.strategy_checks),
            ("distinct_maps", self.distinct_maps),
            ("strategy_failures", self.strategy_failures),
            ("first_failure", tup(self.first_failure)),
            ("calibration_checks", self.calibration_checks),
        ]
        for name in sorted(self.calibration_failures):
            rows.append((f"calibration_failures.{name}", self.calibration_failures[name]))
        rows += [
            ("first_calibration_failure", tup(self.first_calibration_failure)),
            ("prenex_prefix", self.prenex_prefix),
            ("prenex_universals", self.prenex_universals),
            ("prenex_agreement", "skipped" if self.prenex_agreement is None else self.prenex_agreement),
            ("prenex_note", self.prenex_note or "none"),
            ("literal_formula_checks", self.literal_checks),
            ("literal_formula_failures", self.literal_failures),
            ("literal_formula_first_failure", tup(self.literal_first_failure)),
            ("passed", self.passed),
        ]
        return rows


def _strategy_sweep(n, k, pairs_iter, report: CounterexampleReport, plans=None):
    """Run the strategy on every ``(a, e)`` pair from ``pairs_iter``."""
    A = build_A(n, k)
    Bs = [build_B(n, k, i) for i in range(k + 1)]
    plan_cache: Dict[tuple, Tuple[Dict[int, int], bool, Optional[str]]] = {}
    verdicts: Dict[tuple, bool] = {}
    cal_fail = report.calibration_failures
    for a, e in pairs_iter:
        istar = choose_istar(a, n, k)
        aset = frozenset(a)
        key = (aset, frozenset(e))
        cached = plan_cache.get(key)
        if cached is None:
            plan = segment_plan(e, n, k, istar, tuple(sorted(aset)))
            if plans is not None:
                plans.append(plan)
            cal = check_calibration(plan)
            bad = [name for name, ok in cal.items() if not ok]
            moved = {x: y for x, y in zip(plan.e, plan.response) if x != y}
            cached = (moved, bad)
            plan_cache[key] = cached
            report.calibration_checks += 1
            for name in cal:
                cal_fail.setdefault(name, 0)
            for name in bad:
                cal_fail[name] += 1
            if bad and report.first_calibration_failure is None:
                report.first_calibration_failure = (tuple(a), tuple(e))
        moved, _ = cached
        f = tuple(moved.get(x, x) for x in e)
        top = universe_size(n, k)
        pairs = frozenset([(1, 1), (top, top), *((x, x) for x in a), *zip(e, f)])
        ok = verdicts.get(pairs)
        if ok is None:
            ok = partial_iso_pairs(Bs[istar], A, pairs)
            verdicts[pairs] = ok
        report.strategy_checks += 1
        if not ok:
            report.strategy_failures += 1
            if report.first_failure is None:
                report.first_failure = (tuple(a), tuple(e))
    report.distinct_maps += len(verdicts)


def _sweep_chunk(n: int, k: int, firsts: Tuple[int, ...]) -> CounterexampleReport:
    U = build_A(n, k).elements
    part = CounterexampleReport(n=n, k=k, mode="exhaustive")
    pairs = (
        ((x,) + rest, e)
        for x in firsts
        for rest in itertools.product(U, repeat=k - 1)
        for e in itertools.product(U, repeat=n)
    )
    _strategy_sweep(n, k, pairs, part)
    return part


def _parallel_sweep(n: int, k: int, jobs: int, report: CounterexampleReport):
    from concurrent.futures import ProcessPoolExecutor

    U = build_A(n, k).elements
    size = -(-len(U) // jobs)
    chunks = [tuple(U[i : i + size]) for i in range(0, len(U), size)]
    with ProcessPoolExecutor(max_workers=min(jobs, len(chunks))) as pool:
        parts = list(pool.map(_sweep_chunk, [n] * len(chunks), [k] * len(chunks), chunks))
    # chunks follow the lexicographic order, so the first failure is preserved
    for part in parts:
        report.strategy_checks += part.strategy_checks
        report.distinct_maps += part.distinct_maps
        report.strategy_failures += part.strategy_failures
        report.calibration_checks += part.calibration_checks
        for name, count in part.calibration_failures.items():
            report.calibration_failures[name] = report.calibration_failures.get(name, 0) + count
        if report.first_failure is None:
            report.first_failure = part.first_failure
        if report.first_calibration_failure is None:
            report.first_calibration_failure = part.first_calibration_failure


def _literal_sweep(report: CounterexampleReport):
    """Exhaustive run of the literal (unsound) relocation at n = k = 1."""
    n = k = 1
    A = build_A(n, k)
    U = A.elements
    for a in itertools.product(U, repeat=k):
        istar = choose_istar(a, n, k)
        B = build_B(n, k, istar)
        for e in itertools.product(U, repeat=n):
            plan = segment_plan(e, n, k, istar, a, literal=True)
            report.literal_checks += 1
            if not partial_iso_pairs(B, A, rho_pairs(plan)):
                report.literal_failures += 1
                if report.literal_first_failure is None:
                    report.literal_first_failure = (tuple(a), tuple(e))


def verify_counterexample(
    n: int,
    k: int,
    mode: str = "exhaustive",
    count: int = 10_000,
    seed: Optional[int] = None,
    budget: int = DEFAULT_BUDGET,
    prenex_budget: int = 200_000,
    literal_check: bool = True,
    jobs: int = 1,
) -> CounterexampleReport:
    """Check the model facts and the duplicator strategy at ``(n, k)``.

    ``mode`` is ``"exhaustive"`` (all witness tuples in ``A^k`` against all
    ``e`` in ``B^n``) or ``"sample"`` (``count`` seeded random pairs).
    With ``jobs > 1`` the exhaustive sweep is split on the first witness
    across worker processes; ``distinct_maps`` and ``calibration_checks``
    are then summed per-worker counts.
    """
    _check_params(n, k)
    if mode not in ("exhaustive", "sample"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "sample" and seed is None:
        raise ValueError("sampled mode needs a seed")
    t0 = time.perf_counter()
    top = universe_size(n, k)
    space = top ** (k + n)
    if mode == "exhaustive" and space > budget:
        raise BudgetExceeded(f"{space} (a, e) pairs exceed the budget {budget}")
    report = CounterexampleReport(n=n, k=k, mode=mode, seed=seed)
    A = build_A(n, k)
    f = phi(k)
    report.a_models_phi = evaluate(A, f)
    for i in range(k + 1):
        report.b_models_phi[i] = evaluate(build_B(n, k, i), f)

    U = A.elements
    if mode == "exhaustive" and jobs > 1 and k > 0:
        _parallel_sweep(n, k, jobs, report)
        pairs = iter(())
    elif mode == "exhaustive":
        pairs = (
            (a, e)
            for a in itertools.product(U, repeat=k)
            for e in itertools.product(U, repeat=n)
        )
    else:
        rng = random.Random(seed)

        def draw():
            for _ in range(count):
                a = tuple(rng.randint(1, top) for _ in range(k))
                e = tuple(rng.randint(1, top) for _ in range(n))
                yield a, e

        pairs = draw()
    _strategy_sweep(n, k, pairs, report)

    prefix = phi_prenex_prefix(k)
    report.prenex_prefix = str(prefix)
    report.prenex_universals = prefix.count(FORALL)
    # phi_prenex costs about |U|^(k+1) existential assignments per structure
    cost = top ** (k + 1) * (k + 2)
    if cost <= prenex_budget:
        g = phi_prenex(k)
        agree = evaluate(A, g) == report.a_models_phi
        for i in range(k + 1):
            agree &= evaluate(build_B(n, k, i), g) == report.b_models_phi[i]
        report.prenex_agreement = agree
    else:
        report.prenex_note = f"agreement skipped: estimated cost {cost} > {prenex_budget}"
    if literal_check:
        _literal_sweep(report)
    report.elapsed = time.perf_counter() - t0
    log.info("counterexample n=%d k=%d: %d checks, %d failures", n, k,
             report.strategy_checks, report.strategy_failures)
    return report


def iter_plans(n: int, k: int, pairs) -> List[SegmentPlan]:
    """Segment plans for the given ``(a, e)`` pairs (deduplicated by sets)."""
    report = CounterexampleReport(n=n, k=k, mode="plans")
    plans: List[SegmentPlan] = []
    _strategy_sweep(n, k, pairs, report, plans)
    return plans
