import itertools

import pytest
from hypothesis import given, strategies as st

from helpers import random_tau_structure, seeded
from fmt_workbench.counterexample import (
    TAU,
    BudgetExceeded,
    build_A,
    build_B,
    check_calibration,
    choose_istar,
    contiguous_segments,
    duplicator_response,
    phi,
    phi_prenex,
    phi_prenex_prefix,
    rho_pairs,
    segment_plan,
    universe_size,
    verify_counterexample,
    xi,
)
from fmt_workbench.errors import PreconditionFailed, WrongArity
from fmt_workbench.logic import Not, classify_prefix, evaluate, prefix_of
from fmt_workbench.structures import (
    Structure,
    enumerate_substructures,
    induced_substructure,
    is_partial_isomorphism,
    partial_iso_pairs,
)


def _P(S):
    return sorted(x for (x,) in S.relations["P"])


# -- structures ------------------------------------------------------------------------


@pytest.mark.parametrize(
    "n, k, size, P",
    [(1, 1, 18, [5, 14]), (2, 3, 68, [9, 26, 43, 60]), (1, 0, 9, [5])],
)
def test_build_A(n, k, size, P):
    A = build_A(n, k)
    assert len(A) == size == universe_size(n, k)
    assert _P(A) == P
    assert dict(A.constants) == {"c": 1, "d": size}
    assert A.relations["S"] == {(i, i + 1) for i in range(1, size)}
    assert A.relations["le"] == {(i, j) for i in range(1, size + 1) for j in range(i, size + 1)}


def test_build_B():
    assert _P(build_B(1, 1, 0)) == [14]
    assert _P(build_B(1, 1, 1)) == [5]
    B = build_B(2, 3, 2)
    assert _P(B) == [9, 26, 60]
    assert B.relations["le"] == build_A(2, 3).relations["le"]
    with pytest.raises(PreconditionFailed):
        build_B(1, 1, 2)


def test_parameter_validation():
    with pytest.raises(ValueError):
        build_A(0, 1)
    with pytest.raises(ValueError):
        build_A(1, -1)


# -- sentences ---------------------------------------------------------------------------


def test_xi_examples():
    A = build_A(1, 1)
    assert evaluate(A, xi(4, 1))
    assert not evaluate(A, xi(5, 1))
    empty_succ = Structure(TAU, [1, 2], {"le": [(1, 1), (1, 2), (2, 2)]}, {"c": 1, "d": 2})
    assert not evaluate(empty_succ, xi(4, 0))
    for n, k in [(1, 1), (2, 2)]:
        for i in range(k + 1):
            assert evaluate(build_B(n, k, i), xi(5, k))
    with pytest.raises(ValueError):
        xi(6, 1)


def test_xi5_prefix():
    assert str(classify_prefix(xi(5, 1))) == "∀^2"


def test_phi_single_point():
    S = Structure(TAU, [1], {"le": [(1, 1)]}, {"c": 1, "d": 1})
    assert not evaluate(S, phi(0))


@pytest.mark.parametrize("n, k", [(1, 0), (1, 1), (2, 1), (1, 2)])
def test_phi_separates_A_from_B(n, k):
    assert evaluate(build_A(n, k), phi(k))
    for i in range(k + 1):
        assert not evaluate(build_B(n, k, i), phi(k))


def test_phi_prenex_prefix():
    for k in range(4):
        prefix = phi_prenex_prefix(k)
        assert prefix_of(phi_prenex(k)) == prefix
        assert prefix.blocks[0] == ("exists", k + 1)
        assert str(prefix) == f"∃^{k + 1}∀^3"
        assert classify_prefix(phi_prenex(k)).leading_existentials == k + 1


@pytest.mark.parametrize("n, k", [(1, 0), (1, 1), (2, 1)])
def test_phi_prenex_agrees_on_grid(n, k):
    g, f = phi_prenex(k), phi(k)
    assert evaluate(build_A(n, k), g) == evaluate(build_A(n, k), f)
    for i in range(k + 1):
        B = build_B(n, k, i)
        assert evaluate(B, g) == evaluate(B, f)


def test_phi_prenex_agrees_on_random_structures():
    rng = seeded(42)
    true_seen = 0
    for _ in range(200):
        S = random_tau_structure(rng, rng.randint(1, 5))
        k = rng.randint(0, 2)
        v = evaluate(S, phi(k))
        true_seen += v
        assert evaluate(S, phi_prenex(k)) == v
    # the generator must reach both verdicts
    assert 0 < true_seen < 200


def test_negated_phi_extension_closed_on_samples():
    rng = seeded(3)
    checked = 0
    for _ in range(300):
        big = random_tau_structure(rng, rng.randint(2, 6))
        k = rng.randint(0, 2)
        big_neg = evaluate(big, Not(phi(k)))
        for sub in enumerate_substructures(big):
            if evaluate(sub, Not(phi(k))):
                checked += 1
                assert big_neg
    assert checked > 100


@given(st.integers(0, 100_000), st.integers(0, 2))
def test_phi_hereditary_on_random_structures(seed, k):
    rng = seeded(seed)
    S = random_tau_structure(rng, rng.randint(1, 6))
    if not evaluate(S, phi(k)):
        return
    for sub in enumerate_substructures(S):
        assert evaluate(sub, phi(k))


# -- strategy ------------------------------------------------------------------------------


def test_choose_istar_examples():
    assert choose_istar((14,), 1, 1) == 0
    assert choose_istar((3,), 1, 1) == 1
    assert choose_istar((3, 14), 1, 2) == 2
    assert choose_istar((), 1, 0) == 0
    with pytest.raises(PreconditionFailed):
        choose_istar((3, 14), 1, 1)


def test_contiguous_segments():
    assert contiguous_segments([5, 3, 4, 9, 9, 11]) == [(3, 5), (9, 9), (11, 11)]
    assert contiguous_segments([]) == []


def test_segment_plan_n2_relocation():
    plan = segment_plan((4, 5), 2, 1, 0)
    assert plan.cs == ((4, 5),)
    assert plan.cs2 == ((4, 5),)
    assert plan.cs3 == ((3, 4),)
    assert plan.response == (3, 4)
    assert plan.cs3_start_offset == 3


def test_segment_plan_n2_identity():
    plan = segment_plan((20, 33), 2, 1, 0)
    assert plan.cs1 == ((20, 20), (33, 33))
    assert plan.cs2 == ()
    assert plan.response == (20, 33)


def test_segment_plan_n1_answer_is_three():
    # starting at offset n+1 = 2 would put the answer next to c
    plan = segment_plan((4,), 1, 1, 0)
    assert plan.cs2 == ((4, 4),)
    assert plan.response == (3,)
    literal = segment_plan((4,), 1, 1, 0, literal=True)
    assert literal.response == (2,)
    A, B = build_A(1, 1), build_B(1, 1, 0)
    assert partial_iso_pairs(B, A, rho_pairs(plan))
    assert not partial_iso_pairs(B, A, rho_pairs(literal))


def test_segment_plan_errors():
    with pytest.raises(WrongArity):
        segment_plan((4, 5), 1, 1, 0)
    with pytest.raises(PreconditionFailed):
        segment_plan((40,), 1, 1, 0)
    with pytest.raises(PreconditionFailed):
        segment_plan((4,), 1, 1, 0, witnesses=(5,))


def test_duplicator_response_examples():
    istar, f, rho = duplicator_response(1, 1, (14,), (4,))
    assert istar == 0 and f == (3,)
    assert rho.as_dict() == {1: 1, 4: 3, 14: 14, 18: 18}
    assert is_partial_isomorphism(rho)
    # e repeats a witness: the pair collapses
    istar, f, rho = duplicator_response(1, 1, (14,), (14,))
    assert f == (14,) and rho.as_dict() == {1: 1, 14: 14, 18: 18}
    istar, f, rho = duplicator_response(1, 1, (14,), (1,))
    assert f == (1,) and rho.as_dict()[1] == 1
    with pytest.raises(PreconditionFailed):
        duplicator_response(1, 1, (3, 14), (4,))


def test_literal_relocation_is_unsound_at_n1_k1():
    report = verify_counterexample(1, 1)
    assert report.literal_checks == 324
    assert report.literal_failures == 91
    assert report.literal_first_failure == ((1,), (17,))


@pytest.mark.parametrize("n, k", [(1, 0), (1, 1), (2, 1)])
def test_calibration_on_every_plan(n, k):
    U = range(1, universe_size(n, k) + 1)
    for a in itertools.product(U, repeat=k):
        istar = choose_istar(a, n, k)
        for e in itertools.product(U, repeat=n):
            plan = segment_plan(e, n, k, istar, a)
            assert all(check_calibration(plan).values()), (a, e)
            lo = plan.block_start
            if plan.cs3:
                assert plan.cs3[-1][1] <= (8 * n + 1) * istar + 3 * n + 1
                assert plan.cs3[0][0] >= lo + n


@given(st.integers(0, 100_000), st.integers(1, 3), st.integers(0, 3))
def test_strategy_sound_on_random_pairs(seed, n, k):
    rng = seeded(seed)
    top = universe_size(n, k)
    a = tuple(rng.randint(1, top) for _ in range(k))
    e = tuple(rng.randint(1, top) for _ in range(n))
    istar, f, rho = duplicator_response(n, k, a, e)
    assert rho.source == build_B(n, k, istar)
    assert is_partial_isomorphism(rho)
    assert all(check_calibration(segment_plan(e, n, k, istar, a)).values())


# -- verification harness ---------------------------------------------------------------


def test_verify_small_exhaustive():
    report = verify_counterexample(1, 1)
    assert report.passed
    assert report.strategy_checks == 324
    assert report.strategy_failures == 0
    assert report.prenex_agreement is True
    assert report.prenex_prefix == "∃^2∀^3"
    keys = [k for k, _ in report.records()]
    assert keys[0] == "command" and "passed" in keys
    assert len(keys) == len(set(keys))


def test_verify_k0():
    report = verify_counterexample(1, 0)
    assert report.passed and report.strategy_checks == 9


def test_verify_budget_and_seed():
    with pytest.raises(BudgetExceeded):
        verify_counterexample(2, 2, budget=1000)
    with pytest.raises(ValueError):
        verify_counterexample(1, 1, mode="sample", count=10)
    with pytest.raises(ValueError):
        verify_counterexample(1, 1, mode="bogus")


def test_sampled_run_is_reproducible():
    r1 = verify_counterexample(3, 2, mode="sample", count=300, seed=9, literal_check=False)
    r2 = verify_counterexample(3, 2, mode="sample", count=300, seed=9, literal_check=False)
    assert r1.passed and r1.strategy_checks == 300
    assert r1.records() == r2.records()


def test_parallel_sweep_matches_sequential():
    seq = verify_counterexample(2, 1, literal_check=False)
    par = verify_counterexample(2, 1, literal_check=False, jobs=2)
    assert par.strategy_checks == seq.strategy_checks == 39304
    assert par.strategy_failures == seq.strategy_failures == 0
    assert par.first_failure == seq.first_failure


def test_failures_are_reported_with_the_offending_pair(monkeypatch):
    from fmt_workbench import counterexample as cx

    real = cx.segment_plan

    def broken(e, n, k, istar, witnesses=(), literal=False):
        return real(e, n, k, istar, witnesses, literal=True)

    monkeypatch.setattr(cx, "segment_plan", broken)
    report = cx.verify_counterexample(1, 1, literal_check=False)
    assert not report.passed
    assert report.strategy_failures == 91
    assert report.first_failure == ((1,), (17,))


def test_substructure_of_A_still_models_phi():
    A = build_A(1, 1)
    assert evaluate(induced_substructure(A, {1, 5, 14, 18}), phi(1))
    assert evaluate(induced_substructure(A, {1, 18}), phi(1))


def test_negation_of_phi_on_B():
    assert evaluate(build_B(1, 1, 0), Not(phi(1)))
