import numpy as np
import pytest

import oracles as O
from pfgame import Operator, Var, relabel, tensor_to_operator
from pfgame.decide import (CertificateError, DecisionReport, brute_force_existence,
                           certify_disjoint_dominions, decide_existence, decide_tensor_pattern,
                           decide_uniqueness, second_eigenvector)
from pfgame.games import AT_INFINITY, LocalAt, Player, is_dominion
from pfgame.numerics import (NonConvergence, SolveConfig, hilbert_seminorm, mean_payoff,
                             perturb_diagonal, slice_membership, solve_ergodic)
from pfgame.testing import planted_dominions, random_minmax_affine, random_tensor


def check_witness(op, report):
    if report.disjoint:
        assert report.I and report.J and not report.I & report.J
        assert is_dominion(op, report.game, Player.MIN, report.I)
        assert is_dominion(op, report.game, Player.MAX, report.J)


def test_running_existence(running):
    r = decide_existence(running)
    assert r.verdict == "NoDisjointDominions" and r.path == "General"
    assert brute_force_existence(running).verdict == r.verdict


def test_blackmailer_existence(blackmailer):
    r = decide_existence(blackmailer)
    assert r.verdict == "NoDisjointDominions"
    assert brute_force_existence(blackmailer).verdict == r.verdict


def test_identity(identity2):
    r = decide_existence(identity2)
    assert r.disjoint and r.I == {0} and r.J == {1}
    assert decide_existence(identity2, path="general").I == {0}
    assert brute_force_existence(identity2).disjoint
    assert decide_uniqueness(identity2, [0, 0]).disjoint


def test_running_uniqueness(running):
    r = decide_uniqueness(running, O.RUNNING_U)
    I, J = O.RUNNING_LOCAL_WITNESS
    assert r.disjoint
    assert (set(i + 1 for i in r.I), set(j + 1 for j in r.J)) == (I, J)
    assert isinstance(r.game, LocalAt)
    check_witness(running, r)
    d = r.to_dict()
    assert d["I"] == [1, 2] and d["J"] == [3] and d["game"] == "LocalAt"


def test_uniqueness_rejects_non_eigenvector(running):
    with pytest.raises(ValueError):
        decide_uniqueness(running, [0, 0, 0])


def test_report_json_shape(running):
    d = decide_existence(running).to_dict()
    assert set(d) == {"verdict", "I", "J", "game", "oracle_calls", "path"}


def test_certificate_identity(identity2):
    r = decide_existence(identity2)
    c = certify_disjoint_dominions(identity2, r)
    assert (c.alpha, c.beta, c.s, c.verified) == (0.0, 0.0, 1.0, True)
    S = Operator(2, (Var(0), Var(1)))
    # S^k(0) = (0, k) so k^-1 S^k(0) = (0, 1)
    assert c.gap == pytest.approx(1.0)


def test_certificate_rejects_local_reports(running):
    r = decide_uniqueness(running, O.RUNNING_U)
    with pytest.raises(ValueError):
        certify_disjoint_dominions(running, r)
    with pytest.raises(ValueError):
        certify_disjoint_dominions(running, decide_existence(running))


def test_certificate_rejects_bogus_pair(running):
    fake = DecisionReport("DisjointDominions", frozenset({0}), frozenset({2}), AT_INFINITY, 0, "General")
    with pytest.raises(CertificateError):
        certify_disjoint_dominions(running, fake)


def test_second_eigenvector_running(running):
    v = second_eigenvector(running, O.RUNNING_U, {0, 1}, {2})
    assert np.max(np.abs(running(v) - v)) <= 1e-9
    assert hilbert_seminorm(v - np.array(O.RUNNING_U)) > 0
    assert slice_membership(running, O.RUNNING_OTHER_EIGENVECTOR, 0, 0)


def test_second_eigenvector_identity(identity2):
    v = second_eigenvector(identity2, [0, 0], {0}, {1})
    assert v[0] == 0 and v[1] > 0
    assert np.array_equal(identity2(v), v)


@pytest.mark.parametrize("seed", range(30))
def test_planted(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    op, u0, lam, I, J = planted_dominions(n, rng)
    r = decide_existence(op)
    check_witness(op, r)
    assert r.disjoint and brute_force_existence(op).disjoint
    cert = certify_disjoint_dominions(op, r)
    assert cert.verified and cert.gap >= cert.s - (cert.beta - cert.alpha) - 1e-9
    ru = decide_uniqueness(op, u0)
    check_witness(op, ru)
    assert ru.disjoint
    v = second_eigenvector(op, u0, ru.I, ru.J, lam)
    assert np.max(np.abs(op(v) - lam - v)) <= 1e-9
    assert hilbert_seminorm(v - u0) > 0


@pytest.mark.parametrize("seed", range(40))
def test_random_against_brute_force(seed):
    rng = np.random.default_rng(500 + seed)
    op = random_minmax_affine(4, rng)
    r = decide_existence(op)
    assert r.verdict == brute_force_existence(op).verdict
    check_witness(op, r)


@pytest.mark.parametrize("seed", range(40))
def test_convex_fast_path_matches_general(seed):
    rng = np.random.default_rng(900 + seed)
    n = int(rng.integers(2, 5))
    F = random_tensor(n, 3, rng, density=0.12)
    op = tensor_to_operator(F)
    fast = decide_existence(op, path="convex")
    slow = decide_existence(op, path="general")
    assert fast.path == "ConvexFast" and slow.path == "General"
    assert fast.verdict == slow.verdict == brute_force_existence(op).verdict
    assert decide_tensor_pattern(F.pattern).verdict == fast.verdict
    check_witness(op, fast)
    check_witness(op, slow)


@pytest.mark.parametrize("seed", range(15))
def test_local_fast_path_matches_general(seed):
    rng = np.random.default_rng(1300 + seed)
    n = int(rng.integers(2, 5))
    op = tensor_to_operator(random_tensor(n, 2 + seed % 2, rng, density=0.3))
    try:
        w = solve_ergodic(op)
    except NonConvergence:
        # bounded slice spaces would guarantee an eigenvector
        assert decide_existence(op).disjoint
        return
    fast = decide_uniqueness(op, w.u, path="convex")
    slow = decide_uniqueness(op, w.u, path="general")
    assert fast.verdict == slow.verdict
    assert fast.verdict == brute_force_existence(op, fast.game).verdict
    check_witness(op, fast)
    check_witness(op, slow)


def test_path_argument(running):
    with pytest.raises(ValueError):
        decide_existence(running, path="convex")
    with pytest.raises(ValueError):
        decide_existence(running, path="fast")


@pytest.mark.parametrize("seed", range(20))
def test_threads_give_same_witness(seed):
    rng = np.random.default_rng(1500 + seed)
    op = random_minmax_affine(5, rng)
    a = decide_existence(op, path="general")
    b = decide_existence(op, path="general", threads=4)
    assert (a.verdict, a.I, a.J) == (b.verdict, b.I, b.J)


@pytest.mark.parametrize("seed", range(20))
def test_shift_and_permutation_invariance(seed):
    rng = np.random.default_rng(1700 + seed)
    n = 4
    op = random_minmax_affine(n, rng)
    base = decide_existence(op)
    shifted = decide_existence(perturb_diagonal(op, rng.normal(size=n) * 3))
    assert (shifted.verdict, shifted.I, shifted.J) == (base.verdict, base.I, base.J)
    perm = rng.permutation(n).tolist()
    pop = relabel(op, perm)
    r = decide_existence(pop)
    assert r.verdict == base.verdict
    check_witness(pop, r)
    if base.disjoint:
        mapped = DecisionReport(base.verdict, frozenset(perm[i] for i in base.I),
                                frozenset(perm[j] for j in base.J), AT_INFINITY, 0, base.path)
        check_witness(pop, mapped)


@pytest.mark.parametrize("seed", range(12))
def test_no_disjoint_implies_solvable(seed):
    rng = np.random.default_rng(2100 + seed)
    for _ in range(50):
        op = random_minmax_affine(3, rng)
        if not decide_existence(op).disjoint:
            break
    else:
        pytest.skip("no bounded instance drawn")
    solve_ergodic(op)
    for _ in range(20):
        w = solve_ergodic(perturb_diagonal(op, rng.normal(size=3) * 2))
        assert w.residual < 1e-8


@pytest.mark.parametrize("seed", range(6))
def test_unique_eigenvector_restarts(seed):
    rng = np.random.default_rng(2500 + seed)
    n = 4
    for _ in range(100):
        F = random_tensor(n, 3, rng, density=0.3)
        op = tensor_to_operator(F)
        w = solve_ergodic(op)
        if not decide_uniqueness(op, w.u).disjoint:
            break
    else:
        pytest.skip("no unique instance drawn")
    for _ in range(50):
        w2 = solve_ergodic(op, rng.normal(size=n) * 5)
        assert hilbert_seminorm(w2.u - w.u) < 1e-6


def test_disjoint_mean_payoff_separates(identity2):
    r = decide_existence(identity2)
    c = certify_disjoint_dominions(identity2, r)
    S = perturb_diagonal(identity2, [0.0, c.s])
    mp = mean_payoff(S, 1000)
    assert mp[1] - mp[0] >= c.s - (c.beta - c.alpha) - 1e-6


def test_brute_force_guard():
    with pytest.raises(ValueError):
        brute_force_existence(Operator(6, tuple(Var(i) for i in range(6))))
