import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import crbeam.sdp as sdp
from crbeam.channel import InterferenceLimit, PowerConstraint, derive_channel, secrecy_rate

from conftest import cgauss, random_real


def trace_row(n, sense, rhs):
    return sdp.LinearConstraint(np.eye(n), sense, rhs)


def rand_herm(rng, n, scale=1.0):
    A = cgauss(rng, n * n, scale).reshape(n, n)
    return (A + A.conj().T) / 2


def test_maximize_trace_under_trace_cap():
    p = sdp.SdpProblem(dim=2, C=np.eye(2), constraints=[trace_row(2, "<=", 1.0)])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.OPTIMAL
    assert sol.objective == pytest.approx(1.0, abs=1e-7)
    assert sol.max_violation <= 1e-7 * 2


def test_negative_trace_cap_infeasible_with_certificate():
    p = sdp.SdpProblem.feasibility(2, [trace_row(2, "<=", -1.0)])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.INFEASIBLE
    c = sol.certificate
    assert c is not None
    # Farkas: sum c_i A_i <= 0 on the cone, sum c_i b_i = 1, c respects senses
    assert c[0] <= 0  # row is a <= row
    S = c[0] * np.eye(2)
    assert np.linalg.eigvalsh(S).max() <= 1e-6
    assert c[0] * (-1.0) == pytest.approx(1.0, rel=1e-4)


def test_indefinite_objective_puts_mass_on_positive_direction():
    p = sdp.SdpProblem(dim=2, C=np.diag([1.0, -1.0]), constraints=[trace_row(2, "<=", 1.0)])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.OPTIMAL
    assert sol.objective == pytest.approx(1.0, abs=1e-7)
    assert sol.X[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert abs(sol.X[1, 1]) <= 1e-6


def test_feasible_trivial_cases():
    assert sdp.feasible(sdp.SdpProblem.feasibility(3, []))
    p = sdp.SdpProblem.feasibility(2, [trace_row(2, ">=", 1.0), trace_row(2, "<=", 0.5)])
    assert not sdp.feasible(p)


def test_feasible_construct_then_check(rng):
    # constraints pinned to a known PSD point must come back feasible
    for _ in range(10):
        n = int(rng.integers(2, 6))
        W = cgauss(rng, n * n).reshape(n, n)
        X0 = W @ W.conj().T
        rows = []
        for _ in range(4):
            A = rand_herm(rng, n)
            v = float(np.vdot(A, X0).real)
            rows.append(sdp.LinearConstraint(A, "==", v))
        assert sdp.feasible(sdp.SdpProblem.feasibility(n, rows))


def test_solution_invariants_on_random_instances(rng):
    # objective bounded by a trace cap; every returned X must satisfy the
    # published tolerance contract
    for _ in range(15):
        n = int(rng.integers(2, 7))
        rows = [trace_row(n, "<=", float(1 + rng.random() * 3))]
        for _ in range(int(rng.integers(1, 4))):
            A = rand_herm(rng, n)
            rows.append(sdp.LinearConstraint(A, "<=", float(rng.random() * 2 + 0.5)))
        p = sdp.SdpProblem(dim=n, C=rand_herm(rng, n), constraints=rows)
        sol = sdp.solve(p)
        assert sol.status == sdp.SdpStatus.OPTIMAL
        assert np.linalg.eigvalsh(sol.X).min() >= -1e-8
        for row in rows:
            v = float(np.vdot(row.matrix, sol.X).real)
            slack = 1e-7 * (1 + abs(row.rhs))
            if row.sense == "<=":
                assert v <= row.rhs + slack
            elif row.sense == ">=":
                assert v >= row.rhs - slack
            else:
                assert abs(v - row.rhs) <= slack


def test_redundant_constraint_translation_consistency(rng):
    n = 3
    C = rand_herm(rng, n)
    rows = [trace_row(n, "<=", 2.0)]
    base = sdp.solve(sdp.SdpProblem(dim=n, C=C, constraints=rows))
    # a constraint the solution satisfies strictly must not move the optimum
    loose = sdp.LinearConstraint(np.eye(n), "<=", 100.0)
    again = sdp.solve(sdp.SdpProblem(dim=n, C=C, constraints=rows + [loose]))
    assert again.objective == pytest.approx(base.objective, abs=1e-6 * (1 + abs(base.objective)))


def test_duplicate_rows_are_harmless():
    row = trace_row(2, "<=", 1.0)
    p = sdp.SdpProblem(dim=2, C=np.eye(2), constraints=[row, row, row])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.OPTIMAL
    assert sol.objective == pytest.approx(1.0, abs=1e-7)


def test_equality_rows(rng):
    n = 3
    p = sdp.SdpProblem(dim=n, C=np.diag([1.0, 0.0, 0.0]),
                       constraints=[trace_row(n, "==", 1.5)])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.OPTIMAL
    assert np.trace(sol.X).real == pytest.approx(1.5, abs=1e-6)
    assert sol.objective == pytest.approx(1.5, abs=1e-6)


def test_infeasible_certificate_verifies_on_mixed_rows(rng):
    # contradictory pair hidden among satisfiable rows
    n = 3
    A = rand_herm(rng, n)
    rows = [
        sdp.LinearConstraint(A, "<=", 5.0),
        trace_row(n, ">=", 2.0),
        trace_row(n, "<=", 1.0),
    ]
    sol = sdp.solve(sdp.SdpProblem.feasibility(n, rows))
    assert sol.status == sdp.SdpStatus.INFEASIBLE
    c = sol.certificate
    S = sum(ci * r.matrix for ci, r in zip(c, rows))
    scale = max(np.linalg.norm(r.matrix) * abs(ci) for ci, r in zip(c, rows))
    assert np.linalg.eigvalsh(S).max() <= 1e-6 * max(scale, 1e-12)
    assert sum(ci * r.rhs for ci, r in zip(c, rows)) == pytest.approx(1.0, rel=1e-4)
    for ci, r in zip(c, rows):
        if r.sense == "<=":
            assert ci <= 1e-9
        elif r.sense == ">=":
            assert ci >= -1e-9


def test_unbounded_objective_is_numerical_failure():
    p = sdp.SdpProblem(dim=2, C=np.eye(2), constraints=[])
    sol = sdp.solve(p)
    assert sol.status == sdp.SdpStatus.NUMERICAL_FAILURE
    p2 = sdp.SdpProblem(dim=2, C=np.eye(2),
                        constraints=[sdp.LinearConstraint(np.diag([1.0, 0.0]), "<=", 1.0)])
    sol2 = sdp.solve(p2)
    assert sol2.status == sdp.SdpStatus.NUMERICAL_FAILURE


def test_constraint_validation():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])  # not Hermitian
    with pytest.raises(ValueError):
        sdp.LinearConstraint(bad, "<=", 1.0)
    with pytest.raises(ValueError):
        sdp.LinearConstraint(np.eye(2), "<", 1.0)
    with pytest.raises(ValueError):
        sdp.SdpProblem(dim=3, C=np.eye(2), constraints=[])


def test_rank_one_extract_recovers_vector(rng):
    w = cgauss(rng, 5, 2.0)
    out = sdp.rank_one_extract(np.outer(w, w.conj()), 1e-6)
    assert out is not None
    phase = np.vdot(out, w)
    phase /= abs(phase)
    assert np.allclose(out * phase, w, atol=1e-8 * np.linalg.norm(w))


def test_rank_one_extract_refuses_identity():
    assert sdp.rank_one_extract(np.eye(3), 1e-6) is None


def test_rank_one_extract_dominant_component(rng):
    w = cgauss(rng, 4)
    w /= np.linalg.norm(w)
    u = cgauss(rng, 4)
    u -= np.vdot(w, u) * w
    u /= np.linalg.norm(u)
    X = 0.999 * np.outer(w, w.conj()) + 0.001 * np.outer(u, u.conj())
    out = sdp.rank_one_extract(X, ratio_tol=1e-2)
    assert out is not None
    assert abs(np.vdot(out / np.linalg.norm(out), w)) == pytest.approx(1.0, abs=1e-6)
    assert sdp.rank_ratio_of(X) == pytest.approx(0.001 / 0.999, rel=1e-6)


def test_randomization_rank_one_input_matches_extraction(rng):
    from crbeam.linalg import null_space_basis
    real = random_real(rng, M=3)
    dc = derive_channel(real)
    # direction with Γ_e = 0 so its secrecy rate is positive and the zero
    # vector cannot win the candidate comparison
    w = null_space_basis([dc.hz])[:, 0]
    X = np.outer(w, w.conj())
    pc = PowerConstraint.total(2.0)
    lim = InterferenceLimit(1.0)
    got = sdp.gaussian_randomization(X, dc, pc, lim, n_samples=50, seed=7)
    dir_ref = w / np.linalg.norm(w)
    # all candidates collinear with w: output direction fixed, scale at the
    # binding constraint
    assert abs(np.vdot(got / np.linalg.norm(got), dir_ref)) == pytest.approx(1.0, abs=1e-9)
    s = sdp.max_feasible_scale(got, dc, pc, [(dc.hk, dc.Dk, lim.gamma)])
    assert s == pytest.approx(1.0, abs=1e-6)  # scaled onto the boundary


def test_randomization_deterministic_and_feasible(rng):
    from crbeam.channel import check_feasible
    real = random_real(rng, M=4)
    dc = derive_channel(real)
    X = np.eye(4) * 0.5
    pc = PowerConstraint.both(2.0, np.full(4, 0.7))
    lim = InterferenceLimit(0.8)
    a = sdp.gaussian_randomization(X, dc, pc, lim, n_samples=80, seed=3)
    b = sdp.gaussian_randomization(X, dc, pc, lim, n_samples=80, seed=3)
    assert np.array_equal(a, b)
    assert check_feasible(dc, a, pc, lim).ok


@given(seed=st.integers(0, 2**31))
@settings(max_examples=15, deadline=None)
def test_randomized_rate_below_relaxation_bound(seed):
    # the relaxation objective upper-bounds any rank-one candidate drawn
    # from its solution
    rng = np.random.default_rng(seed)
    real = random_real(rng, M=3)
    dc = derive_channel(real)
    pc = PowerConstraint.total(1.5)
    lim = InterferenceLimit(1.0)
    # maximize destination signal power under the power/interference rows
    Sg = dc.Dh + dc.ps * np.outer(dc.hg, dc.hg.conj())
    rows = [
        sdp.LinearConstraint(np.eye(3), "<=", 1.5),
        sdp.LinearConstraint(dc.Dk + dc.ps * np.outer(dc.hk, dc.hk.conj()), "<=", 1.0),
    ]
    sol = sdp.solve(sdp.SdpProblem(dim=3, C=Sg, constraints=rows))
    assert sol.status == sdp.SdpStatus.OPTIMAL
    w = sdp.gaussian_randomization(sol.X, dc, pc, lim, n_samples=60, seed=seed)
    val = float(np.vdot(w, Sg @ w).real)
    assert val <= sol.objective * (1 + 1e-6) + 1e-9


def test_max_feasible_scale_caps():
    from crbeam.channel import interference
    rng = np.random.default_rng(5)
    real = random_real(rng, M=3)
    dc = derive_channel(real)
    w = cgauss(rng, 3, 2.0)
    pc = PowerConstraint.total(1.0)
    s = sdp.max_feasible_scale(w, dc, pc, [(dc.hk, dc.Dk, 0.5)])
    v = s * w
    assert np.sum(np.abs(v) ** 2) <= 1.0 + 1e-9
    assert interference(dc, v) <= 0.5 + 1e-9
    # at least one cap binds
    binds = [abs(np.sum(np.abs(v) ** 2) - 1.0) <= 1e-7,
             abs(interference(dc, v) - 0.5) <= 1e-7]
    assert any(binds)


def test_diag_bound_constraints():
    rows = sdp.diag_bound_constraints(np.array([0.5, 0.7, 0.9]))
    assert len(rows) == 3
    for m, r in enumerate(rows):
        assert r.sense == "<="
        assert r.matrix[m, m] == 1.0
        assert np.count_nonzero(r.matrix) == 1
