import numpy as np
import pytest

from crbeam import linalg as la

from conftest import cgauss


def rand_herm(rng, n, scale=1.0):
    A = cgauss(rng, n * n, scale).reshape(n, n)
    return (A + A.conj().T) / 2


def rand_psd(rng, n, scale=1.0):
    A = cgauss(rng, n * n, scale).reshape(n, n)
    return A @ A.conj().T


def test_eig_identity():
    e = la.hermitian_eig(np.eye(3))
    assert np.allclose(e.eigenvalues, [1, 1, 1])


def test_eig_diag_ascending():
    e = la.hermitian_eig(np.diag([3.0, 1.0]))
    assert np.allclose(e.eigenvalues, [1, 3])


def test_eig_residuals(rng):
    for _ in range(20):
        A = rand_herm(rng, 5, 2.0)
        e = la.hermitian_eig(A)
        nrm = max(np.abs(e.eigenvalues))
        for i in range(5):
            u = e.eigenvectors[:, i]
            assert np.linalg.norm(A @ u - e.eigenvalues[i] * u) <= 1e-10 * max(nrm, 1e-30)
        assert np.linalg.norm(e.eigenvectors.conj().T @ e.eigenvectors - np.eye(5)) <= 1e-10


def test_eig_rejects_nonsquare():
    with pytest.raises(ValueError):
        la.hermitian_eig(np.ones((2, 3)))


def test_gen_eig_rank_one_against_identity(rng):
    a = cgauss(rng, 4, 2.0)
    lam, u = la.generalized_eig_max(np.outer(a, a.conj()), np.eye(4))
    assert lam == pytest.approx(np.linalg.norm(a) ** 2, rel=1e-12)
    assert abs(np.vdot(u, a / np.linalg.norm(a))) == pytest.approx(1.0, abs=1e-10)


def test_gen_eig_decoupled_ratios():
    lam, u = la.generalized_eig_max(np.diag([1.0, 2.0]), np.diag([1.0, 4.0]))
    assert lam == pytest.approx(1.0, rel=1e-12)
    assert abs(u[0]) == pytest.approx(1.0, abs=1e-10)


def test_gen_eig_random_rayleigh_oracle(rng):
    A = rand_herm(rng, 4)
    B = rand_psd(rng, 4) + 0.5 * np.eye(4)
    lam, u = la.generalized_eig_max(A, B)
    V = cgauss(rng, 100000 * 4).reshape(-1, 4)
    num = np.einsum("ij,jk,ik->i", V, A, V.conj()).real
    den = np.einsum("ij,jk,ik->i", V, B, V.conj()).real
    best = (num / den).max()
    # sampling cannot beat the true maximum; polished comparison happens in
    # the acceptance suite
    assert lam >= best - 1e-12 * abs(lam)
    q = (np.vdot(u, A @ u) / np.vdot(u, B @ u)).real
    assert q == pytest.approx(lam, rel=1e-10)


def test_gen_eig_residual_and_scale_covariance(rng):
    A = rand_herm(rng, 5)
    B = rand_psd(rng, 5) + np.eye(5)
    lam, u = la.generalized_eig_max(A, B)
    res = np.linalg.norm(A @ u - lam * B @ u)
    assert res <= 1e-9 * (np.linalg.norm(A) + abs(lam) * np.linalg.norm(B))
    lam3, u3 = la.generalized_eig_max(3.0 * A, B)
    assert lam3 == pytest.approx(3.0 * lam, rel=1e-10)
    assert abs(np.vdot(u3, u)) == pytest.approx(1.0, abs=1e-8)


def test_gen_eig_matches_plain_eig(rng):
    A = rand_herm(rng, 4)
    lam, _ = la.generalized_eig_max(A, np.eye(4))
    assert lam == pytest.approx(la.hermitian_eig(A).eigenvalues[-1], rel=1e-12)


def test_gen_eig_rejects_indefinite_B(rng):
    with pytest.raises(ValueError):
        la.generalized_eig_max(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        la.generalized_eig_max(np.eye(2), np.diag([1.0, 0.0]))


def test_null_space_single_vector():
    H = la.null_space_basis([np.array([1.0, 0.0])])
    assert H.shape == (2, 1)
    assert abs(H[1, 0]) == pytest.approx(1.0, abs=1e-12)
    assert abs(H[0, 0]) <= 1e-12


def test_null_space_two_vectors(rng):
    c1, c2 = cgauss(rng, 3), cgauss(rng, 3)
    H = la.null_space_basis([c1, c2])
    assert H.shape == (3, 1)
    assert abs(np.vdot(c1, H[:, 0])) <= 1e-10 * np.linalg.norm(c1)
    assert abs(np.vdot(c2, H[:, 0])) <= 1e-10 * np.linalg.norm(c2)


def test_null_space_orthonormal_columns(rng):
    for M, k in ((4, 1), (6, 3), (10, 2)):
        chans = [cgauss(rng, M) for _ in range(k)]
        H = la.null_space_basis(chans)
        assert H.shape == (M, M - k)
        assert np.linalg.norm(H.conj().T @ H - np.eye(M - k)) <= 1e-10
        for c in chans:
            assert np.max(np.abs(c.conj() @ H)) <= 1e-10 * np.linalg.norm(c)


def test_null_space_full_rank_errors(rng):
    with pytest.raises(ValueError):
        la.null_space_basis([np.array([1.0, 0]), np.array([0, 1.0])])
    v = cgauss(rng, 3)
    with pytest.raises(ValueError):
        la.null_space_basis([v, 2.0 * v])  # dependent inputs


def test_null_space_deterministic(rng):
    chans = [cgauss(rng, 5) for _ in range(2)]
    H1 = la.null_space_basis(chans)
    H2 = la.null_space_basis([c.copy() for c in chans])
    assert np.array_equal(H1, H2)


def test_psd_sqrt_identity_and_rank_one(rng):
    S = la.psd_sqrt(np.eye(3))
    assert np.allclose(S @ S.conj().T, np.eye(3), atol=1e-12)
    w = cgauss(rng, 4, 1.5)
    X = np.outer(w, w.conj())
    S = la.psd_sqrt(X)
    assert np.linalg.norm(S @ S.conj().T - X) <= 1e-9 * np.linalg.norm(X)


def test_psd_sqrt_random_reconstruction(rng):
    for _ in range(20):
        X = rand_psd(rng, 5)
        S = la.psd_sqrt(X)
        assert np.linalg.norm(S @ S.conj().T - X) <= 1e-9 * np.linalg.norm(X)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(ValueError):
        la.psd_sqrt(np.diag([1.0, -0.5]))
