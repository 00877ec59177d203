"""Primal-dual interior-point core for small dense Hermitian SDPs.

Solves, in homogeneous self-dual (HSD) form,

    minimize  <C, X>
    s.t.      <A_i, X> + s_i = b_i   (s_i >= 0 on inequality rows,
                                      no slack on equality rows)
              X >= 0 (Hermitian PSD)

with Nesterov-Todd scaling on the PSD block and Mehrotra
predictor-corrector steps. The HSD model carries an extra (tau, kappa)
pair; tau -> positive yields an optimal pair (X, y)/tau, while kappa
dominating tau yields a Farkas certificate of primal infeasibility
(y with sum_i y_i A_i <= 0, y_i <= 0 on inequality rows, b'y > 0) or an
improving ray (objective unbounded below). Iteration-limit exhaustion is
reported as a numerical failure, never as infeasibility.

Everything is dense and sized for n up to a few dozen; per-iteration cost
is a handful of n^3 factorizations plus an m^2 n^2 Schur assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL = "numerical_failure"
FEASIBLE_EARLY = "feasible_early"


@dataclass
class RawResult:
    status: str
    X: np.ndarray | None
    y: np.ndarray | None
    iterations: int
    message: str = ""


def _herm(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def _chol_psd(M: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        # one jitter retry; iterates should stay PD by step-length choice
        jitter = 1e-14 * max(np.trace(M).real, 1.0)
        try:
            return np.linalg.cholesky(M + jitter * np.eye(M.shape[0]))
        except np.linalg.LinAlgError:
            return None


def solve_hsd(
    A: np.ndarray,
    b: np.ndarray,
    is_ineq: np.ndarray,
    C: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 100,
    accept_x=None,
) -> RawResult:
    """Run the HSD iteration. A is an (m, n, n) Hermitian stack.

    accept_x, when given, is called each iteration with the current primal
    candidate X/tau; returning True stops early with FEASIBLE_EARLY (used by
    pure feasibility queries where the caller re-verifies constraints).
    """
    m, n, _ = A.shape
    ineq = np.flatnonzero(is_ineq)
    mI = len(ineq)
    nu = n + mI

    A_rows = A.reshape(m, n * n)  # row-major A_i
    A_rows_T = np.ascontiguousarray(np.transpose(A, (0, 2, 1)).reshape(m, n * n))
    row_norms = np.linalg.norm(A_rows, axis=1).real

    def Aop(X):
        # <A_i, X> = tr(A_i X), real for Hermitian pairs
        return (A_rows_T @ X.ravel()).real

    def Astar(y):
        return (y @ A_rows).reshape(n, n)

    def ip(P, Q):
        return float(np.vdot(P, Q).real)  # tr(P^H Q); equals tr(PQ) here

    b_scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    c_scale = 1.0 + float(np.linalg.norm(C))

    I_n = np.eye(n, dtype=np.complex128)
    X = I_n.copy()
    Z = I_n.copy()
    s = np.ones(mI)
    zs = np.ones(mI)
    y = np.zeros(m)
    tau = 1.0
    kappa = 1.0

    stalled = 0

    for it in range(max_iter):
        Ax = Aop(X)
        if mI:
            Ax[ineq] += s
        r_p = Ax - b * tau
        r_d = -Astar(y) - Z + C * tau
        r_d = _herm(r_d)
        r_dlp = -y[ineq] - zs if mI else np.zeros(0)
        cobj = ip(C, X)
        r_g = float(b @ y) - cobj - kappa
        mu = (ip(X, Z) + float(s @ zs) + tau * kappa) / (nu + 1)

        # -- convergence on the tau-scaled pair --
        pobj = cobj / tau
        dobj = float(b @ y) / tau
        prim_res = float(np.max(np.abs(r_p), initial=0.0)) / tau / b_scale
        dual_res = max(np.linalg.norm(r_d), np.max(np.abs(r_dlp), initial=0.0)) / tau / c_scale
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if prim_res <= tol and dual_res <= tol and gap <= tol:
            return RawResult(OPTIMAL, _herm(X / tau), y / tau, it)

        if accept_x is not None and accept_x(X / tau):
            return RawResult(FEASIBLE_EARLY, _herm(X / tau), y / tau, it)

        # -- infeasibility / unboundedness certificates --
        by = float(b @ y)
        if by > 0:
            yhat = y / by
            S_mat = _herm(Astar(yhat))
            cert_scale = 1.0 + float(np.abs(yhat) @ row_norms)
            lam_hi = float(np.linalg.eigvalsh(S_mat)[-1])
            lp_hi = float(np.max(yhat[ineq], initial=-np.inf)) if mI else -np.inf
            if max(lam_hi, lp_hi) <= tol * cert_scale:
                return RawResult(INFEASIBLE, None, yhat, it, "Farkas certificate")
        if cobj < 0:
            ray_scale = 1.0 + np.linalg.norm(X) / (-cobj)
            if float(np.max(np.abs(Ax), initial=0.0)) / (-cobj) <= tol * ray_scale:
                return RawResult(UNBOUNDED, _herm(X / -cobj), None, it, "improving ray")

        if tau <= 1e-12 and kappa <= 1e-12:
            return RawResult(NUMERICAL, None, None, it, "tau and kappa collapsed")
        if mu <= 1e-17 * (nu + 1):
            return RawResult(
                NUMERICAL, _herm(X / tau), None, it, "mu underflow before convergence"
            )

        # -- Nesterov-Todd scaling --
        Lx = _chol_psd(X)
        Lz = _chol_psd(Z)
        if Lx is None or Lz is None:
            return RawResult(NUMERICAL, None, None, it, "iterate left the cone")
        U_, sig, Vh_ = np.linalg.svd(Lz.conj().T @ Lx)
        if sig[-1] <= 0:
            return RawResult(NUMERICAL, None, None, it, "degenerate scaling point")
        sqs = np.sqrt(sig)
        R = Lx @ (Vh_.conj().T / sqs[None, :])
        Ri = (U_.conj().T @ Lz.conj().T) / sqs[:, None]
        W = R @ R.conj().T
        wlp = np.sqrt(s / zs) if mI else np.zeros(0)
        lamlp = np.sqrt(s * zs) if mI else np.zeros(0)

        # -- Schur complement pieces (shared by both directions) --
        TA = np.matmul(W, np.matmul(A, W))
        M_mat = (A_rows_T @ TA.reshape(m, n * n).T).real
        M_mat = 0.5 * (M_mat + M_mat.T)
        if mI:
            M_mat[ineq, ineq] += wlp**2
        WcW = W @ C @ W
        u_vec = Aop(WcW) + b
        h0 = ip(C, WcW)
        G = np.empty((m + 1, m + 1))
        G[:m, :m] = M_mat
        G[:m, m] = -u_vec
        G[m, :m] = 2.0 * b - u_vec
        G[m, m] = h0 + kappa / tau

        eta_p = -r_p
        eta_d = -r_d
        eta_dlp = -r_dlp
        eta_g = -r_g
        W_eta_W = W @ eta_d @ W
        denom = sig[:, None] + sig[None, :]

        def direction(d_psd, d_lp, d_tk):
            Dpsd = 2.0 * d_psd / denom  # Lyapunov solve in the scaled frame
            RDR = _herm(R @ Dpsd @ R.conj().T)
            base = RDR + W_eta_W
            q = eta_p - Aop(base)
            Ds = d_lp / lamlp if mI else np.zeros(0)
            if mI:
                q[ineq] -= wlp * Ds + wlp**2 * eta_dlp
            q0 = eta_g + ip(C, base) + d_tk / tau
            rhs = np.concatenate([q, [q0]])
            try:
                sol = np.linalg.solve(G, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(G, rhs, rcond=None)[0]
            dy = sol[:m]
            dtau = float(sol[m])
            dZ = _herm(-Astar(dy) + C * dtau - eta_d)
            dzs = -dy[ineq] - eta_dlp if mI else np.zeros(0)
            dX = _herm(RDR - W @ dZ @ W)
            ds = wlp * Ds - wlp**2 * dzs if mI else np.zeros(0)
            dkappa = (d_tk - kappa * dtau) / tau
            return dX, ds, dy, dZ, dzs, dtau, dkappa

        def max_step(dX, ds, dZ, dzs, dtau, dkappa):
            alpha = np.inf
            P = (Ri @ dX @ Ri.conj().T) / (sqs[:, None] * sqs[None, :])
            lo = float(np.linalg.eigvalsh(_herm(P))[0])
            if lo < 0:
                alpha = min(alpha, -1.0 / lo)
            P = (R.conj().T @ dZ @ R) / (sqs[:, None] * sqs[None, :])
            lo = float(np.linalg.eigvalsh(_herm(P))[0])
            if lo < 0:
                alpha = min(alpha, -1.0 / lo)
            for val, dval in ((s, ds), (zs, dzs)):
                neg = dval < 0
                if np.any(neg):
                    alpha = min(alpha, float(np.min(-val[neg] / dval[neg])))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor (affine scaling) direction
        d_psd_aff = -np.diag(sig**2).astype(np.complex128)
        aff = direction(d_psd_aff, -lamlp**2, -tau * kappa)
        dX_a, ds_a, dy_a, dZ_a, dzs_a, dtau_a, dkappa_a = aff
        a_aff = min(1.0, max_step(dX_a, ds_a, dZ_a, dzs_a, dtau_a, dkappa_a))
        mu_aff = (
            ip(X + a_aff * dX_a, Z + a_aff * dZ_a)
            + float((s + a_aff * ds_a) @ (zs + a_aff * dzs_a))
            + (tau + a_aff * dtau_a) * (kappa + a_aff * dkappa_a)
        ) / (nu + 1)
        sigma = min(max((max(mu_aff, 0.0) / mu) ** 3, 1e-10), 0.99999)

        # corrector with the Mehrotra second-order term
        Dx_t = Ri @ dX_a @ Ri.conj().T
        Dz_t = R.conj().T @ dZ_a @ R
        cross = Dx_t @ Dz_t
        d_psd = sigma * mu * I_n - np.diag(sig**2) - 0.5 * (cross + cross.conj().T)
        d_lp = sigma * mu - lamlp**2 - ds_a * dzs_a
        d_tk = sigma * mu - tau * kappa - dtau_a * dkappa_a
        dX, ds, dy, dZ, dzs, dtau, dkappa = direction(d_psd, d_lp, d_tk)

        alpha = min(1.0, 0.99 * max_step(dX, ds, dZ, dzs, dtau, dkappa))
        if alpha < 1e-8:
            stalled += 1
            if stalled >= 3:
                # hand back the last iterate: stalls cluster near barely
                # determined solutions and the caller may still classify it
                return RawResult(
                    NUMERICAL, _herm(X / tau), None, it, "step length collapsed"
                )
        else:
            stalled = 0

        X = _herm(X + alpha * dX)
        Z = _herm(Z + alpha * dZ)
        if mI:
            s = s + alpha * ds
            zs = zs + alpha * dzs
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa

    return RawResult(NUMERICAL, _herm(X / tau), None, max_iter, "iteration limit reached")
