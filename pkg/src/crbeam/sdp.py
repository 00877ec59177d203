"""Small dense Hermitian semidefinite programming.

Standard form: maximize tr(C X) over Hermitian PSD X subject to trace-linear
constraints tr(A_i X) {<=, >=, ==} b_i. Complex arithmetic throughout, no
real embedding. On top of the solver this module provides the rank-one
extraction and Gaussian randomization steps that turn a relaxation solution
into a beamforming vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _ipm
from .channel import (
    DerivedChannel,
    InterferenceLimit,
    PowerConstraint,
    interference,
    secrecy_rate,
)
from .linalg import psd_sqrt

__all__ = [
    "LinearConstraint",
    "SdpProblem",
    "SdpSolution",
    "SdpStatus",
    "SdpNumericalError",
    "solve",
    "feasible",
    "rank_one_extract",
    "gaussian_randomization",
    "diag_bound_constraints",
]

_SENSES = ("<=", ">=", "==")


class SdpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    NUMERICAL_FAILURE = "numerical_failure"


class SdpNumericalError(RuntimeError):
    """Raised when a boolean feasibility answer cannot be certified."""


@dataclass(frozen=True)
class LinearConstraint:
    matrix: np.ndarray
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"sense must be one of {_SENSES}")
        A = np.asarray(self.matrix, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("constraint matrix must be square")
        drift = np.linalg.norm(A - A.conj().T)
        if drift > 1e-8 * max(1.0, np.linalg.norm(A)):
            raise ValueError("constraint matrix is not Hermitian")
        if math.isnan(self.rhs):
            raise ValueError("constraint rhs must not be NaN")
        object.__setattr__(self, "matrix", 0.5 * (A + A.conj().T))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class SdpProblem:
    """maximize tr(C X) s.t. tr(A_i X) sense_i b_i, X Hermitian PSD."""

    dim: int
    C: np.ndarray
    constraints: tuple[LinearConstraint, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        C = np.asarray(self.C, dtype=np.complex128)
        if C.shape != (self.dim, self.dim):
            raise ValueError("objective C must be dim x dim")
        if np.linalg.norm(C - C.conj().T) > 1e-8 * max(1.0, np.linalg.norm(C)):
            raise ValueError("objective C is not Hermitian")
        cons = tuple(
            c if isinstance(c, LinearConstraint) else LinearConstraint(*c)
            for c in self.constraints
        )
        for c in cons:
            if c.matrix.shape != (self.dim, self.dim):
                raise ValueError("constraint matrix dimension mismatch")
        object.__setattr__(self, "C", 0.5 * (C + C.conj().T))
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def feasibility(cls, dim: int, constraints) -> "SdpProblem":
        return cls(dim=dim, C=np.zeros((dim, dim)), constraints=tuple(constraints))


@dataclass(frozen=True)
class SdpSolution:
    """Solver outcome.

    On Infeasible, certificate is a vector c (one entry per constraint,
    in order) proving emptiness: c_i <= 0 on <= rows, c_i >= 0 on >= rows,
    free on == rows, with sum_i c_i A_i negative semidefinite and
    sum_i c_i b_i = 1, which no PSD X can satisfy.

    On NumericalFailure, X may still hold the PSD projection of the last
    iterate with max_violation recording how far it sits from the rows;
    it is a near-feasibility witness, not a solution.
    """

    status: SdpStatus
    X: np.ndarray | None
    objective: float | None
    max_violation: float
    iterations: int
    certificate: np.ndarray | None = None
    message: str = ""


def _violations(p: SdpProblem, X: np.ndarray) -> np.ndarray:
    out = np.zeros(len(p.constraints))
    for i, c in enumerate(p.constraints):
        t = float(np.vdot(c.matrix, X).real)
        if c.sense == "<=":
            out[i] = max(0.0, t - c.rhs)
        elif c.sense == ">=":
            out[i] = max(0.0, c.rhs - t)
        else:
            out[i] = abs(t - c.rhs)
    return out


def _normalized_rows(p: SdpProblem):
    """Sign-normalize senses to <=/==, drop exact duplicates, scale rows.

    Returns the stacked scaled matrices plus, per kept row, the scale, the
    original constraint index, and the sense sign applied (-1 for >= rows),
    so dual quantities can be mapped back to the caller's constraint order.
    """
    mats, rhs, ineq, scales, idx, signs = [], [], [], [], [], []
    seen: list[tuple] = []
    for j, c in enumerate(p.constraints):
        sg = -1.0 if c.sense == ">=" else 1.0
        A, b = sg * c.matrix, sg * c.rhs
        is_in = c.sense != "=="
        dup = False
        for sA, sb, si in seen:
            if si == is_in and sb == b and np.array_equal(sA, A):
                dup = True
                break
        if dup:
            continue
        seen.append((A, b, is_in))
        d = max(float(np.linalg.norm(A)), abs(b), 1.0)
        mats.append(A / d)
        rhs.append(b / d)
        ineq.append(is_in)
        scales.append(d)
        idx.append(j)
        signs.append(sg)
    n = p.dim
    if mats:
        A_stack = np.stack(mats)
    else:
        A_stack = np.zeros((0, n, n), dtype=np.complex128)
    return (
        A_stack,
        np.array(rhs),
        np.array(ineq, dtype=bool),
        np.array(scales),
        np.array(idx, dtype=int),
        np.array(signs),
    )


def _solve_impl(p: SdpProblem, tol: float, accept_x=None) -> SdpSolution:
    n = p.dim
    A_stack, b, is_ineq, scales, kept_idx, signs = _normalized_rows(p)
    m = len(b)

    if m == 0:
        lam_hi = float(np.linalg.eigvalsh(p.C)[-1]) if np.any(p.C) else 0.0
        if lam_hi > 1e-12 * max(1.0, float(np.linalg.norm(p.C))):
            return SdpSolution(
                SdpStatus.NUMERICAL_FAILURE, None, None, 0.0, 0,
                message="objective unbounded above on the PSD cone",
            )
        X = np.zeros((n, n), dtype=np.complex128)
        return SdpSolution(SdpStatus.OPTIMAL, X, 0.0, 0.0, 0)

    c_norm = max(1.0, float(np.linalg.norm(p.C)))
    C_min = -p.C / c_norm  # engine minimizes

    raw = _ipm.solve_hsd(
        A_stack, b, is_ineq, C_min,
        tol=min(tol, 1e-8), max_iter=100, accept_x=accept_x,
    )

    if raw.status in (_ipm.OPTIMAL, _ipm.FEASIBLE_EARLY):
        # project out eigenvalue dust so the returned X is PSD outright
        vals, vecs = np.linalg.eigh(0.5 * (raw.X + raw.X.conj().T))
        if vals[0] < -1e-6 * max(1.0, float(vals[-1])):
            return SdpSolution(
                SdpStatus.NUMERICAL_FAILURE, None, None, 0.0, raw.iterations,
                message="converged X substantially indefinite",
            )
        X = (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T
        X = 0.5 * (X + X.conj().T)
        viol = _violations(p, X)
        bounds = np.array([1e-7 * (1.0 + abs(c.rhs)) for c in p.constraints])
        if np.any(viol > bounds):
            # X is kept (it is PSD, just short of the recheck bound) so
            # callers with a looser accuracy budget can classify it themselves
            return SdpSolution(
                SdpStatus.NUMERICAL_FAILURE, X, None,
                float(viol.max(initial=0.0)), raw.iterations,
                message="converged point failed the post-solve feasibility check",
            )
        obj = float(np.vdot(p.C, X).real)
        return SdpSolution(
            SdpStatus.OPTIMAL, X, obj, float(viol.max(initial=0.0)), raw.iterations,
        )

    if raw.status == _ipm.INFEASIBLE:
        # map the certificate to original constraint order and re-verify there
        cert = np.zeros(len(p.constraints))
        cert[kept_idx] = raw.y * signs / scales
        S_mat = np.zeros((n, n), dtype=np.complex128)
        for j, c in enumerate(p.constraints):
            if cert[j] != 0.0:
                S_mat = S_mat + cert[j] * c.matrix
        lam_hi = float(np.linalg.eigvalsh(0.5 * (S_mat + S_mat.conj().T))[-1])
        bad_sign = 0.0
        for j, c in enumerate(p.constraints):
            if c.sense == "<=":
                bad_sign = max(bad_sign, cert[j])
            elif c.sense == ">=":
                bad_sign = max(bad_sign, -cert[j])
        cert_scale = 1.0 + float(
            sum(abs(cert[j]) * np.linalg.norm(c.matrix) for j, c in enumerate(p.constraints))
        )
        cb = float(sum(cert[j] * c.rhs for j, c in enumerate(p.constraints)))
        if max(lam_hi, bad_sign) <= 1e-6 * cert_scale and cb > 0.5:
            return SdpSolution(
                SdpStatus.INFEASIBLE, None, None, 0.0, raw.iterations,
                certificate=cert / cb, message=raw.message,
            )
        return SdpSolution(
            SdpStatus.NUMERICAL_FAILURE, None, None, 0.0, raw.iterations,
            message="infeasibility certificate failed re-verification",
        )

    if raw.status == _ipm.UNBOUNDED:
        return SdpSolution(
            SdpStatus.NUMERICAL_FAILURE, None, None, 0.0, raw.iterations,
            message="objective unbounded above (improving ray found)",
        )

    # stall or iteration limit: keep the PSD projection of the last iterate
    # as a near-feasibility witness for callers with a looser accuracy budget
    X_near, viol_max = None, 0.0
    if raw.X is not None and np.all(np.isfinite(raw.X)):
        vals, vecs = np.linalg.eigh(0.5 * (raw.X + raw.X.conj().T))
        X_near = (vecs * np.maximum(vals, 0.0)) @ vecs.conj().T
        X_near = 0.5 * (X_near + X_near.conj().T)
        viol_max = float(_violations(p, X_near).max(initial=0.0))
    return SdpSolution(
        SdpStatus.NUMERICAL_FAILURE, X_near, None, viol_max, raw.iterations,
        message=raw.message,
    )


def solve(p: SdpProblem, tol: float = 1e-8) -> SdpSolution:
    """Solve the SDP. Status is Optimal, Infeasible (with a certificate), or
    NumericalFailure; an Optimal X always passes the constraint recheck."""
    return _solve_impl(p, tol)


def feasible(p: SdpProblem, tol: float = 1e-8) -> bool:
    """True iff the constraint set admits a PSD point.

    Solves with a zero objective and an early-accept shortcut: as soon as an
    iterate verifiably satisfies every original constraint it returns True.
    A probe sitting on the boundary can converge to a point that misses the
    strict recheck by a hair; such near-feasible points (within 1e-5 relative
    per row) still count as True, since the caller's answer is only defined
    up to the solver's resolution there anyway. Raises SdpNumericalError when
    the solver cannot certify either answer.
    """
    zero = SdpProblem.feasibility(p.dim, p.constraints)
    margins = np.array([0.3e-7 * (1.0 + abs(c.rhs)) for c in p.constraints])

    def accept(X):
        return bool(np.all(_violations(zero, X) <= margins)) if len(margins) else True

    sol = _solve_impl(zero, tol, accept_x=accept)
    if sol.status == SdpStatus.OPTIMAL:
        return True
    if sol.status == SdpStatus.INFEASIBLE:
        return False
    if sol.X is not None:
        slack = np.array([1e-5 * (1.0 + abs(c.rhs)) for c in p.constraints])
        if np.all(_violations(zero, sol.X) <= slack):
            return True
    raise SdpNumericalError(sol.message or "feasibility could not be certified")


def rank_one_extract(X, ratio_tol: float = 1e-6) -> np.ndarray | None:
    """Principal-component weights when X is numerically rank one.

    Returns w = sqrt(lambda_1) u_1 (largest-magnitude entry rotated real
    positive) when lambda_2/lambda_1 <= ratio_tol, else None. The zero
    matrix extracts to the zero vector.
    """
    X = np.asarray(X, dtype=np.complex128)
    vals, vecs = np.linalg.eigh(0.5 * (X + X.conj().T))
    lam1 = float(vals[-1])
    if lam1 <= 0.0:
        return np.zeros(X.shape[0], dtype=np.complex128)
    lam2 = max(float(vals[-2]), 0.0) if len(vals) > 1 else 0.0
    if lam2 / lam1 > ratio_tol:
        return None
    u = vecs[:, -1]
    i = int(np.argmax(np.abs(u)))
    u = u * (np.conj(u[i]) / abs(u[i]))
    return math.sqrt(lam1) * u


def rank_ratio_of(X) -> float:
    """lambda_2 / lambda_1 of a PSD matrix (0 for the zero or 1x1 matrix)."""
    vals = np.linalg.eigvalsh(np.asarray(X, dtype=np.complex128))
    lam1 = float(vals[-1])
    if lam1 <= 0.0 or len(vals) < 2:
        return 0.0
    return max(float(vals[-2]), 0.0) / lam1


def max_feasible_scale(
    w: np.ndarray,
    dc: DerivedChannel,
    pc: PowerConstraint,
    pu_terms,
) -> float:
    """Largest sigma >= 0 with sigma*w satisfying power and interference caps.

    pu_terms is a sequence of (hk, Dk, gamma) triples; every constrained
    quantity is quadratic in w so the cap per constraint is sqrt(bound/value).
    """
    ratios = []
    if pc.PT is not None:
        tot = float(np.sum(np.abs(w) ** 2))
        ratios.append(np.inf if tot == 0 else pc.PT / tot)
    if pc.p is not None:
        pw = np.abs(w) ** 2
        with np.errstate(divide="ignore"):
            r = np.where(pw > 0, pc.p / np.maximum(pw, 1e-300), np.inf)
        ratios.append(float(np.min(r)))
    for hk_i, Dk_i, gamma_i in pu_terms:
        if math.isinf(gamma_i):
            continue
        lam = float(dc.ps * abs(np.vdot(hk_i, w)) ** 2 + np.vdot(w, Dk_i @ w).real)
        ratios.append(np.inf if lam == 0 else gamma_i / lam)
    if not ratios:
        return 1.0
    lo = min(ratios)
    return float(np.sqrt(lo)) if math.isfinite(lo) else 1.0


def gaussian_randomization(
    X,
    dc: DerivedChannel,
    pc: PowerConstraint,
    lim: InterferenceLimit,
    n_samples: int = 500,
    seed=0,
) -> np.ndarray:
    """Randomized extraction from a relaxation solution.

    Draws circular complex Gaussian directions through psd_sqrt(X), rescales
    each candidate onto its tightest constraint, and returns the best one by
    secrecy rate (the zero vector when nothing beats rate 0). Deterministic
    for a fixed seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    pu_terms = [(dc.hk, dc.Dk, lim.gamma)]
    return _randomize(X, dc, pc, pu_terms, n_samples, seed)


def _randomize(X, dc, pc, pu_terms, n_samples, seed) -> np.ndarray:
    S = psd_sqrt(X)
    n = S.shape[0]
    rng = np.random.default_rng(seed)
    xi = (rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n)))
    xi *= math.sqrt(0.5)
    best_rate = 0.0
    best_w = np.zeros(n, dtype=np.complex128)
    for j in range(n_samples):
        w = S @ xi[j]
        sc = max_feasible_scale(w, dc, pc, pu_terms)
        if sc == 0.0 or not math.isfinite(sc):
            continue
        w = sc * w
        rate = secrecy_rate(dc, w)
        if rate > best_rate:
            best_rate = rate
            best_w = w
    return best_w


def diag_bound_constraints(p) -> list[LinearConstraint]:
    """Per-element bounds diag(X) <= p as n trace constraints."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    out = []
    for mth in range(n):
        E = np.zeros((n, n), dtype=np.complex128)
        E[mth, mth] = 1.0
        out.append(LinearConstraint(E, "<=", float(p[mth])))
    return out
