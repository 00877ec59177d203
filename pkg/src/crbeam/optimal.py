"""Optimal secrecy-rate beamforming via semidefinite relaxation.

The rate objective factors into two ratios

    t1 = (N0 + w'(Dh + Ps hg hg')w) / (N0 + w'(Dz + Ps hz hz')w)
    t2 = (N0 + w' Dz w) / (N0 + w' Dh w)

whose product t1*t2 = (1 + snr_dest)/(1 + snr_eve), so maximizing the rate
means maximizing t1*t2. For a fixed pair (t1, t2), "some X = ww' achieves at
least these ratios" is a trace-linear feasibility SDP in X >= 0, and for
fixed t1 the feasible t2 form an interval, so the search is an outer grid
over t1 with an inner bisection on t2. Because the X-feasible set only
shrinks as t1 grows, the best achievable t2 is nonincreasing in t1; the scan
walks t1 in ascending order carrying that upper bound, which lets it skip
every grid point that provably cannot beat the incumbent product and start
each bisection at the incumbent-beating t2 target.

A final solve at the winning pair pushes the first ratio's slack as far as
it goes, which empirically lands on a rank-one X; weights come from the
principal component (or Gaussian randomization when the solution is not
numerically rank-one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import sdp
from .channel import (
    DerivedChannel,
    InterferenceLimit,
    PowerConstraint,
    SolveResult,
    make_solve_result,
)

__all__ = [
    "PrimaryUser",
    "SearchParams",
    "build_feasibility_problem",
    "t_bounds",
    "achieved_ratios",
    "solve_optimal",
    "solve_optimal_multi_pu",
]


@dataclass(frozen=True)
class PrimaryUser:
    """One interference constraint: Ps|hk'w|^2 + w'Dk w <= gamma."""

    hk: np.ndarray
    Dk: np.ndarray
    gamma: float

    def __post_init__(self):
        hk = np.asarray(self.hk, dtype=np.complex128)
        Dk = np.asarray(self.Dk, dtype=np.complex128)
        if hk.ndim != 1 or Dk.shape != (len(hk), len(hk)):
            raise ValueError("hk must be length-M, Dk must be M x M")
        if math.isnan(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be >= 0 (inf allowed)")
        object.__setattr__(self, "hk", hk)
        object.__setattr__(self, "Dk", 0.5 * (Dk + Dk.conj().T))
        object.__setattr__(self, "gamma", float(self.gamma))

    @classmethod
    def from_channel(cls, dc: DerivedChannel, gamma: float) -> "PrimaryUser":
        return cls(hk=dc.hk, Dk=dc.Dk, gamma=gamma)

    def coupling(self, ps: float) -> np.ndarray:
        """The quadratic-form matrix Dk + Ps hk hk'."""
        return self.Dk + ps * np.outer(self.hk, self.hk.conj())


@dataclass(frozen=True)
class SearchParams:
    """Knobs for the (t1, t2) search.

    t1_range and t2_hi override the automatic t_bounds box; sweeps use them
    to keep one shared grid across sweep points so per-point search noise
    cannot mask monotone trends. t1_extra adds individual outer-grid points,
    typically ratios achieved by a related solve, so the search provably
    dominates that solve up to the bisection tolerance.
    """

    t1_grid_points: int = 64
    t2_bisect_tol: float = 1e-4
    t_bounds_safety: float = 1.25
    max_feasibility_calls: int = 20000
    refine_passes: int = 1
    t1_floor: float = 1e-3
    ratio_tol: float = 1e-6
    n_randomization: int = 500
    t1_range: tuple[float, float] | None = None
    t2_hi: float | None = None
    t1_extra: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "t1_extra", tuple(float(v) for v in self.t1_extra))
        if any(not (v > 0 and math.isfinite(v)) for v in self.t1_extra):
            raise ValueError("t1_extra points must be positive finite")
        if self.t1_grid_points < 8:
            raise ValueError("t1_grid_points must be >= 8")
        if not (self.t2_bisect_tol > 0 and self.ratio_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.t_bounds_safety < 1.0:
            raise ValueError("t_bounds_safety must be >= 1")
        if self.max_feasibility_calls < 1 or self.refine_passes < 0:
            raise ValueError("bad search budget")
        if self.t1_range is not None:
            lo, hi = self.t1_range
            if not (0 < lo <= hi):
                raise ValueError("t1_range must satisfy 0 < lo <= hi")
        if self.t2_hi is not None and self.t2_hi <= 1.0:
            raise ValueError("t2_hi must exceed 1")


def _rate_rows(dc: DerivedChannel, t1: float, t2: float):
    """Constraint matrices/rhs for the two ratio rows at (t1, t2)."""
    Sg = dc.Dh + dc.ps * np.outer(dc.hg, dc.hg.conj())
    Se = dc.Dz + dc.ps * np.outer(dc.hz, dc.hz.conj())
    G1 = Sg - t1 * Se
    G2 = dc.Dz - t2 * dc.Dh
    return G1, dc.n0 * (t1 - 1.0), G2, dc.n0 * (t2 - 1.0)


def _power_rows(pc: PowerConstraint, M: int) -> list[sdp.LinearConstraint]:
    rows: list[sdp.LinearConstraint] = []
    if pc.PT is not None:
        rows.append(sdp.LinearConstraint(np.eye(M), "<=", pc.PT))
    if pc.p is not None:
        if len(pc.p) != M:
            raise ValueError("per-relay power vector length must equal M")
        rows.extend(sdp.diag_bound_constraints(pc.p))
    return rows


def build_feasibility_problem(
    dc: DerivedChannel,
    t1: float,
    t2: float,
    pc: PowerConstraint,
    pus,
) -> sdp.SdpProblem:
    """Assemble the feasibility SDP at a ratio pair.

    Rows: tr(X G1) >= N0(t1-1); tr(X G2) >= N0(t2-1); one interference row
    per primary user (rows with gamma = inf are vacuous and omitted); the
    power rows from pc. X >= 0 is the solver's cone constraint.
    """
    if not (t1 > 0 and t2 > 0):
        raise ValueError("t1 and t2 must be positive")
    G1, r1, G2, r2 = _rate_rows(dc, t1, t2)
    rows = [
        sdp.LinearConstraint(G1, ">=", r1),
        sdp.LinearConstraint(G2, ">=", r2),
    ]
    for pu in pus:
        if math.isinf(pu.gamma):
            continue
        rows.append(sdp.LinearConstraint(pu.coupling(dc.ps), "<=", pu.gamma))
    rows.extend(_power_rows(pc, dc.M))
    return sdp.SdpProblem.feasibility(dc.M, rows)


def t_bounds(
    dc: DerivedChannel, pc: PowerConstraint, safety: float = 1.25
) -> tuple[float, float]:
    """Search-box upper bounds on the two ratios.

    t1 is capped by the largest possible signal ratio 1 + Ps||hg||^2 PT/N0
    and t2 by 1 + tr(Dz) PT/N0, each inflated by the safety factor; PT is
    the total-power budget (sum of per-relay caps in individual mode).
    """
    PT = pc.effective_total()
    t1_max = safety * (1.0 + dc.ps * float(np.sum(np.abs(dc.hg) ** 2)) * PT / dc.n0)
    t2_max = safety * (1.0 + float(np.trace(dc.Dz).real) * PT / dc.n0)
    return t1_max, t2_max


def achieved_ratios(dc: DerivedChannel, X: np.ndarray) -> tuple[float, float]:
    """The two ratios a covariance X actually attains (its certified (t1, t2))."""
    tr = lambda A: float(np.vdot(A, X).real)
    sig_d = tr(dc.Dh + dc.ps * np.outer(dc.hg, dc.hg.conj()))
    sig_e = tr(dc.Dz + dc.ps * np.outer(dc.hz, dc.hz.conj()))
    r1 = (dc.n0 + sig_d) / (dc.n0 + sig_e)
    r2 = (dc.n0 + tr(dc.Dz)) / (dc.n0 + tr(dc.Dh))
    return r1, r2


def _zero_result(dc, pus, stats) -> SolveResult:
    stats = dict(stats)
    stats["extraction"] = "zero"
    return make_solve_result(
        dc,
        np.zeros(dc.M, dtype=np.complex128),
        rank_ratio=0.0,
        solver_stats=stats,
        pu_vectors=[(pu.hk, pu.Dk) for pu in pus],
    )


def solve_optimal(
    dc: DerivedChannel,
    pc: PowerConstraint,
    lim: InterferenceLimit,
    sp: SearchParams | None = None,
    seed=0,
) -> SolveResult:
    """Optimal beamformer for the built-in single primary user."""
    return solve_optimal_multi_pu(
        dc, [PrimaryUser.from_channel(dc, lim.gamma)], pc, sp=sp, seed=seed
    )


def solve_optimal_multi_pu(
    dc: DerivedChannel,
    pus,
    pc: PowerConstraint,
    sp: SearchParams | None = None,
    seed=0,
) -> SolveResult:
    """Optimal beamformer under one interference constraint per primary user."""
    sp = sp or SearchParams()
    pus = tuple(pus)
    for pu in pus:
        if len(pu.hk) != dc.M:
            raise ValueError("primary-user channel length must equal M")

    # a zero limit with positive-definite coupling pins X = 0 outright
    for pu in pus:
        if pu.gamma == 0.0:
            K = pu.coupling(dc.ps)
            lam = np.linalg.eigvalsh(K)
            if lam[0] > 1e-12 * max(float(lam[-1]), 1.0):
                return _zero_result(
                    dc, pus, {"feasibility_calls": 0, "reason": "zero interference limit"}
                )

    t1_auto, t2_auto = t_bounds(dc, pc, sp.t_bounds_safety)
    t2_cap = sp.t2_hi if sp.t2_hi is not None else t2_auto
    if sp.t1_range is not None:
        t1_lo, t1_hi = sp.t1_range
    else:
        t1_lo, t1_hi = max(sp.t1_floor, 1.0 / t2_cap), t1_auto
    t1_hi = max(t1_hi, t1_lo)

    calls = 0
    budget_exhausted = False

    def feas(t1: float, t2: float) -> bool:
        nonlocal calls
        calls += 1
        prob = build_feasibility_problem(dc, t1, t2, pc, pus)
        try:
            return sdp.feasible(prob)
        except sdp.SdpNumericalError as e:
            raise sdp.SdpNumericalError(
                f"feasibility SDP failed at t1={t1!r}, t2={t2!r}: {e}"
            ) from e

    improve = 1e-9
    best = {"product": 1.0, "t1": 1.0, "t2": 1.0, "found": False}

    def scan(points: np.ndarray) -> None:
        nonlocal budget_exhausted
        U = t2_cap  # upper bound on achievable t2, valid at and beyond current t1
        for t1 in points:
            if calls >= sp.max_feasibility_calls:
                budget_exhausted = True
                return
            if t1 * U <= best["product"] * (1.0 + improve):
                continue
            lo = best["product"] * (1.0 + improve) / t1  # break-even target
            if lo >= U:
                continue
            if not feas(t1, lo):
                U = min(U, lo)
                continue
            hi = U
            while hi > lo * (1.0 + sp.t2_bisect_tol):
                if calls >= sp.max_feasibility_calls:
                    budget_exhausted = True
                    break
                mid = math.sqrt(lo * hi)
                if feas(t1, mid):
                    lo = mid
                else:
                    hi = mid
            best.update(product=t1 * lo, t1=t1, t2=lo, found=True)
            U = min(U, hi)

    grid = np.geomspace(t1_lo, t1_hi, sp.t1_grid_points)
    if t1_lo <= 1.0 <= t1_hi:
        grid = np.concatenate([grid, [1.0]])
    if sp.t1_extra:
        # warm starts: ratios achieved by related solves, evaluated verbatim
        grid = np.concatenate([grid, np.asarray(sp.t1_extra, dtype=float)])
    grid = np.unique(grid)
    scan(grid)
    for _ in range(sp.refine_passes):
        if not best["found"] or budget_exhausted:
            break
        i = int(np.searchsorted(grid, best["t1"]))
        left = grid[i - 1] if i > 0 else grid[0]
        right = grid[i + 1] if i + 1 < len(grid) else grid[-1]
        if right <= left * (1.0 + 1e-12):
            break
        sub = np.geomspace(left, right, max(9, sp.t1_grid_points // 8))[1:-1]
        scan(sub)
        grid = np.unique(np.concatenate([grid, sub]))

    stats = {
        "feasibility_calls": calls,
        "budget_exhausted": budget_exhausted,
        "grid_points": int(len(grid)),
        "search_t1": best["t1"],
        "search_t2": best["t2"],
        "search_product": best["product"],
    }
    if not best["found"]:
        return _zero_result(dc, pus, stats)

    X, extra = _final_solve(dc, pc, pus, best["t1"], best["t2"], sp)
    stats.update(extra)
    r1, r2 = achieved_ratios(dc, X)
    stats["achieved_t1"] = r1
    stats["achieved_t2"] = r2
    stats["relaxation_bound_bits"] = math.log2(max(r1 * r2, best["product"]))

    ratio = sdp.rank_ratio_of(X)
    pu_terms = [(pu.hk, pu.Dk, pu.gamma) for pu in pus]
    w = sdp.rank_one_extract(X, sp.ratio_tol)
    if w is not None:
        stats["extraction"] = "rank_one"
    else:
        w = sdp._randomize(X, dc, pc, pu_terms, sp.n_randomization, seed)
        stats["extraction"] = "randomization"
    sc = sdp.max_feasible_scale(w, dc, pc, pu_terms)
    if sc < 1.0:
        w = w * sc
    return make_solve_result(
        dc, w, rank_ratio=ratio, solver_stats=stats,
        pu_vectors=[(pu.hk, pu.Dk) for pu in pus],
    )


def _final_solve(dc, pc, pus, t1, t2, sp):
    """Resolve the winning (t1, t2) into an X, pushing the first row's slack.

    The slack objective lands on an extreme point (the pure feasibility
    solves sit at the analytic center, which is full-rank by design). If the
    boundary pair is rejected, t2 backs off geometrically: the objective is
    built at the original pair, so a wider feasible set does not lower the
    pushed slack.
    """
    def attempt(t2_try: float):
        G1, r1, G2t, r2t = _rate_rows(dc, t1, t2_try)
        rows = [
            sdp.LinearConstraint(G1, ">=", r1),
            sdp.LinearConstraint(G2t, ">=", r2t),
        ]
        for pu in pus:
            if math.isinf(pu.gamma):
                continue
            rows.append(sdp.LinearConstraint(pu.coupling(dc.ps), "<=", pu.gamma))
        rows.extend(_power_rows(pc, dc.M))
        return sdp.solve(sdp.SdpProblem(dim=dc.M, C=G1, constraints=tuple(rows)))

    sol = None
    extra = {}
    for delta in (0.0, sp.t2_bisect_tol, 1e-5, 1e-4, 1e-3):
        sol = attempt(t2 / (1.0 + delta))
        if sol.status == sdp.SdpStatus.OPTIMAL:
            if delta > 0.0:
                extra["final_backoff"] = delta
            break
    if sol.status != sdp.SdpStatus.OPTIMAL:
        raise sdp.SdpNumericalError(
            f"final solve failed at t1={t1!r}, t2={t2!r}: {sol.status.value} {sol.message}"
        )
    return sol.X, {
        "final_iterations": sol.iterations, "final_objective": sol.objective, **extra,
    }
