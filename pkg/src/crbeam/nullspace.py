"""Sub-optimal beamforming in channel null spaces.

Two schemes trade rate for structure by restricting w = H v to an
orthonormal null-space basis H:

  * eavesdropper-null (BNE): H spans the null space of the eavesdropper's
    composite channel hz, so the eavesdropper receives zero signal and the
    secrecy rate reduces to log2(1 + snr_dest). Maximizing snr_dest under
    power and interference limits is a one-dimensional bisection over
    feasibility SDPs in V = vv'.
  * eavesdropper-plus-primary-null (BNEP): H also nulls the primary user's
    composite channel hk, so only forwarded relay noise reaches the primary
    user. Besides the SDP path, dropping the (noise-only) interference
    constraint admits a closed form: the top generalized eigenvector of the
    projected signal/noise matrix pair at full power.

Both schemes need the null space to be nonempty: nulling c channels
requires M > c relays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import sdp
from .channel import (
    DerivedChannel,
    InterferenceLimit,
    PowerConstraint,
    SolveResult,
    make_solve_result,
    secrecy_rate,
)
from .linalg import generalized_eig_max, null_space_basis, psd_sqrt

__all__ = [
    "NullSpaceContext",
    "build_context",
    "solve_bne",
    "solve_bnep_sdp",
    "solve_bnep_closed_form",
]


@dataclass(frozen=True)
class NullSpaceContext:
    """Projected quantities for beamforming restricted to w = H v.

    Ag = H'(Ps hg hg')H (signal quadratic form, source power folded in),
    Bh = H'Dh H (destination noise form), Bk = H'Dk H (primary noise form),
    ck = H'hk (residual primary signal vector; ~0 when hk was nulled).
    """

    H: np.ndarray
    Ag: np.ndarray
    Bh: np.ndarray
    Bk: np.ndarray
    ck: np.ndarray

    @property
    def dim(self) -> int:
        return self.H.shape[1]


def build_context(
    dc: DerivedChannel,
    null_primary: bool = False,
    extra_eve_channels: Sequence[np.ndarray] = (),
    extra_pu_channels: Sequence[np.ndarray] = (),
) -> NullSpaceContext:
    """Null-space context for dc, nulling the eavesdropper(s) and optionally
    the primary user(s).

    extra_eve_channels / extra_pu_channels are composite channel vectors of
    additional receivers to null alongside dc's own; extras of the primary
    kind participate only when null_primary is set. Fails when the nulled
    channels reach M (no null space left) or are linearly dependent.
    """
    vecs = [dc.hz, *extra_eve_channels]
    if null_primary:
        vecs.extend([dc.hk, *extra_pu_channels])
    H = null_space_basis(vecs)
    pg = H.conj().T @ dc.hg
    return NullSpaceContext(
        H=H,
        Ag=dc.ps * np.outer(pg, pg.conj()),
        Bh=H.conj().T @ dc.Dh @ H,
        Bk=H.conj().T @ dc.Dk @ H,
        ck=H.conj().T @ dc.hk,
    )


def _v_power_rows(H: np.ndarray, pc: PowerConstraint) -> list[sdp.LinearConstraint]:
    """Power rows on V = vv' (w = Hv, H orthonormal so ||w|| = ||v||)."""
    M, d = H.shape
    rows: list[sdp.LinearConstraint] = []
    if pc.PT is not None:
        rows.append(sdp.LinearConstraint(np.eye(d), "<=", pc.PT))
    if pc.p is not None:
        if len(pc.p) != M:
            raise ValueError("per-relay power vector length must equal M")
        for m in range(M):
            E = np.outer(H[m].conj(), H[m])
            rows.append(sdp.LinearConstraint(E, "<=", float(pc.p[m])))
    return rows


def _randomize_v(X, H, dc, pc, pu_terms, n_samples, seed) -> np.ndarray:
    """Gaussian randomization in v-space; candidates evaluated as w = Hv."""
    S = psd_sqrt(X)
    d = S.shape[0]
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((n_samples, d)) + 1j * rng.standard_normal((n_samples, d))
    xi *= math.sqrt(0.5)
    best_rate = 0.0
    best_w = np.zeros(H.shape[0], dtype=np.complex128)
    for j in range(n_samples):
        w = H @ (S @ xi[j])
        sc = sdp.max_feasible_scale(w, dc, pc, pu_terms)
        if sc == 0.0 or not math.isfinite(sc):
            continue
        w = sc * w
        rate = secrecy_rate(dc, w)
        if rate > best_rate:
            best_rate = rate
            best_w = w
    return best_w


def _zero_result(dc, stats, extra_eves=()) -> SolveResult:
    stats = dict(stats)
    stats["extraction"] = "zero"
    return make_solve_result(
        dc,
        np.zeros(dc.M, dtype=np.complex128),
        rank_ratio=0.0,
        solver_stats=stats,
        extra_eve_vectors=extra_eves,
    )


def _run_bisection(dc, ctx, gamma_rows, pc, bisect_tol):
    """Maximize t = snr_dest over the projected relaxation by bisection.

    Feasibility at t: exists V >= 0 with tr(V(Ag - t Bh)) >= N0 t plus the
    interference and power rows. Returns (t_lo certified feasible, t_hi
    certified infeasible, call count). The upper start sits just above the
    provable cap lam_max(Ag) PT / N0.
    """
    n0 = dc.n0
    PT_eff = pc.effective_total()
    t_up = float(np.linalg.eigvalsh(ctx.Ag)[-1]) * PT_eff / n0
    if t_up <= 0.0:
        return 0.0, 0.0, 0
    calls = 0

    def feas(t: float) -> bool:
        nonlocal calls
        calls += 1
        rows = [sdp.LinearConstraint(ctx.Ag - t * ctx.Bh, ">=", n0 * t)]
        rows.extend(gamma_rows)
        rows.extend(_v_power_rows(ctx.H, pc))
        prob = sdp.SdpProblem.feasibility(ctx.dim, rows)
        try:
            return sdp.feasible(prob)
        except sdp.SdpNumericalError as e:
            raise sdp.SdpNumericalError(f"feasibility SDP failed at t={t!r}: {e}") from e

    lo, hi = 0.0, t_up * (1.0 + 1e-9)  # strictly above the provable cap
    floor = 1e-14 * t_up
    while hi - lo > bisect_tol * max(lo, floor):
        mid = 0.5 * (lo + hi)
        if feas(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi, calls


def _extract(dc, ctx, pc, pu_terms, t_star, gamma_rows, sp_ratio_tol, n_rand, seed, stats):
    """Margin-push solve at (or just under) t*, then rank-one or randomized
    extraction."""
    n0 = dc.n0
    C = ctx.Ag - t_star * ctx.Bh

    def attempt(t_try: float):
        rows = [sdp.LinearConstraint(ctx.Ag - t_try * ctx.Bh, ">=", n0 * t_try)]
        rows.extend(gamma_rows)
        rows.extend(_v_power_rows(ctx.H, pc))
        return sdp.solve(sdp.SdpProblem(dim=ctx.dim, C=C, constraints=tuple(rows)))

    # the feasible set at t* can be thinner than the solver's tolerance, so
    # back the constraint row off geometrically; C keeps pushing the achieved
    # ratio toward the supremum of the (now wider) set
    sol = None
    for delta in (0.0, 1e-6, 1e-5, 1e-4, 1e-3):
        sol = attempt(t_star * (1.0 - delta))
        if sol.status == sdp.SdpStatus.OPTIMAL:
            if delta > 0.0:
                stats["final_backoff"] = delta
            break
    if sol.status != sdp.SdpStatus.OPTIMAL:
        raise sdp.SdpNumericalError(
            f"final solve failed at t={t_star!r}: {sol.status.value} {sol.message}"
        )
    V = sol.X
    t_ach = float(np.vdot(ctx.Ag, V).real) / (n0 + float(np.vdot(ctx.Bh, V).real))
    stats["achieved_snr_dest"] = t_ach
    stats["relaxation_bound_bits"] = math.log2(1.0 + max(t_ach, t_star))
    stats["final_iterations"] = sol.iterations
    ratio = sdp.rank_ratio_of(V)
    v = sdp.rank_one_extract(V, sp_ratio_tol)
    if v is not None:
        w = ctx.H @ v
        stats["extraction"] = "rank_one"
    else:
        w = _randomize_v(V, ctx.H, dc, pc, pu_terms, n_rand, seed)
        stats["extraction"] = "randomization"
    sc = sdp.max_feasible_scale(w, dc, pc, pu_terms)
    if sc < 1.0:
        w = w * sc
    return w, ratio


def solve_bne(
    dc: DerivedChannel,
    pc: PowerConstraint,
    lim: InterferenceLimit,
    bisect_tol: float = 1e-5,
    extra_eves: Sequence[tuple[np.ndarray, np.ndarray]] = (),
    ratio_tol: float = 1e-6,
    n_randomization: int = 500,
    seed=0,
) -> SolveResult:
    """Best beamformer that nulls the eavesdropper(s) outright.

    extra_eves holds (hz_i, Dz_i) pairs of additional eavesdroppers; all of
    them are nulled and the reported eavesdropper SNR is the max over all.
    The interference constraint keeps its full signal + noise form since the
    primary channel is not nulled here.
    """
    if dc.M < 2 + len(extra_eves):
        raise ValueError("nulling the eavesdropper(s) needs M > their count")
    ctx = build_context(dc, extra_eve_channels=[hz for hz, _ in extra_eves])
    coupling = ctx.Bk + dc.ps * np.outer(ctx.ck, ctx.ck.conj())
    eve_pairs = tuple(extra_eves)

    if lim.gamma == 0.0:
        lam = np.linalg.eigvalsh(coupling)
        if lam[0] > 1e-12 * max(float(lam[-1]), 1.0):
            return _zero_result(
                dc,
                {"feasibility_calls": 0, "reason": "zero interference limit"},
                eve_pairs,
            )
    gamma_rows = (
        [] if math.isinf(lim.gamma)
        else [sdp.LinearConstraint(coupling, "<=", lim.gamma)]
    )

    lo, hi, calls = _run_bisection(dc, ctx, gamma_rows, pc, bisect_tol)
    stats = {"feasibility_calls": calls, "search_snr_dest": lo, "bisection_hi": hi}
    if lo <= 0.0:
        return _zero_result(dc, stats, eve_pairs)

    pu_terms = [(dc.hk, dc.Dk, lim.gamma)]
    w, ratio = _extract(
        dc, ctx, pc, pu_terms, lo, gamma_rows, ratio_tol, n_randomization, seed, stats
    )
    return make_solve_result(
        dc, w, rank_ratio=ratio, solver_stats=stats, extra_eve_vectors=eve_pairs
    )


def solve_bnep_sdp(
    dc: DerivedChannel,
    pc: PowerConstraint,
    lim: InterferenceLimit,
    bisect_tol: float = 1e-5,
    extra_eves: Sequence[tuple[np.ndarray, np.ndarray]] = (),
    extra_pus: Sequence[tuple[np.ndarray, np.ndarray, float]] = (),
    ratio_tol: float = 1e-6,
    n_randomization: int = 500,
    seed=0,
) -> SolveResult:
    """Best beamformer nulling both the eavesdropper(s) and the primary
    user(s); the interference rows then carry only forwarded noise.

    extra_pus holds (hk_i, Dk_i, gamma_i) triples, each nulled and noise
    constrained like dc's own primary user.
    """
    nulled = 2 + len(extra_eves) + len(extra_pus)
    if dc.M < nulled + 1:
        raise ValueError("nulling eavesdropper(s) and primary user(s) needs more relays")
    ctx = build_context(
        dc,
        null_primary=True,
        extra_eve_channels=[hz for hz, _ in extra_eves],
        extra_pu_channels=[hk for hk, _, _ in extra_pus],
    )
    eve_pairs = tuple(extra_eves)

    noise_rows = []
    zero_forced = False
    for Dk_i, gamma_i in [(dc.Dk, lim.gamma)] + [(d, g) for _, d, g in extra_pus]:
        Bk_i = ctx.H.conj().T @ Dk_i @ ctx.H
        if gamma_i == 0.0:
            lam = np.linalg.eigvalsh(Bk_i)
            if lam[0] > 1e-12 * max(float(lam[-1]), 1.0):
                zero_forced = True
                break
        if not math.isinf(gamma_i):
            noise_rows.append(sdp.LinearConstraint(Bk_i, "<=", gamma_i))
    if zero_forced:
        return _zero_result(
            dc, {"feasibility_calls": 0, "reason": "zero interference limit"}, eve_pairs
        )

    lo, hi, calls = _run_bisection(dc, ctx, noise_rows, pc, bisect_tol)
    stats = {"feasibility_calls": calls, "search_snr_dest": lo, "bisection_hi": hi}
    if lo <= 0.0:
        return _zero_result(dc, stats, eve_pairs)

    pu_terms = [(dc.hk, dc.Dk, lim.gamma)] + list(extra_pus)
    w, ratio = _extract(
        dc, ctx, pc, pu_terms, lo, noise_rows, ratio_tol, n_randomization, seed, stats
    )
    return make_solve_result(
        dc, w, rank_ratio=ratio, solver_stats=stats, extra_eve_vectors=eve_pairs,
    )


def solve_bnep_closed_form(
    dc: DerivedChannel,
    PT: float,
    gamma: float | None = None,
) -> SolveResult:
    """Closed-form variant of the joint-null scheme under total power only.

    With the interference constraint assumed inactive, the remaining problem
    maximizes the projected generalized Rayleigh quotient at full power:
    the top generalized eigenpair of (Ag, Bh + (N0/PT) I) gives the SNR and
    direction, v = sqrt(PT) u, w = H v. The realized noise interference is
    reported so callers can check it against a limit; when gamma is passed
    the result flags (not errors) interference_exceeds_gamma.
    """
    if not (PT > 0 and math.isfinite(PT)):
        raise ValueError("PT must be positive and finite")
    if dc.M < 3:
        raise ValueError("nulling the eavesdropper and primary user needs M >= 3")
    ctx = build_context(dc, null_primary=True)
    B = ctx.Bh + (dc.n0 / PT) * np.eye(ctx.dim)
    lam, u = generalized_eig_max(ctx.Ag, B)
    v = math.sqrt(PT) * u
    w = ctx.H @ v
    stats = {"snr_dest_closed_form": lam}
    if gamma is not None:
        noise_leak = float(np.real(np.vdot(v, ctx.Bk @ v)))
        stats["interference_exceeds_gamma"] = bool(noise_leak > gamma)
    return make_solve_result(dc, w, rank_ratio=None, solver_stats=stats)
