"""Channel model and exact link-quality evaluation for an amplify-and-forward
relay network.

A source talks to a destination through M single-antenna relays while an
eavesdropper listens and a primary receiver must be protected from
interference. Each relay scales its received signal by l_m and applies a
complex beamforming weight w_m. All second-hop quality measures reduce to
quadratic forms in w built from a handful of composite vectors and diagonal
noise matrices, which :func:`derive_channel` precomputes:

    l_m  = 1 / sqrt(|g_m|^2 Ps + N_m)
    hg_m = conj(h_m) conj(g_m) l_m        (destination signal vector)
    hz_m = conj(z_m) conj(g_m) l_m        (eavesdropper signal vector)
    hk_m = conj(k_m) conj(g_m) l_m        (primary-user signal vector)
    Dh   = diag(|h_m|^2 l_m^2 N_m)        (forwarded-noise terms, destination)
    Dz, Dk analogous for eavesdropper / primary user.

Destination SNR, eavesdropper SNR and primary-user interference are then

    snr_dest = Ps |hg^H w|^2 / (w^H Dh w + N0)
    snr_eve  = Ps |hz^H w|^2 / (w^H Dz w + N0)
    interference = Ps |hk^H w|^2 + w^H Dk w

and the secrecy rate is log2(1 + snr_dest) - log2(1 + snr_eve), reported
signed here; clamping at zero is an output-formatting concern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ChannelRealization",
    "DerivedChannel",
    "PowerConstraint",
    "InterferenceLimit",
    "SolveResult",
    "FeasibilityReport",
    "Violation",
    "derive_channel",
    "receiver_terms",
    "snr_destination",
    "snr_eavesdropper",
    "interference",
    "secrecy_rate",
    "check_feasible",
    "make_solve_result",
]


def _complex_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the network fading state.

    g, h, z, k are the source-to-relay, relay-to-destination,
    relay-to-eavesdropper and relay-to-primary coefficient vectors (all
    length M). N holds per-relay noise powers, N0 the receiver noise power,
    Ps the source transmit power. N defaults to all ones.
    """

    g: np.ndarray
    h: np.ndarray
    z: np.ndarray
    k: np.ndarray
    N: np.ndarray | None = None
    N0: float = 1.0
    Ps: float = 1.0

    def __post_init__(self):
        g = _complex_vector(self.g, "g")
        h = _complex_vector(self.h, "h")
        z = _complex_vector(self.z, "z")
        k = _complex_vector(self.k, "k")
        if not (len(g) == len(h) == len(z) == len(k)):
            raise ValueError("g, h, z, k must share the same length")
        if self.N is None:
            N = np.ones(len(g))
        else:
            N = np.asarray(self.N, dtype=float)
        if N.shape != g.shape or np.any(N <= 0) or not np.all(np.isfinite(N)):
            raise ValueError("N must be a length-M vector of positive reals")
        if not (self.N0 > 0 and math.isfinite(self.N0)):
            raise ValueError("N0 must be positive and finite")
        if not (self.Ps > 0 and math.isfinite(self.Ps)):
            raise ValueError("Ps must be positive and finite")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "N0", float(self.N0))
        object.__setattr__(self, "Ps", float(self.Ps))

    @property
    def M(self) -> int:
        return len(self.g)


@dataclass(frozen=True)
class DerivedChannel:
    """Precomputed composite vectors / noise matrices for one realization.

    Dh, Dz, Dk are full (diagonal) M x M matrices so downstream trace algebra
    can consume them directly; off-diagonals are exactly zero.
    """

    l: np.ndarray
    hg: np.ndarray
    hz: np.ndarray
    hk: np.ndarray
    Dh: np.ndarray
    Dz: np.ndarray
    Dk: np.ndarray
    ps: float
    n0: float

    @property
    def M(self) -> int:
        return len(self.l)


def receiver_terms(real: ChannelRealization, coeffs: np.ndarray):
    """Composite signal vector and diagonal noise matrix for one receiver.

    coeffs is the relay-to-receiver coefficient vector. Returns (v, D) with
    v_m = conj(coeffs_m) conj(g_m) l_m and D = diag(|coeffs_m|^2 l_m^2 N_m).
    """
    coeffs = _complex_vector(coeffs, "coeffs")
    if len(coeffs) != real.M:
        raise ValueError("coefficient vector length must equal M")
    l = 1.0 / np.sqrt(np.abs(real.g) ** 2 * real.Ps + real.N)
    v = np.conj(coeffs) * np.conj(real.g) * l
    D = np.diag(np.abs(coeffs) ** 2 * l**2 * real.N)
    return v, D


def derive_channel(real: ChannelRealization) -> DerivedChannel:
    """Build the DerivedChannel for a realization."""
    l = 1.0 / np.sqrt(np.abs(real.g) ** 2 * real.Ps + real.N)
    hg, Dh = receiver_terms(real, real.h)
    hz, Dz = receiver_terms(real, real.z)
    hk, Dk = receiver_terms(real, real.k)
    return DerivedChannel(
        l=l, hg=hg, hz=hz, hk=hk, Dh=Dh, Dz=Dz, Dk=Dk,
        ps=real.Ps, n0=real.N0,
    )


@dataclass(frozen=True)
class PowerConstraint:
    """Relay power limits: total sum power PT, per-relay caps p, or both."""

    PT: float | None = None
    p: np.ndarray | None = None

    def __post_init__(self):
        if self.PT is None and self.p is None:
            raise ValueError("PowerConstraint needs PT, p, or both")
        if self.PT is not None:
            if not (self.PT > 0 and math.isfinite(self.PT)):
                raise ValueError("PT must be positive and finite")
            object.__setattr__(self, "PT", float(self.PT))
        if self.p is not None:
            p = np.asarray(self.p, dtype=float)
            if p.ndim != 1 or np.any(p <= 0) or not np.all(np.isfinite(p)):
                raise ValueError("p must be a 1-D vector of positive reals")
            object.__setattr__(self, "p", p)

    @classmethod
    def total(cls, PT: float) -> "PowerConstraint":
        return cls(PT=PT)

    @classmethod
    def individual(cls, p) -> "PowerConstraint":
        return cls(p=p)

    @classmethod
    def both(cls, PT: float, p) -> "PowerConstraint":
        return cls(PT=PT, p=p)

    @property
    def mode(self) -> str:
        if self.PT is not None and self.p is not None:
            return "both"
        return "total" if self.PT is not None else "individual"

    def effective_total(self) -> float:
        """A valid bound on ||w||^2 regardless of mode."""
        if self.PT is not None:
            return self.PT
        return float(np.sum(self.p))


@dataclass(frozen=True)
class InterferenceLimit:
    """Cap gamma on the interference power seen by a primary user."""

    gamma: float

    def __post_init__(self):
        if math.isnan(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be >= 0 (inf allowed)")
        object.__setattr__(self, "gamma", float(self.gamma))


def _weights(dc: DerivedChannel, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (dc.M,):
        raise ValueError(f"w must have shape ({dc.M},)")
    return w


def snr_destination(dc: DerivedChannel, w) -> float:
    w = _weights(dc, w)
    sig = dc.ps * abs(np.vdot(dc.hg, w)) ** 2
    noise = np.real(np.vdot(w, dc.Dh @ w)) + dc.n0
    return float(sig / noise)


def snr_eavesdropper(dc: DerivedChannel, w) -> float:
    w = _weights(dc, w)
    sig = dc.ps * abs(np.vdot(dc.hz, w)) ** 2
    noise = np.real(np.vdot(w, dc.Dz @ w)) + dc.n0
    return float(sig / noise)


def interference(dc: DerivedChannel, w) -> float:
    w = _weights(dc, w)
    return float(dc.ps * abs(np.vdot(dc.hk, w)) ** 2 + np.real(np.vdot(w, dc.Dk @ w)))


def secrecy_rate(dc: DerivedChannel, w) -> float:
    """Signed secrecy rate in bits: log2(1+snr_dest) - log2(1+snr_eve)."""
    return float(
        math.log2(1.0 + snr_destination(dc, w))
        - math.log2(1.0 + snr_eavesdropper(dc, w))
    )


@dataclass(frozen=True)
class Violation:
    name: str
    value: float
    bound: float

    @property
    def excess(self) -> float:
        return self.value - self.bound


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:  # truthy when feasible
        return self.ok


def check_feasible(
    dc: DerivedChannel,
    w,
    pc: PowerConstraint,
    lim: InterferenceLimit | None = None,
    tol: float = 1e-7,
) -> FeasibilityReport:
    """Report every power/interference constraint w violates beyond tol.

    tol is relative to each bound; the report is empty iff all constraints
    hold within it.
    """
    w = _weights(dc, w)
    out: list[Violation] = []

    def check(name: str, value: float, bound: float):
        if math.isinf(bound):
            return
        if value - bound > tol * abs(bound):
            out.append(Violation(name, value, bound))

    if pc.PT is not None:
        check("total_power", float(np.sum(np.abs(w) ** 2)), pc.PT)
    if pc.p is not None:
        if len(pc.p) != dc.M:
            raise ValueError("per-relay power vector length must equal M")
        for m in range(dc.M):
            check(f"relay_power_{m}", float(abs(w[m]) ** 2), float(pc.p[m]))
    if lim is not None:
        check("interference", interference(dc, w), lim.gamma)
    return FeasibilityReport(tuple(out))


@dataclass(frozen=True)
class SolveResult:
    """Beamformer output with all link measures evaluated from w itself.

    rank_ratio is the relaxation's second-to-first eigenvalue ratio when an
    SDP produced the weights; closed-form solvers leave it as None.
    """

    w: np.ndarray
    snr_dest: float
    snr_eve: float
    interference: float
    secrecy_rate: float
    rank_ratio: float | None
    solver_stats: dict


def make_solve_result(
    dc: DerivedChannel,
    w,
    rank_ratio: float | None = None,
    solver_stats: dict | None = None,
    extra_eve_vectors: Sequence[tuple[np.ndarray, np.ndarray]] = (),
    pu_vectors: Sequence[tuple[np.ndarray, np.ndarray]] | None = None,
) -> SolveResult:
    """Assemble a SolveResult, recomputing every reported quantity from w.

    extra_eve_vectors holds (hz_i, Dz_i) pairs for additional eavesdroppers;
    the reported eavesdropper SNR (and hence the rate) uses the strongest one.
    pu_vectors, when given, holds (hk_i, Dk_i) pairs replacing dc's built-in
    primary user; the reported interference is the max over them.
    """
    w = _weights(dc, w)
    snr_e = snr_eavesdropper(dc, w)
    for hz_i, Dz_i in extra_eve_vectors:
        sig = dc.ps * abs(np.vdot(hz_i, w)) ** 2
        noise = np.real(np.vdot(w, Dz_i @ w)) + dc.n0
        snr_e = max(snr_e, float(sig / noise))
    snr_d = snr_destination(dc, w)
    rate = math.log2(1.0 + snr_d) - math.log2(1.0 + snr_e)
    if pu_vectors is None:
        lam = interference(dc, w)
    else:
        lam = 0.0
        for hk_i, Dk_i in pu_vectors:
            val = dc.ps * abs(np.vdot(hk_i, w)) ** 2 + np.real(np.vdot(w, Dk_i @ w))
            lam = max(lam, float(val))
    return SolveResult(
        w=w,
        snr_dest=snr_d,
        snr_eve=snr_e,
        interference=lam,
        secrecy_rate=float(rate),
        rank_ratio=rank_ratio,
        solver_stats=dict(solver_stats or {}),
    )
