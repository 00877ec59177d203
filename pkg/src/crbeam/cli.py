"""Experiment harness: seeded channel ensembles, scheme sweeps, CSV output.

Channels are drawn per (seed, realization index), so every sweep point sees
the same realizations and curves are comparable point to point. All dB
handling lives here: configs carry dB values, the library works in linear
scale, and emitted rates are clamped at zero on the way out.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import nullspace, optimal
from .channel import (
    ChannelRealization,
    InterferenceLimit,
    PowerConstraint,
    derive_channel,
    receiver_terms,
)
from .optimal import SearchParams
from .sdp import SdpNumericalError

__all__ = [
    "ExperimentConfig",
    "RealizationBundle",
    "SweepRow",
    "generate_realization",
    "run_power_sweep",
    "run_gamma_sweep",
    "run_single",
    "emit_csv",
    "dump_weights",
    "default_power_sweep_config",
    "default_gamma_sweep_config",
    "main",
]

SCHEMES = ("optimal", "bne", "bnep_sdp", "bnep_closed")
POWER_MODES = ("total", "individual", "both")

CSV_COLUMNS = (
    "sweep_var",
    "value",
    "realization_index",
    "scheme",
    "rate_bits",
    "snr_dest",
    "snr_eve",
    "interference",
    "rank_ratio",
    "solve_ms",
)


def db_to_linear(x_db: float) -> float:
    return float(10.0 ** (x_db / 10.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep setup. All powers and limits are in dB here; sigma_* are the
    channel standard deviations (linear)."""

    M: int = 10
    sigma_g: float = 10.0
    sigma_h: float = 1.0
    sigma_z: float = 1.0
    sigma_k: float = 1.0
    ps_db: float = 0.0
    pt_over_ps_db: tuple = (0.0,)
    gamma_db: tuple = (0.0,)
    n_realizations: int = 10
    seed: int = 0
    schemes: tuple = SCHEMES
    power_mode: str = "total"
    n_primary_users: int = 1
    n_eavesdroppers: int = 1
    search: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "pt_over_ps_db", tuple(float(v) for v in self.pt_over_ps_db))
        object.__setattr__(self, "gamma_db", tuple(float(v) for v in self.gamma_db))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "search", dict(self.search))
        if self.M < 1:
            raise ValueError("M must be >= 1")
        for name in ("sigma_g", "sigma_h", "sigma_z", "sigma_k"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be a finite nonnegative real")
        if not self.pt_over_ps_db or not self.gamma_db:
            raise ValueError("pt_over_ps_db and gamma_db must be nonempty")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not self.schemes:
            raise ValueError("schemes must be nonempty")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {SCHEMES}")
        if self.power_mode not in POWER_MODES:
            raise ValueError(f"power_mode must be one of {POWER_MODES}")
        if self.n_primary_users < 1 or self.n_eavesdroppers < 1:
            raise ValueError("need at least one primary user and one eavesdropper")
        self.validate_scheme_requirements()

    def validate_scheme_requirements(self):
        ne, npu = self.n_eavesdroppers, self.n_primary_users
        if "optimal" in self.schemes and ne > 1:
            raise ValueError("the optimal scheme supports a single eavesdropper")
        if "bne" in self.schemes and self.M < ne + 1:
            raise ValueError("bne needs more relays than eavesdroppers")
        if ("bnep_sdp" in self.schemes or "bnep_closed" in self.schemes) and self.M < ne + npu + 1:
            raise ValueError("bnep needs more relays than eavesdroppers plus primary users")
        if "bnep_closed" in self.schemes and (ne > 1 or npu > 1):
            raise ValueError("bnep_closed supports a single eavesdropper and primary user")
        if self.power_mode == "individual" and self.schemes == ("bnep_closed",):
            raise ValueError("bnep_closed exists only under a total power constraint")

    def to_json(self) -> str:
        d = asdict(self)
        d["pt_over_ps_db"] = list(d["pt_over_ps_db"])
        d["gamma_db"] = list(d["gamma_db"])
        d["schemes"] = list(d["schemes"])
        return json.dumps(d, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))


def default_power_sweep_config(**overrides) -> ExperimentConfig:
    """Reference comparison across relay power budgets: strong source-relay
    hop, unit-variance links elsewhere, 0 dB interference limit."""
    base = dict(
        M=10,
        sigma_g=10.0,
        sigma_h=1.0,
        sigma_z=1.0,
        sigma_k=1.0,
        ps_db=0.0,
        pt_over_ps_db=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
        gamma_db=(0.0,),
        n_realizations=10,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def default_gamma_sweep_config(**overrides) -> ExperimentConfig:
    """Reference sweep over the interference limit: stronger eavesdropper
    and primary links, equal source and relay power."""
    base = dict(
        M=10,
        sigma_g=10.0,
        sigma_h=2.0,
        sigma_z=2.0,
        sigma_k=4.0,
        ps_db=0.0,
        pt_over_ps_db=(0.0,),
        gamma_db=(-10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
        n_realizations=10,
        seed=0,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass(frozen=True)
class RealizationBundle:
    """One channel draw plus raw channels of any extra receivers."""

    real: ChannelRealization
    extra_z: tuple = ()
    extra_k: tuple = ()


def realization_rng(seed: int, index: int) -> np.random.Generator:
    """The per-realization generator; (seed, index) is the whole state."""
    return np.random.default_rng((seed, index))


def generate_realization(rng: np.random.Generator, cfg: ExperimentConfig) -> RealizationBundle:
    """Draw one realization: circular complex Gaussian coefficients with
    per-component variance sigma^2/2 (total sigma^2). Draw order is fixed:
    g, h, all z's, all k's."""
    M = cfg.M

    def cgauss(sigma: float) -> np.ndarray:
        v = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        return v * (sigma / math.sqrt(2.0))

    g = cgauss(cfg.sigma_g)
    h = cgauss(cfg.sigma_h)
    zs = [cgauss(cfg.sigma_z) for _ in range(cfg.n_eavesdroppers)]
    ks = [cgauss(cfg.sigma_k) for _ in range(cfg.n_primary_users)]
    real = ChannelRealization(g=g, h=h, z=zs[0], k=ks[0], Ps=db_to_linear(cfg.ps_db))
    return RealizationBundle(real=real, extra_z=tuple(zs[1:]), extra_k=tuple(ks[1:]))


@dataclass(frozen=True)
class SweepRow:
    sweep_var: str
    value: float
    realization_index: int
    scheme: str
    rate_bits: float
    snr_dest: float
    snr_eve: float
    interference: float
    rank_ratio: float | None
    solve_ms: float
    w: np.ndarray | None = None
    error: str = ""


def _scheme_plan(cfg: ExperimentConfig) -> list[tuple[str, str, str]]:
    """(scheme, power mode, row label) triples the sweep will run."""
    out = []
    for s in cfg.schemes:
        if cfg.power_mode == "both":
            out.append((s, "total", f"{s}:total"))
            if s != "bnep_closed":  # closed form is total-power only
                out.append((s, "individual", f"{s}:indiv"))
        elif cfg.power_mode == "individual":
            if s == "bnep_closed":
                continue
            out.append((s, "individual", s))
        else:
            out.append((s, "total", s))
    return out


def _search_params(cfg: ExperimentConfig) -> tuple[SearchParams, float]:
    """Split cfg.search into optimal-scheme params and the null-space
    bisection tolerance."""
    opts = dict(cfg.search)
    bisect_tol = float(opts.pop("bisect_tol", 1e-5))
    return SearchParams(**opts), bisect_tol


def _solve_one(scheme, mode, dc, bundle, PT, gamma, bisect_tol, sp, seed):
    real = bundle.real
    if mode == "total":
        pc = PowerConstraint.total(PT)
    else:
        pc = PowerConstraint.individual(np.full(real.M, PT / real.M))
    lim = InterferenceLimit(gamma)
    extra_eves = [receiver_terms(real, z) for z in bundle.extra_z]
    extra_pu_pairs = [receiver_terms(real, k) for k in bundle.extra_k]
    if scheme == "optimal":
        pus = [optimal.PrimaryUser.from_channel(dc, gamma)]
        pus += [optimal.PrimaryUser(hk, Dk, gamma) for hk, Dk in extra_pu_pairs]
        return optimal.solve_optimal_multi_pu(dc, pus, pc, sp=sp, seed=seed)
    if scheme == "bne":
        return nullspace.solve_bne(
            dc, pc, lim, bisect_tol=bisect_tol, extra_eves=extra_eves, seed=seed
        )
    if scheme == "bnep_sdp":
        return nullspace.solve_bnep_sdp(
            dc, pc, lim, bisect_tol=bisect_tol, extra_eves=extra_eves,
            extra_pus=[(hk, Dk, gamma) for hk, Dk in extra_pu_pairs], seed=seed,
        )
    if scheme == "bnep_closed":
        return nullspace.solve_bnep_closed_form(dc, PT, gamma=gamma)
    raise ValueError(f"unknown scheme {scheme!r}")


def _run_sweep(cfg: ExperimentConfig, sweep_var: str) -> list[SweepRow]:
    if sweep_var == "pt_over_ps_db":
        values = cfg.pt_over_ps_db
        gamma_fixed = db_to_linear(cfg.gamma_db[0])
    else:
        values = cfg.gamma_db
        pt_fixed_db = cfg.pt_over_ps_db[0]
    Ps = db_to_linear(cfg.ps_db)
    sp, bisect_tol = _search_params(cfg)
    plan = _scheme_plan(cfg)
    rows: list[SweepRow] = []
    for idx in range(cfg.n_realizations):
        bundle = generate_realization(realization_rng(cfg.seed, idx), cfg)
        dc = derive_channel(bundle.real)
        for val in values:
            if sweep_var == "pt_over_ps_db":
                PT = Ps * db_to_linear(val)
                gamma = gamma_fixed
            else:
                PT = Ps * db_to_linear(pt_fixed_db)
                gamma = db_to_linear(val)
            for scheme, mode, label in plan:
                t0 = time.perf_counter()
                try:
                    res = _solve_one(
                        scheme, mode, dc, bundle, PT, gamma, bisect_tol, sp,
                        seed=(cfg.seed, idx),
                    )
                    ms = 1e3 * (time.perf_counter() - t0)
                    rows.append(SweepRow(
                        sweep_var=sweep_var, value=float(val),
                        realization_index=idx, scheme=label,
                        rate_bits=max(0.0, res.secrecy_rate),
                        snr_dest=res.snr_dest, snr_eve=res.snr_eve,
                        interference=res.interference,
                        rank_ratio=res.rank_ratio, solve_ms=ms, w=res.w,
                    ))
                except SdpNumericalError as e:
                    ms = 1e3 * (time.perf_counter() - t0)
                    nan = float("nan")
                    rows.append(SweepRow(
                        sweep_var=sweep_var, value=float(val),
                        realization_index=idx, scheme=label,
                        rate_bits=nan, snr_dest=nan, snr_eve=nan,
                        interference=nan, rank_ratio=None, solve_ms=ms,
                        w=None, error=str(e),
                    ))
    rows.sort(key=lambda r: (r.value, r.realization_index, r.scheme))
    return rows


def run_power_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """One row per (relay power budget, realization, scheme); the
    interference limit is pinned to the first gamma_db entry."""
    return _run_sweep(cfg, "pt_over_ps_db")


def run_gamma_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """One row per (interference limit, realization, scheme); the power
    budget is pinned to the first pt_over_ps_db entry."""
    return _run_sweep(cfg, "gamma_db")


def run_single(cfg: ExperimentConfig, index: int = 0) -> list[SweepRow]:
    """All schemes on one realization at the first sweep point."""
    sub = ExperimentConfig(**{
        **asdict(cfg),
        "pt_over_ps_db": (cfg.pt_over_ps_db[0],),
        "gamma_db": (cfg.gamma_db[0],),
        "n_realizations": index + 1,
    })
    rows = _run_sweep(sub, "pt_over_ps_db")
    return [r for r in rows if r.realization_index == index]


def _fmt(x) -> str:
    if x is None:
        return ""
    return f"{float(x):.17g}"


def emit_csv(rows, path) -> None:
    """Write rows as CSV (17 significant digits, '.'-decimal, one header)."""
    if not rows:
        raise ValueError("no rows to emit")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(",".join(CSV_COLUMNS) + "\n")
            for r in rows:
                f.write(",".join([
                    r.sweep_var,
                    _fmt(r.value),
                    str(r.realization_index),
                    r.scheme,
                    _fmt(r.rate_bits),
                    _fmt(r.snr_dest),
                    _fmt(r.snr_eve),
                    _fmt(r.interference),
                    _fmt(r.rank_ratio),
                    _fmt(r.solve_ms),
                ]) + "\n")
    except OSError as e:
        raise RuntimeError(f"cannot write CSV to {path}: {e}") from e


def dump_weights(rows, path) -> None:
    """Write the beamforming weights behind each row as JSON."""
    out = []
    for r in rows:
        entry = {
            "sweep_var": r.sweep_var,
            "value": r.value,
            "realization_index": r.realization_index,
            "scheme": r.scheme,
        }
        if r.w is None:
            entry["w_re"] = None
            entry["w_im"] = None
        else:
            entry["w_re"] = [float(v) for v in np.real(r.w)]
            entry["w_im"] = [float(v) for v in np.imag(r.w)]
        out.append(entry)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(out, f, indent=1)
            f.write("\n")
    except OSError as e:
        raise RuntimeError(f"cannot write weights to {path}: {e}") from e


def _load_config(args, default_builder) -> ExperimentConfig:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = ExperimentConfig.from_json(f.read())
    else:
        cfg = default_builder()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.schemes:
        updates["schemes"] = tuple(s.strip() for s in args.schemes.split(",") if s.strip())
    if args.realizations is not None:
        updates["n_realizations"] = args.realizations
    if updates:
        cfg = ExperimentConfig(**{**asdict(cfg), **updates})
    return cfg


def _print_rows(rows) -> None:
    for r in rows:
        extras = f"  error={r.error}" if r.error else ""
        rr = "none" if r.rank_ratio is None else f"{r.rank_ratio:.3e}"
        print(
            f"{r.scheme:>14s}  {r.sweep_var}={r.value:g}  real={r.realization_index}"
            f"  rate_bits={r.rate_bits:.6f}  snr_dest={r.snr_dest:.6g}"
            f"  snr_eve={r.snr_eve:.3e}  interference={r.interference:.6g}"
            f"  rank_ratio={rr}  solve_ms={r.solve_ms:.1f}{extras}"
        )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crbeam",
        description="Secrecy-rate relay beamforming experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("power-sweep", "sweep the relay power budget"),
        ("gamma-sweep", "sweep the interference limit"),
        ("single", "solve one realization and print the results"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config path (defaults built in)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--schemes", help="comma-separated scheme subset")
        p.add_argument("--realizations", type=int, default=None)
        p.add_argument("--out", help="CSV output path")
        p.add_argument("--dump-weights", help="JSON weights output path")
        p.add_argument("--strict", action="store_true",
                       help="exit nonzero if any solve failed numerically")
        if name == "single":
            p.add_argument("--index", type=int, default=0,
                           help="realization index to solve")
    args = parser.parse_args(argv)

    builder = (
        default_gamma_sweep_config if args.command == "gamma-sweep"
        else default_power_sweep_config
    )
    try:
        cfg = _load_config(args, builder)
        if args.command == "power-sweep":
            rows = run_power_sweep(cfg)
        elif args.command == "gamma-sweep":
            rows = run_gamma_sweep(cfg)
        else:
            rows = run_single(cfg, index=args.index)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.command == "single" or not args.out:
        _print_rows(rows)
    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    if args.dump_weights:
        dump_weights(rows, args.dump_weights)
        print(f"wrote weights to {args.dump_weights}")

    failures = [r for r in rows if r.error]
    if failures:
        print(f"{len(failures)} solve(s) failed numerically", file=sys.stderr)
        if args.strict:
            return 1
    return 0
