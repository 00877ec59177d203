"""Shared test helpers: independent scalar oracles for the channel model,
random instance builders, and the acceptance summary hook."""

import math

import numpy as np
import pytest

from crbeam.channel import ChannelRealization

# one line per acceptance check, printed after the run (see hook below)
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(ok: bool, label: str, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    line = f"[{tag}] {label}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def cgauss(rng, n, sigma=1.0):
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * (sigma / math.sqrt(2.0))


def random_real(rng, M=4, sg=10.0, sh=1.0, sz=1.0, sk=1.0, Ps=1.0) -> ChannelRealization:
    return ChannelRealization(
        g=cgauss(rng, M, sg), h=cgauss(rng, M, sh),
        z=cgauss(rng, M, sz), k=cgauss(rng, M, sk), Ps=Ps,
    )


# ---- scalar-sum oracles, written directly from the signal model ----
# Deliberately index-by-index python loops: an independent path from the
# vectorized production code.

def oracle_amplify(real):
    M = real.M
    l = [1.0 / math.sqrt(abs(real.g[m]) ** 2 * real.Ps + real.N[m]) for m in range(M)]
    return l


def oracle_snr_generic(real, recv, w, N0=1.0):
    """Γ at a receiver with second-hop channel vector recv.

    Built from the physical story: relay m hears g_m*s + n_m, retransmits
    w_m*l_m*(that), the receiver adds its own unit-power noise.
    """
    l = oracle_amplify(real)
    sig = 0.0 + 0.0j
    noise = 0.0
    for m in range(real.M):
        sig += recv[m] * real.g[m] * l[m] * w[m]
        noise += (abs(recv[m]) ** 2) * (l[m] ** 2) * real.N[m] * abs(w[m]) ** 2
    return real.Ps * abs(sig) ** 2 / (noise + N0)


def oracle_interference(real, w):
    l = oracle_amplify(real)
    sig = 0.0 + 0.0j
    noise = 0.0
    for m in range(real.M):
        sig += real.k[m] * real.g[m] * l[m] * w[m]
        noise += (abs(real.k[m]) ** 2) * (l[m] ** 2) * real.N[m] * abs(w[m]) ** 2
    return real.Ps * abs(sig) ** 2 + noise


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
