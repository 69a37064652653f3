from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from weakvalues.core import HermitianOperator, PureState
from weakvalues.document import load_setup

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "golden"
GOLDEN_NAMES = ("threebox", "aav", "generic_d2")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_state(rng: np.random.Generator, d: int) -> PureState:
    return PureState(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> HermitianOperator:
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return HermitianOperator(scale * 0.5 * (m + m.conj().T))


def expm_taylor(h: np.ndarray, t: float, terms: int = 30) -> np.ndarray:
    """exp(-i h t) by a truncated power series; independent of any eigensolver."""
    x = -1j * t * np.asarray(h, dtype=complex)
    out = np.eye(x.shape[0], dtype=complex)
    term = np.eye(x.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ x / k
        out = out + term
    return out


def gaussian_amp(f, width):
    return (2 * math.pi * width**2) ** -0.25 * math.exp(-(f**2) / (4 * width**2))


def quad_kernels(a: float, b: float, width: float) -> tuple[float, float]:
    """K and M by direct integration of the shifted Gaussians, centred on (a+b)/2."""
    c = 0.5 * (a + b)
    lo, hi = min(a, b) - 10 * width - 10, max(a, b) + 10 * width + 10
    pts = sorted({x for x in (a, b, c) if lo < x < hi})

    def prod(f):
        return gaussian_amp(f - a, width) * gaussian_amp(f - b, width)

    opts = dict(points=pts, limit=400, epsabs=1e-14, epsrel=1e-13)
    k = integrate.quad(prod, lo, hi, **opts)[0]
    # odd about c, so the exact value is 0; ask only for 1e-12 absolute
    opts["epsabs"] = 1e-12 * max(1.0, width)
    first = integrate.quad(lambda f: (f - c) * prod(f), lo, hi, **opts)[0]
    return k, c * k + first


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=GOLDEN_NAMES)
def golden_doc(request):
    return load_setup(GOLDEN / f"{request.param}.json")
