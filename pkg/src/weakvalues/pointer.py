"""Gaussian von Neumann meter coupled to the virtual paths.

An impulsive coupling shifts the pointer by ``g * B_i`` on path ``i``.  After
post-selection the pointer wavefunction is ``sum_i A_i G(f - g B_i)`` with

    G(f) = (2 pi w^2)^(-1/4) exp(-f^2 / (4 w^2)),

so ``G^2`` is a normalized Gaussian density of standard deviation ``w``
(the meter width).  Overlaps of two shifted copies are analytic::

    K(a, b) = int G(f-a) G(f-b) df   = exp(-(a-b)^2 / (8 w^2))
    M(a, b) = int f G(f-a) G(f-b) df = (a+b)/2 * K(a, b)

The closed-form mean shift uses these kernels; an adaptive-quadrature route
evaluates the same integrals directly from the wavefunction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import integrate

from .core import Observable, PathSet, path_amplitudes, strong_mean, weak_value_of_paths
from .errors import ForbiddenTransition, NumericalError, ValidationError

__all__ = [
    "EPS_NORM",
    "MeterConfig",
    "MeasurementSetup",
    "Method",
    "PointerStatistics",
    "SweepRow",
    "WidthSweep",
    "gaussian",
    "overlap_kernel",
    "first_moment_kernel",
    "pointer_density",
    "postselect_norm",
    "mean_pointer_shift",
    "mean_pointer_shift_quadrature",
    "sweep_width",
    "scaling_equivalence_check",
    "loglog_slope",
]

EPS_NORM = 1e-14
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 500


@dataclass(frozen=True, eq=False)
class MeterConfig:
    width: float
    eigenvalues: np.ndarray
    coupling: float = 1.0

    def __post_init__(self):
        if isinstance(self.eigenvalues, Observable):
            b = self.eigenvalues.eigenvalues
        else:
            b = Observable(self.eigenvalues).eigenvalues
        object.__setattr__(self, "eigenvalues", b)
        w = float(self.width)
        if not (math.isfinite(w) and w > 0):
            raise ValidationError(f"meter width must be positive and finite, got {self.width}")
        g = float(self.coupling)
        if not math.isfinite(g):
            raise ValidationError("coupling must be finite")
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "coupling", g)

    @property
    def observable(self) -> Observable:
        return Observable(self.eigenvalues)

    @property
    def shifts(self) -> np.ndarray:
        """Pointer displacement g * B_i on each path."""
        return self.coupling * self.eigenvalues

    def __eq__(self, other):
        if not isinstance(other, MeterConfig):
            return NotImplemented
        return (
            self.width == other.width
            and self.coupling == other.coupling
            and np.array_equal(self.eigenvalues, other.eigenvalues)
        )


@dataclass(frozen=True)
class MeasurementSetup:
    paths: PathSet
    meter: MeterConfig

    def __post_init__(self):
        if self.paths.d != self.meter.eigenvalues.size:
            raise ValidationError(
                f"{self.paths.d} paths but {self.meter.eigenvalues.size} meter eigenvalues"
            )

    @classmethod
    def from_states(cls, psi, phi, h, t, meter: MeterConfig, tau=None) -> MeasurementSetup:
        return cls(path_amplitudes(psi, phi, h, t, tau), meter)

    def with_meter(self, **changes) -> MeasurementSetup:
        return MeasurementSetup(self.paths, replace(self.meter, **changes))


class Method(str, Enum):
    closed_form = "closed_form"
    quadrature = "quadrature"


@dataclass(frozen=True)
class PointerStatistics:
    norm: float
    mean_shift: float
    method: Method = Method.closed_form
    diagnostics: dict = field(default_factory=dict, compare=False)


def gaussian(f, width: float):
    """Pointer wavefunction G(f), real and normalized so that int G^2 = 1."""
    f = np.asarray(f, dtype=float)
    return (2.0 * np.pi * width**2) ** -0.25 * np.exp(-(f**2) / (4.0 * width**2))


def overlap_kernel(a, b, width: float):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.exp(-((a - b) ** 2) / (8.0 * width**2))


def first_moment_kernel(a, b, width: float):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return 0.5 * (a + b) * overlap_kernel(a, b, width)


def _interference_weights(paths: PathSet) -> np.ndarray:
    a = paths.amplitudes
    return np.real(np.outer(a, a.conj()))


def _norm_and_moment(setup: MeasurementSetup) -> tuple[float, float]:
    """sum W K and sum W M, with the K = 1 parts taken out exactly.

    Writing K = 1 + expm1(...) keeps relative precision when the total
    amplitude nearly cancels, where sum W K is a small difference of O(1) terms.
    """
    a = setup.paths.amplitudes
    s = setup.meter.shifts
    total = a.sum()
    w = _interference_weights(setup.paths)
    km1 = np.expm1(-((s[:, None] - s[None, :]) ** 2) / (8.0 * setup.meter.width**2))
    norm = float(abs(total) ** 2) + float(np.sum(w * km1))
    first = float(np.real(np.conj(total) * (a @ s)))
    first += float(np.sum(w * 0.5 * (s[:, None] + s[None, :]) * km1))
    return norm, first


def postselect_norm(setup: MeasurementSetup) -> float:
    """<Phi|Phi> = sum_ij Re(A_i A_j*) K(g B_i, g B_j)."""
    return _norm_and_moment(setup)[0]


def _require_norm(norm: float, eps: float):
    if not norm > eps:
        raise ForbiddenTransition(f"post-selected norm {norm:.3e} <= {eps:.1e}")


def mean_pointer_shift(setup: MeasurementSetup, eps: float = EPS_NORM) -> PointerStatistics:
    norm, first = _norm_and_moment(setup)
    _require_norm(norm, eps)
    return PointerStatistics(norm=norm, mean_shift=first / norm, method=Method.closed_form)


def pointer_density(setup: MeasurementSetup, f, eps: float = EPS_NORM):
    """Normalized post-selected reading density |sum_i A_i G(f - g B_i)|^2 / <Phi|Phi>."""
    norm = postselect_norm(setup)
    _require_norm(norm, eps)
    f = np.asarray(f, dtype=float)
    g = gaussian(f[..., None] - setup.meter.shifts, setup.meter.width)
    return np.abs(g @ setup.paths.amplitudes) ** 2 / norm


def _quad_interval(setup: MeasurementSetup) -> tuple[float, float]:
    s = setup.meter.shifts
    pad = 10.0 * setup.meter.width + 10.0
    return float(s.min() - pad), float(s.max() + pad)


class _FoldedDensity:
    """Unnormalized density evaluated in extended precision about a centre ``c``.

    Folding ``u -> c +/- u`` turns the first-moment integrand into its odd part,
    which keeps the quadrature free of the large cancellation a broad meter
    would otherwise cause.
    """

    def __init__(self, setup: MeasurementSetup, centre: float):
        ld = np.longdouble
        self.c = ld(centre)
        self.s = setup.meter.shifts.astype(ld)
        self.re = setup.paths.amplitudes.real.astype(ld)
        self.im = setup.paths.amplitudes.imag.astype(ld)
        w = ld(setup.meter.width)
        self.inv4w2 = ld(1) / (ld(4) * w * w)
        self.pref = (ld(2) * ld(np.pi) * w * w) ** ld(-0.25)

    def rho(self, f):
        g = self.pref * np.exp(-((f - self.s) ** 2) * self.inv4w2)
        return np.dot(self.re, g) ** 2 + np.dot(self.im, g) ** 2

    def even(self, u: float) -> float:
        u = np.longdouble(u)
        return float(self.rho(self.c + u) + self.rho(self.c - u))

    def odd_moment(self, u: float) -> float:
        u = np.longdouble(u)
        return float(u * (self.rho(self.c + u) - self.rho(self.c - u)))


def _breakpoints(setup: MeasurementSetup, centre: float, half: float) -> list[float]:
    s = np.unique(setup.meter.shifts)
    centres = np.unique(0.5 * (s[:, None] + s[None, :]))
    width = setup.meter.width
    cand = sorted(
        float(abs(x + k * width - centre))
        for x in centres
        for k in (-8.0, -3.0, 0.0, 3.0, 8.0)
    )
    # near-coincident breakpoints create subintervals dominated by roundoff
    pts = []
    for u in cand:
        if 0.25 * width < u < half - 0.25 * width and (not pts or u - pts[-1] > 0.25 * width):
            pts.append(u)
    return pts


def _quad(func, half, points, epsabs, label):
    out = integrate.quad(
        func,
        0.0,
        half,
        points=points or None,
        epsabs=epsabs,
        epsrel=QUAD_EPSREL,
        limit=QUAD_LIMIT,
        full_output=1,
    )
    if len(out) == 4:
        value, abserr, info, message = out
        raise NumericalError(
            f"quadrature of the {label} did not converge: {message.strip()}",
            value=value,
            abserr=abserr,
            neval=info.get("neval"),
        )
    value, abserr, info = out
    return value, abserr, info["neval"]


def mean_pointer_shift_quadrature(setup: MeasurementSetup, eps: float = EPS_NORM) -> PointerStatistics:
    """Independent evaluation of the mean shift by adaptive quadrature of the wavefunction."""
    lo, hi = _quad_interval(setup)
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    dens = _FoldedDensity(setup, centre)
    points = _breakpoints(setup, centre, half)
    scale = float(np.sum(np.abs(setup.paths.amplitudes) ** 2))

    norm, norm_err, n1 = _quad(dens.even, half, points, 1e-15 * scale, "post-selected norm")
    _require_norm(norm, eps)
    shift_scale = max(1.0, float(np.max(np.abs(setup.meter.shifts))))
    moment, moment_err, n2 = _quad(
        dens.odd_moment, half, points, 1e-11 * norm * shift_scale, "first moment"
    )
    return PointerStatistics(
        norm=norm,
        mean_shift=centre + moment / norm,
        method=Method.quadrature,
        diagnostics={
            "interval": (lo, hi),
            "norm_abserr": norm_err,
            "moment_abserr": moment_err,
            "neval": n1 + n2,
        },
    )


@dataclass(frozen=True)
class SweepRow:
    width: float
    mean_shift: float | None
    norm: float
    strong_error: float | None
    weak_error: float | None

    @property
    def forbidden(self) -> bool:
        return self.mean_shift is None


@dataclass(frozen=True)
class WidthSweep:
    """Mean shift versus meter width, with the distance to both limiting values."""

    rows: tuple[SweepRow, ...]
    strong_limit: float | None
    weak_limit: float | None

    @property
    def widths(self) -> np.ndarray:
        return np.array([r.width for r in self.rows])

    def weak_slope(self) -> float:
        return loglog_slope(self.widths, [r.weak_error for r in self.rows])

    def strong_errors(self) -> np.ndarray:
        return np.array([np.nan if r.strong_error is None else r.strong_error for r in self.rows])


def loglog_slope(x, err) -> float:
    """Least-squares slope of log|err| against log x; NaN when any point is missing or zero."""
    e = np.array([np.nan if v is None else abs(v) for v in err], dtype=float)
    x = np.asarray(x, dtype=float)
    if x.size < 2 or not np.all(np.isfinite(e)) or np.any(e == 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(e), 1)[0])


def sweep_width(
    setup: MeasurementSetup, widths, eps: float = EPS_NORM, quadrature: bool = False
) -> WidthSweep:
    """Mean shift for each width; forbidden widths yield rows with ``mean_shift=None``."""
    mean = mean_pointer_shift_quadrature if quadrature else mean_pointer_shift
    widths = np.asarray(widths, dtype=float).reshape(-1)
    if widths.size == 0 or np.any(np.diff(widths) < 0):
        raise ValidationError("widths must be a non-empty ascending sequence")
    g = setup.meter.coupling
    obs = setup.meter.observable
    try:
        strong = g * strong_mean(setup.paths, obs)
    except ForbiddenTransition:
        strong = None
    try:
        weak = g * weak_value_of_paths(setup.paths, obs).real
    except ForbiddenTransition:
        weak = None

    rows = []
    for w in widths:
        s = setup.with_meter(width=float(w))
        try:
            stats = mean(s, eps)
        except ForbiddenTransition:
            rows.append(SweepRow(float(w), None, postselect_norm(s), None, None))
            continue
        m = stats.mean_shift
        rows.append(
            SweepRow(
                width=float(w),
                mean_shift=m,
                norm=stats.norm,
                strong_error=None if strong is None else m - strong,
                weak_error=None if weak is None else m - weak,
            )
        )
    return WidthSweep(tuple(rows), strong, weak)


def scaling_equivalence_check(setup: MeasurementSetup, gamma: float) -> tuple[float, float]:
    """Coupling x gamma at fixed width versus gamma x (mean at width / gamma)."""
    if not (math.isfinite(gamma) and gamma > 0):
        raise ValidationError("gamma must be positive and finite")
    m = setup.meter
    stronger = mean_pointer_shift(setup.with_meter(coupling=gamma * m.coupling)).mean_shift
    narrower = mean_pointer_shift(setup.with_meter(width=m.width / gamma)).mean_shift
    return stronger, gamma * narrower
