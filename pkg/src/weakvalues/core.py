"""Amplitude algebra for pre- and post-selected finite-dimensional systems.

The system starts in ``psi``, evolves under a time-independent Hamiltonian
for a total time ``t`` and is post-selected in ``phi``.  Inserting the
identity ``sum_i |i><i|`` at an intermediate time ``tau`` splits the
transition amplitude into one sub-amplitude per computational basis path::

    A_i = <phi| U(t - tau) |i><i| U(tau) |psi>,   U(s) = exp(-i H s)

From those amplitudes the module derives the path probabilities of an
accurate (strong) meter and the relative amplitudes that govern an
inaccurate (weak) one.  Units: hbar = 1, ``H * t`` dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ForbiddenTransition, NoOpenPath, NumericalError, ValidationError

__all__ = [
    "EPS_AMPLITUDE",
    "PureState",
    "HermitianOperator",
    "Observable",
    "PathSet",
    "propagator",
    "evolve",
    "transition_amplitude",
    "path_amplitudes",
    "relative_amplitudes",
    "path_probabilities",
    "strong_mean",
    "weak_value",
    "weak_value_of_paths",
]

EPS_AMPLITUDE = 1e-12
HERMITIAN_TOL = 1e-12


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized coefficient vector of a d-level system (d >= 2).

    The constructor normalizes its input; the zero vector is rejected.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size < 2:
            raise ValidationError(f"state dimension must be >= 2, got {c.size}")
        if not np.all(np.isfinite(c)):
            raise ValidationError("state coefficients must be finite")
        norm = np.linalg.norm(c)
        if norm == 0.0:
            raise ValidationError("zero vector is not a valid state")
        # leave already-normalized input bit-exact so serialization round-trips
        if abs(norm - 1.0) > 4 * np.finfo(float).eps:
            c = c / norm
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def basis(cls, d: int, i: int) -> PureState:
        c = np.zeros(d, dtype=complex)
        c[i] = 1.0
        return cls(c)

    @property
    def d(self) -> int:
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"PureState({self.coeffs.tolist()!r})"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"operator must be a square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValidationError("operator entries must be finite")
        scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
            raise ValidationError("operator is not Hermitian")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @classmethod
    def zero(cls, d: int) -> HermitianOperator:
        return cls(np.zeros((d, d), dtype=complex))

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    def __eq__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)


@dataclass(frozen=True, eq=False)
class Observable:
    """Operator diagonal in the computational basis, given by its eigenvalues B_i."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        b = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if b.size < 1:
            raise ValidationError("observable needs at least one eigenvalue")
        if not np.all(np.isfinite(b)):
            raise ValidationError("eigenvalues must be finite")
        object.__setattr__(self, "eigenvalues", _frozen(b))

    @classmethod
    def projector(cls, d: int, i: int) -> Observable:
        b = np.zeros(d)
        b[i] = 1.0
        return cls(b)

    @classmethod
    def identity(cls, d: int) -> Observable:
        return cls(np.ones(d))

    @classmethod
    def route_number(cls, d: int = 2) -> Observable:
        """Route number operator, eigenvalue i on path i (1-based)."""
        return cls(np.arange(1, d + 1, dtype=float))

    @property
    def d(self) -> int:
        return self.eigenvalues.size

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.eigenvalues.astype(complex))

    def __eq__(self, other):
        if not isinstance(other, Observable):
            return NotImplemented
        return np.array_equal(self.eigenvalues, other.eigenvalues)


@dataclass(frozen=True, eq=False)
class PathSet:
    """Complex amplitudes A_i of the virtual paths and their sum."""

    amplitudes: np.ndarray
    total: complex = field(init=False)

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if a.size < 1:
            raise ValidationError("path set is empty")
        if not np.all(np.isfinite(a)):
            raise ValidationError("path amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _frozen(a))
        object.__setattr__(self, "total", complex(a.sum()))

    @property
    def d(self) -> int:
        return self.amplitudes.size

    def __eq__(self, other):
        if not isinstance(other, PathSet):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __repr__(self):
        return f"PathSet({self.amplitudes.tolist()!r})"


def _check_dims(*objs):
    dims = {o.d for o in objs}
    if len(dims) != 1:
        raise ValidationError(f"dimension mismatch: {sorted(dims)}")


def propagator(h: HermitianOperator, t: float) -> np.ndarray:
    """exp(-i h t) from the spectral decomposition of ``h``."""
    if not np.isfinite(t):
        raise ValidationError("evolution time must be finite")
    if h.is_zero or t == 0:
        return np.eye(h.d, dtype=complex)
    try:
        w, v = np.linalg.eigh(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(state: PureState, h: HermitianOperator, t: float) -> PureState:
    _check_dims(state, h)
    return PureState(propagator(h, t) @ state.coeffs)


def transition_amplitude(psi: PureState, phi: PureState, h: HermitianOperator, t: float) -> complex:
    _check_dims(psi, phi, h)
    return complex(np.vdot(phi.coeffs, propagator(h, t) @ psi.coeffs))


def path_amplitudes(
    psi: PureState,
    phi: PureState,
    h: HermitianOperator,
    t: float,
    tau: float | None = None,
) -> PathSet:
    """Split <phi|U(t)|psi> into basis-path amplitudes, inserting the identity at ``tau``.

    ``tau`` defaults to ``t / 2`` and must lie between 0 and ``t``.
    """
    _check_dims(psi, phi, h)
    if tau is None:
        tau = 0.5 * t
    if not (np.isfinite(tau) and min(0.0, t) <= tau <= max(0.0, t)):
        raise ValidationError(f"insertion time {tau} outside [0, {t}]")
    forward = propagator(h, tau) @ psi.coeffs
    backward = propagator(h, t - tau).conj().T @ phi.coeffs
    return PathSet(backward.conj() * forward)


def relative_amplitudes(paths: PathSet, eps: float = EPS_AMPLITUDE) -> np.ndarray:
    """alpha_i = A_i / sum_j A_j; raises ForbiddenTransition when the total is at most ``eps``."""
    if abs(paths.total) <= eps:
        raise ForbiddenTransition(
            f"total amplitude |A| = {abs(paths.total):.3e} <= {eps:.1e}"
        )
    return paths.amplitudes / paths.total


def path_probabilities(paths: PathSet) -> np.ndarray:
    """omega_i = |A_i|^2 / sum_j |A_j|^2, the route frequencies of an accurate meter."""
    weights = np.abs(paths.amplitudes) ** 2
    s = weights.sum()
    if s == 0.0:
        raise NoOpenPath("all path amplitudes vanish")
    return weights / s


def _eigenvalues(obs: Observable, d: int) -> np.ndarray:
    if obs.d != d:
        raise ValidationError(f"observable has {obs.d} eigenvalues for {d} paths")
    return obs.eigenvalues


def strong_mean(paths: PathSet, obs: Observable) -> float:
    """Mean reading of an accurate meter, sum_i omega_i B_i.

    The result is clipped to the eigenvalue range of the open paths so that
    rounding can never push it outside that range.
    """
    b = _eigenvalues(obs, paths.d)
    omega = path_probabilities(paths)
    open_b = b[omega > 0]
    return float(np.clip(omega @ b, open_b.min(), open_b.max()))


def weak_value_of_paths(paths: PathSet, obs: Observable, eps: float = EPS_AMPLITUDE) -> complex:
    b = _eigenvalues(obs, paths.d)
    return complex(b @ relative_amplitudes(paths, eps))


def weak_value(
    psi: PureState,
    phi: PureState,
    h: HermitianOperator,
    t: float,
    obs: Observable,
    tau: float | None = None,
    eps: float = EPS_AMPLITUDE,
) -> complex:
    """Eigenvalue-weighted sum of relative path amplitudes.

    For ``h = 0`` this is <phi|B|psi> / <phi|psi>.
    """
    return weak_value_of_paths(path_amplitudes(psi, phi, h, t, tau), obs, eps)
