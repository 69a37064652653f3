"""Post-selections that realize an arbitrary complex weak value on two paths.

With ``H = 0``, initial coefficients ``a_i`` and final coefficients ``b_i``, the
weak value of ``B = diag(B_1, B_2)`` is ``sum B_i eta_i / sum eta_i`` with
``eta_i = conj(b_i) a_i``.  Choosing

    eta_1 = Z - B_2,    eta_2 = B_1 - Z

makes it equal ``Z`` while the denominator stays ``B_1 - B_2 != 0``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .core import HermitianOperator, Observable, PureState, weak_value
from .errors import ForbiddenTransition, ValidationError

__all__ = [
    "TargetProblem",
    "solve_postselection",
    "postselection_from_eta",
    "verify_target",
    "near_orthogonal_amplification",
]


@dataclass(frozen=True, eq=False)
class TargetProblem:
    initial_coeffs: np.ndarray
    eigenvalues: np.ndarray
    target: complex

    def __post_init__(self):
        a = np.array(self.initial_coeffs, dtype=complex).reshape(-1)
        b = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if a.size != 2 or b.size != 2:
            raise ValidationError("target problems are defined for exactly two paths")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and cmath.isfinite(self.target)):
            raise ValidationError("target problem entries must be finite")
        if np.any(a == 0):
            raise ValidationError("initial coefficients must all be nonzero")
        if b[0] == b[1]:
            raise ValidationError("eigenvalues must differ")
        object.__setattr__(self, "initial_coeffs", a)
        object.__setattr__(self, "eigenvalues", b)
        object.__setattr__(self, "target", complex(self.target))

    @property
    def psi(self) -> PureState:
        return PureState(self.initial_coeffs)

    @property
    def observable(self) -> Observable:
        return Observable(self.eigenvalues)


def _fix_phase(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c)
    first = c[nz[0]]
    out = c * (abs(first) / first)
    out[nz[0]] = abs(first)
    return out


def postselection_from_eta(initial_coeffs, eta) -> PureState:
    """Final state with conj(b_i) a_i proportional to eta_i; first nonzero entry real positive."""
    a = np.asarray(initial_coeffs, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    if not np.any(eta):
        raise ValidationError("eta must not vanish identically")
    b = np.conj(eta / a)
    b = b / np.linalg.norm(b)
    return PureState(_fix_phase(b))


def solve_postselection(problem: TargetProblem) -> PureState:
    """Post-selected state whose weak value for the problem's observable is its target.

    A target equal to one eigenvalue closes the other path (its eta is zero).
    """
    b1, b2 = problem.eigenvalues
    z = problem.target
    return postselection_from_eta(problem.initial_coeffs, [z - b2, b1 - z])


def verify_target(psi: PureState, phi: PureState, obs: Observable, target: complex) -> float:
    """|weak value at H = 0 minus target|."""
    h = HermitianOperator.zero(psi.d)
    try:
        wv = weak_value(psi, phi, h, 0.0, obs)
    except ForbiddenTransition as exc:
        overlap = abs(np.vdot(phi.coeffs, psi.coeffs))
        raise ForbiddenTransition(f"{exc}; achieved |<phi|psi>| = {overlap:.3e}") from exc
    return abs(wv - complex(target))


def near_orthogonal_amplification(
    psi: PureState, obs: Observable, epsilon: float
) -> tuple[PureState, complex]:
    """Post-selection with eta = (1, -1 + epsilon) and its predicted weak value.

    The overlap <phi|psi> shrinks like epsilon while the weak value
    (B_1 - B_2 + epsilon B_2) / epsilon grows like 1 / epsilon.
    """
    if psi.d != 2 or obs.d != 2:
        raise ValidationError("amplification construction needs two paths")
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError(f"epsilon must lie in (0, 1], got {epsilon}")
    if np.any(psi.coeffs == 0):
        raise ValidationError("initial coefficients must all be nonzero")
    b1, b2 = obs.eigenvalues
    phi = postselection_from_eta(psi.coeffs, [1.0, -1.0 + epsilon])
    return phi, complex((b1 - b2 + epsilon * b2) / epsilon)
