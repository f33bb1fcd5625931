"""Galerkin matrices in a dilated Hermite-function basis.

The basis functions are ``phi_k(x) = ell^{-1/2} psi_k(x / ell)`` with
``psi_k`` the normalized Hermite functions.  In this basis

* position is ``ell`` times the tridiagonal ladder matrix
  ``X[k, k+1] = X[k+1, k] = sqrt((k+1)/2)``;
* ``-d^2/dx^2`` is ``ell^{-2}`` times the pentadiagonal ladder matrix with
  diagonal ``(2k+1)/2`` and second off-diagonal ``-sqrt((k+1)(k+2))/2``.

Polynomial potentials are evaluated by Horner's rule on a padded position
matrix and then truncated, which gives the exact Galerkin matrix (truncating
first would corrupt the last ``deg/2`` rows).  Other potentials use
Gauss-Hermite quadrature, with nodes and the normalized basis values at the
nodes taken from the eigenvectors of the Jacobi matrix (Golub-Welsch), which
avoids the overflow of ``w_i exp(x_i^2)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from . import linalg
from .model import ModelError, OscillatorSpec, conjugation_weight, potential_eval, validate

__all__ = [
    "DiscretizationError",
    "BasisSpec",
    "ConvergenceReport",
    "position_matrix",
    "kinetic_matrix",
    "derivative_matrix",
    "hermite_quadrature",
    "hermite_functions",
    "multiplication_matrix",
    "assemble",
    "choose_scaling",
    "convergence_check",
]

ASSEMBLIES = ("Ladder", "Quadrature")


class DiscretizationError(ValueError):
    pass


@dataclass(frozen=True)
class BasisSpec:
    """Hermite basis of ``size`` functions dilated by ``scaling``.

    ``quad_extra`` sets the Gauss-Hermite order to ``2*size + quad_extra``
    for the quadrature assembly.
    """

    size: int
    scaling: float = 1.0
    assembly: str = "Ladder"
    quad_extra: int = 32

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 4:
            raise DiscretizationError("basis size must be an integer >= 4")
        if not self.scaling > 0:
            raise DiscretizationError("basis scaling must be positive")
        if self.assembly not in ASSEMBLIES:
            raise DiscretizationError(f"assembly must be one of {ASSEMBLIES}")

    @property
    def quad_order(self) -> int:
        return 2 * self.size + self.quad_extra

    def resized(self, size: int) -> BasisSpec:
        return BasisSpec(size, self.scaling, self.assembly, self.quad_extra)

    def to_dict(self) -> dict:
        return {"size": self.size, "scaling": self.scaling, "assembly": self.assembly, "quad_extra": self.quad_extra}


# {{{ ladder algebra


def position_matrix(n: int, ell: float = 1.0) -> np.ndarray:
    off = ell * np.sqrt(np.arange(1, n) / 2.0)
    return np.diag(off, 1) + np.diag(off, -1)


def kinetic_matrix(n: int, ell: float = 1.0) -> np.ndarray:
    """Exact Galerkin matrix of -d^2/dx^2."""
    k = np.arange(n, dtype=float)
    off = -np.sqrt((k[:-2] + 1) * (k[:-2] + 2)) / 2.0
    K = np.diag((2 * k + 1) / 2.0) + np.diag(off, 2) + np.diag(off, -2)
    return K / ell**2


def derivative_matrix(rows: int, cols: int, ell: float = 1.0) -> np.ndarray:
    """Galerkin matrix of d/dx with shape (rows, cols)."""
    D = np.zeros((rows, cols))
    for k in range(min(rows, cols)):
        if k + 1 < cols:
            D[k, k + 1] = np.sqrt((k + 1) / 2.0)
        if k + 1 < rows:
            D[k + 1, k] = -np.sqrt((k + 1) / 2.0)
    return D / ell


def _apply_position(off: np.ndarray, M: np.ndarray) -> np.ndarray:
    """X @ M for the tridiagonal position matrix with off-diagonal ``off``."""
    out = np.zeros_like(M)
    out[:-1] += off[:, None] * M[1:]
    out[1:] += off[:, None] * M[:-1]
    return out


def _polynomial_matrix(coeffs: np.ndarray, n: int, ell: float) -> np.ndarray:
    deg = len(coeffs) - 1
    m = n + deg
    off = ell * np.sqrt(np.arange(1, m) / 2.0)
    V = np.zeros((m, m), dtype=complex)
    eye = np.eye(m)
    for c in coeffs[::-1]:
        V = _apply_position(off, V) + c * eye
    return V[:n, :n]


# }}}

# {{{ quadrature


@functools.lru_cache(maxsize=8)
def hermite_quadrature(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes y_i and the matrix Q[k, i] = sqrt(w_i e^{y_i^2}) psi_k(y_i).

    Rows of Q are the basis functions sampled with the quadrature weights
    folded in, so that int f psi_j psi_k = sum_i Q[j, i] f(y_i) Q[k, i] exactly
    for polynomial f of degree <= 2 order - 1 - j - k.
    """
    off = np.sqrt(np.arange(1, order) / 2.0)
    # the dense divide-and-conquer solver keeps the vectors orthogonal to
    # roundoff at orders in the thousands
    y, V = eigh(np.diag(off, 1) + np.diag(off, -1), driver="evd")
    V = V * np.where(V[0] < 0, -1.0, 1.0)
    V.setflags(write=False)
    y.setflags(write=False)
    return y, V


def hermite_functions(x, n: int, ell: float = 1.0) -> np.ndarray:
    """Values phi_k(x) for k < n, shape (n, len(x)), by the normalized recurrence.

    The recurrence runs on rescaled values with a tracked exponent so that
    large |x| does not underflow before the growth of high-index functions.
    """
    y = np.atleast_1d(np.asarray(x, dtype=float)) / ell
    out = np.zeros((n, y.size))
    # psi_0 = pi^{-1/4} exp(-y^2/2); keep log-scale separately
    log_scale = -0.5 * y * y - 0.25 * np.log(np.pi)
    prev = np.zeros_like(y)
    cur = np.ones_like(y)
    for k in range(n):
        with np.errstate(divide="ignore"):
            out[k] = np.sign(cur) * np.exp(np.log(np.abs(cur)) + log_scale)
        nxt = np.sqrt(2.0 / (k + 1)) * y * cur - np.sqrt(k / (k + 1.0)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e100
        if np.any(big):
            s = np.where(big, 1e-100, 1.0)
            cur = cur * s
            prev = prev * s
            log_scale = log_scale - np.log(s)
    return out / np.sqrt(ell)


def multiplication_matrix(f, rows: int, cols: int, ell: float, order: int) -> np.ndarray:
    """Galerkin matrix of multiplication by f (a callable on real x)."""
    if order < max(rows, cols):
        raise DiscretizationError("quadrature order below basis size")
    y, Q = hermite_quadrature(order)
    vals = np.asarray(f(ell * y))
    return (Q[:rows] * vals) @ Q[:cols].T


# }}}


def _check_spec(spec: OscillatorSpec) -> None:
    v = validate(spec)
    if v:
        raise ModelError("; ".join(v), v)


@functools.lru_cache(maxsize=16)
def _assemble_cached(spec: OscillatorSpec, basis: BasisSpec) -> np.ndarray:
    n, ell = basis.size, basis.scaling
    coeffs = spec.potential_coefficients()
    if basis.assembly == "Ladder":
        if coeffs is None:
            raise DiscretizationError(f"Ladder assembly needs a polynomial potential ({spec.family})")
        A = kinetic_matrix(n, ell) + _polynomial_matrix(coeffs, n, ell)
    else:
        order = basis.quad_order
        if order < 2 * n:
            raise DiscretizationError(f"quadrature order {order} is below 2 N_b = {2 * n}")
        if spec.family == "Conjugated":
            vp = lambda x: conjugation_weight(spec, x, 1)
            vpp = lambda x: conjugation_weight(spec, x, 2)
            zeroth = lambda x: vpp(x) - vp(x) ** 2 + np.abs(x) ** spec.b + spec.shift
            first = multiplication_matrix(vp, n, n + 1, ell, order) @ derivative_matrix(n + 1, n, ell)
            A = kinetic_matrix(n, ell) + 2.0 * first + multiplication_matrix(zeroth, n, n, ell, order)
        else:
            A = kinetic_matrix(n, ell) + multiplication_matrix(lambda x: potential_eval(spec, x), n, n, ell, order)
    A = np.ascontiguousarray(A, dtype=complex)
    A.setflags(write=False)
    return A


def assemble(spec: OscillatorSpec, basis: BasisSpec) -> np.ndarray:
    """Dense Galerkin matrix of the operator (read-only; copy before editing)."""
    _check_spec(spec)
    return _assemble_cached(spec, basis)


def choose_scaling(spec: OscillatorSpec, basis_size: int, override: float | None = None) -> float:
    """Dilation balancing kinetic and potential magnitudes at the top index.

    With the leading potential degree m, N/ell^2 ~ (ell sqrt(N))^m gives
    ell = N^{(2-m)/(2(m+2))}, i.e. N^{(1-a)/(2(a+1))} for x^{2a}.
    """
    if override is not None:
        if not override > 0:
            raise DiscretizationError("scaling override must be positive")
        return float(override)
    _check_spec(spec)
    m = spec.leading_degree
    return float(basis_size) ** ((2.0 - m) / (2.0 * (m + 2.0)))


@dataclass(frozen=True)
class ConvergenceReport:
    values: np.ndarray
    reference: np.ndarray
    gaps: np.ndarray
    trusted: np.ndarray
    size: int
    reference_size: int

    @property
    def trusted_count(self) -> int:
        return int(np.sum(self.trusted))

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "reference_size": self.reference_size,
            "trusted_count": self.trusted_count,
            "modes": [
                {"re": float(v.real), "im": float(v.imag), "gap": float(g), "trusted": bool(t)}
                for v, g, t in zip(self.values, self.gaps, self.trusted)
            ],
        }


TRUST_TOL = 1e-8


def sort_by_modulus(values: np.ndarray) -> np.ndarray:
    """Indices ordering values by modulus, then argument."""
    values = np.asarray(values)
    mod = np.round(np.abs(values), 12)
    return np.lexsort((np.angle(values), mod))


@functools.lru_cache(maxsize=16)
def sorted_eigenvalues(spec: OscillatorSpec, basis: BasisSpec) -> np.ndarray:
    A = assemble(spec, basis)
    w = np.linalg.eigvals(A)
    w = w[sort_by_modulus(w)]
    w.setflags(write=False)
    return w


def convergence_check(spec: OscillatorSpec, basis: BasisSpec, m: int) -> ConvergenceReport:
    """Compare the first m eigenvalues at N_b with those at 2 N_b."""
    if m < 1 or m > basis.size // 4:
        raise DiscretizationError(f"count m={m} must lie in [1, N_b/4 = {basis.size // 4}]")
    a = sorted_eigenvalues(spec, basis)[:m]
    big = sorted_eigenvalues(spec, basis.resized(2 * basis.size))
    b = big[: min(len(big), 2 * m + 8)]
    pairs = linalg.greedy_pairing(a, b)
    ref = np.array([b[j] for _, j, _ in pairs])
    gaps = np.array([d for _, _, d in pairs])
    trusted = gaps <= TRUST_TOL * (1.0 + np.abs(a))
    return ConvergenceReport(np.array(a), ref, gaps, trusted, basis.size, 2 * basis.size)
