"""Biorthogonal spectra, projection norms, resolvents and operator identities.

For a simple eigenvalue with unit right vector f and unit left vector g
(A^* g = conj(lambda) g) the Riesz projection is the rank-one operator
f <., g> / <f, g>, whose norm is 1/|<f, g>|.  Overlaps are accumulated with
the exactly rounded dot product from :mod:`anharmonic.linalg`.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import gauge, linalg
from .discretize import BasisSpec, assemble, convergence_check, sort_by_modulus
from .model import OscillatorSpec

__all__ = [
    "SpectrumError",
    "Mode",
    "Spectrum",
    "ResolventSample",
    "PseudospectraGrid",
    "GrowthFit",
    "compute_spectrum",
    "spectrum_of_matrix",
    "projection_norms",
    "resolvent_norm",
    "resolvent_norm_matrix",
    "pseudospectra_grid",
    "bz_identity_check",
    "davies_identity_check",
    "fit_growth",
    "ray_angle_check",
]

EPS = np.finfo(float).eps
DEGENERACY_TOL = 1e-6
PRECISION_FACTOR = 1e3


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class Mode:
    index: int
    value: complex
    right: np.ndarray
    left: np.ndarray
    overlap: complex
    projection_norm: float
    trusted: bool
    precision_limited: bool


@dataclass(frozen=True)
class Spectrum:
    """The first modes of a matrix, ordered by modulus then argument.

    ``trusted`` combines the basis-doubling check (when available), the
    near-degeneracy test and the backward residual.  ``excluded`` lists the
    indices of untrusted leading modes, which play the role of the finite
    block that the asymptotic statements ignore.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    overlaps: np.ndarray
    trusted: np.ndarray
    precision_limited: np.ndarray
    backward_residuals: np.ndarray
    matrix_size: int

    @property
    def projection_norms(self) -> np.ndarray:
        return 1.0 / np.abs(self.overlaps)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def modes(self) -> list[Mode]:
        pn = self.projection_norms
        return [
            Mode(i + 1, complex(self.values[i]), self.right[:, i], self.left[:, i], complex(self.overlaps[i]),
                 float(pn[i]), bool(self.trusted[i]), bool(self.precision_limited[i]))
            for i in range(len(self))
        ]

    @property
    def excluded(self) -> list[int]:
        first = np.flatnonzero(self.trusted)
        lead = first[0] if first.size else len(self)
        return list(range(1, lead + 1))


def _near_degenerate(values: np.ndarray, all_values: np.ndarray) -> np.ndarray:
    D = np.abs(values[:, None] - all_values[None, :])
    close = D < DEGENERACY_TOL * (1.0 + np.abs(values))[:, None]
    return close.sum(axis=1) > 1


def _build(A: np.ndarray, m: int | None, converged: np.ndarray | None) -> Spectrum:
    ed = linalg.eig(A)
    order = sort_by_modulus(ed.values)
    m = len(order) if m is None else min(m, len(order))
    idx = order[:m]
    values = ed.values[idx]
    right = ed.right[:, idx]
    left = ed.left[:, idx]
    overlaps = np.array([linalg.compensated_dot(right[:, i], left[:, i]).value for i in range(m)])
    n = A.shape[0]
    precision_limited = np.abs(overlaps) < PRECISION_FACTOR * n * EPS
    res = ed.backward_residuals[idx]
    trusted = ~_near_degenerate(values, ed.values) & (res <= 1e3 * n * EPS) & (np.abs(overlaps) > 0)
    if converged is not None:
        ok = np.zeros(m, bool)
        ok[: len(converged)] = converged[:m]
        trusted &= ok
    return Spectrum(values, right, left, overlaps, trusted, precision_limited, res, n)


def spectrum_of_matrix(A, m: int | None = None) -> Spectrum:
    """Spectrum of an explicit matrix (no basis-doubling check)."""
    return _build(linalg.as_matrix(A), m, None)


def compute_spectrum(spec: OscillatorSpec, basis: BasisSpec, m: int | None = None, check: bool = True) -> Spectrum:
    """First m modes of the discretized operator.

    With ``check`` the eigenvalues are compared against a basis of twice the
    size; modes beyond N_b/4 cannot be checked and are left untrusted.
    """
    A = assemble(spec, basis)
    m = basis.size if m is None else m
    converged = None
    if check:
        count = min(m, basis.size // 4)
        converged = convergence_check(spec, basis, count).trusted
    return _build(A, m, converged)


def projection_norms(s: Spectrum, include_untrusted: bool = False) -> list[tuple[int, float]]:
    """(n, ||P_n||) pairs; by default only trusted modes are returned."""
    pn = s.projection_norms
    return [(i + 1, float(pn[i])) for i in range(len(s)) if include_untrusted or s.trusted[i]]


# {{{ resolvents


@dataclass(frozen=True)
class ResolventSample:
    z: complex
    norm: float
    dist_to_spectrum: float


def resolvent_norm_matrix(A, z: complex, eigenvalues=None) -> ResolventSample:
    A = linalg.as_matrix(A)
    if eigenvalues is None:
        eigenvalues = np.linalg.eigvals(A)
    n = A.shape[0]
    sv = linalg.smallest_singular(complex(z) * np.eye(n) - A)
    norm = math.inf if sv.singular else 1.0 / sv.value
    dist = float(np.min(np.abs(np.asarray(eigenvalues) - z))) if len(eigenvalues) else math.inf
    return ResolventSample(complex(z), norm, dist)


def resolvent_norm(spec: OscillatorSpec, basis: BasisSpec, z: complex) -> ResolventSample:
    """1/sigma_min(z - A) and the distance from z to the matrix spectrum."""
    from .discretize import sorted_eigenvalues

    return resolvent_norm_matrix(assemble(spec, basis), z, sorted_eigenvalues(spec, basis))


@dataclass(frozen=True)
class PseudospectraGrid:
    re: np.ndarray
    im: np.ndarray
    samples: list[ResolventSample]

    @property
    def norms(self) -> np.ndarray:
        return np.array([s.norm for s in self.samples]).reshape(len(self.im), len(self.re))


def pseudospectra_grid(spec_or_matrix, basis: BasisSpec | None, rect, nx: int, ny: int,
                       threads: int | None = None) -> PseudospectraGrid:
    """Resolvent norms on an ny-by-nx grid over rect = (re_min, re_max, im_min, im_max).

    Samples are stored row-major (imaginary part outer).  The matrix is
    reduced to Schur form once; every sample is an SVD of a shifted
    triangular matrix.
    """
    if nx < 2 or ny < 2:
        raise SpectrumError("grid needs nx, ny >= 2")
    if isinstance(spec_or_matrix, OscillatorSpec):
        A = assemble(spec_or_matrix, basis)
    else:
        A = linalg.as_matrix(spec_or_matrix)
    T, _ = sla.schur(A, output="complex")
    ev = np.diag(T).copy()
    x0, x1, y0, y1 = rect
    re = np.linspace(x0, x1, nx)
    im = np.linspace(y0, y1, ny)
    zs = [complex(x, y) for y in im for x in re]
    work = lambda z: resolvent_norm_matrix(T, z, ev)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(work, zs))
    else:
        samples = [work(z) for z in zs]
    return PseudospectraGrid(re, im, samples)


# }}}

# {{{ operator partial fractions


def _diagonalize(A: np.ndarray):
    ed = linalg.eig(A)
    V = ed.right
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e12:
        raise SpectrumError(f"matrix is numerically not diagonalizable (eigenvector condition {cond:.2e})")
    return ed.values, V


def bz_identity_check(A, g: gauge.GaugeSpec, z: complex, terms: int | None = None) -> float:
    """||B_z(A) - (1/F(z))(z - A)^{-1} - sum_n (a_n + A)^{-1} / ((z + a_n) F'(-a_n))||_2.

    B_z(A) = sum_j P_j / ((z - lambda_j) F(lambda_j)) is built from the
    eigendecomposition with every mode retained.
    """
    A = linalg.as_matrix(A)
    if g.rho >= 0.5:
        raise gauge.UnsupportedRegimeError("operator expansion implemented for rho < 1/2")
    lam, V = _diagonalize(A)
    if np.any(lam.real <= 0):
        raise SpectrumError("eigenvalues must lie in the open right half-plane")
    z = complex(z)
    n = A.shape[0]
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    if np.min(np.abs(lam - z)) < 1e-10 * scale:
        raise SpectrumError("z lies on the spectrum")
    gauge._check_poles(g, z)
    invF = np.array([gauge._reciprocal_F(g, complex(l)) for l in lam])
    lhs = (V * (invF / (z - lam))) @ np.linalg.inv(V)
    eye = np.eye(n)
    rhs = gauge._reciprocal_F(g, z) * np.linalg.solve(z * eye - A, eye)
    lhs_norm = max(np.linalg.norm(lhs, 2), 1e-300)
    k = 0
    small = 0
    while True:
        k += 1
        if terms is not None and k > terms:
            break
        if k > g.max_terms:
            raise gauge.TruncationError("operator series", math.inf, g.max_terms)
        a = gauge.zero(g, k)
        coef = gauge.pfd_coefficient(g, k) / (z + a)
        term = coef * np.linalg.solve(a * eye + A, eye)
        rhs = rhs + term
        if terms is None:
            if np.linalg.norm(term, 2) < 1e-3 * EPS * lhs_norm:
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
    return float(np.linalg.norm(lhs - rhs, 2))


def davies_identity_check(A, z: complex, m: int) -> float:
    """Spectral-norm residual of the finite identity with Phi(w) = prod_{k<=m} (w + k):

    (z-A)^{-1} prod_k (k+A)^{-1} = (z-A)^{-1} / Phi(z) + sum_k c_k (k+A)^{-1} / (z+k),
    with c_k = 1/Phi'(-k).
    """
    A = linalg.as_matrix(A)
    if m < 1:
        raise SpectrumError("m must be a positive integer")
    z = complex(z)
    n = A.shape[0]
    eye = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(A, 2)))
    for k in range(1, m + 1):
        if abs(z + k) < 1e-12 * scale:
            raise SpectrumError(f"pole collision: z = -{k}")
    lam = np.linalg.eigvals(A)
    if np.min(np.abs(lam - z)) < 1e-12 * scale:
        raise SpectrumError("pole collision: z lies on the spectrum")
    for k in range(1, m + 1):
        if np.min(np.abs(lam + k)) < 1e-12 * scale:
            raise SpectrumError(f"pole collision: -{k} is an eigenvalue")
    R = np.linalg.solve(z * eye - A, eye)
    lhs = R.copy()
    for k in range(1, m + 1):
        lhs = lhs @ np.linalg.solve(k * eye + A, eye)
    phi_z = np.prod([z + k for k in range(1, m + 1)])
    rhs = R / phi_z
    for k in range(1, m + 1):
        dphi = np.prod([float(j - k) for j in range(1, m + 1) if j != k])
        rhs = rhs + np.linalg.solve(k * eye + A, eye) / (dphi * (z + k))
    return float(np.linalg.norm(lhs - rhs, 2))


# }}}

# {{{ fits


@dataclass(frozen=True)
class GrowthFit:
    gamma_hat: float
    intercept: float
    r_squared: float
    sigma: float


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    if np.ptp(x) == 0:
        raise SpectrumError("degenerate design: all abscissae equal")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_growth(norms, sigma: float | None = 1.0) -> GrowthFit:
    """Fit log(value) = gamma n^sigma + c by least squares.

    With ``sigma=None`` the exponent is estimated first by regressing
    log log(value) on log n (values must exceed 1), and gamma is then refit
    at that exponent.
    """
    pts = [(float(n), float(v)) for n, v in norms]
    if len(pts) < 5:
        raise SpectrumError("growth fits need at least 5 points")
    n = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0):
        raise SpectrumError("growth fits need positive values")
    if np.ptp(n) == 0:
        raise SpectrumError("degenerate design: all n equal")
    if sigma is None:
        if np.any(v <= 1):
            raise SpectrumError("exponent estimation needs values above 1")
        sigma, _, _ = _linear_fit(np.log(n), np.log(np.log(v)))
    gamma, intercept, r2 = _linear_fit(n**sigma, np.log(v))
    return GrowthFit(gamma, intercept, r2, float(sigma))


def ray_angle_check(s: Spectrum, b: float, n_max: int | None = None) -> float:
    """max |arg lambda_n - pi/(b+2)| over trusted modes with n <= n_max."""
    k = len(s) if n_max is None else min(n_max, len(s))
    mask = s.trusted[:k]
    if not np.any(mask):
        raise SpectrumError("no trusted modes to check")
    return float(np.max(np.abs(np.angle(s.values[:k][mask]) - math.pi / (b + 2))))


# }}}
