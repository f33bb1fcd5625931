"""Dense complex linear algebra used by the spectral routines.

The eigen- and singular-value kernels delegate to LAPACK through SciPy
(balancing, Hessenberg reduction and shifted QR in ``geev``); this module adds
what the analysis needs on top: unit left/right eigenvector pairs, per-pair
backward residuals, greedy eigenvalue matching, and an exactly rounded inner
product for the tiny biorthogonal overlaps of highly non-normal matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "LinalgError",
    "EigenDecomposition",
    "SingularValue",
    "DotResult",
    "as_matrix",
    "eig",
    "smallest_singular",
    "compensated_dot",
    "two_prod",
    "greedy_pairing",
]

EPS = np.finfo(float).eps


class LinalgError(ArithmeticError):
    pass


def as_matrix(A) -> np.ndarray:
    """Validate a square finite matrix and return it as complex128."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise LinalgError("matrix has non-finite entries")
    return A.astype(complex, copy=False)


@dataclass(frozen=True)
class EigenDecomposition:
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    backward_residuals: np.ndarray
    matrix_norm: float


def eig(A, tol: float | None = None) -> EigenDecomposition:
    """Eigenvalues with unit right and left eigenvectors.

    Left vectors w satisfy A^* w = conj(lambda) w.  ``backward_residuals[i]``
    is max(||A v - lambda v||, ||A^* w - conj(lambda) w||) / ||A||_F.  If
    ``tol`` is given, pairs whose residual exceeds it raise LinalgError.
    """
    A = as_matrix(A)
    try:
        w, vl, vr = sla.eig(A, left=True, right=True, check_finite=False)
    except np.linalg.LinAlgError as exc:  # QR failed to converge
        raise LinalgError(f"eigenvalue iteration did not converge: {exc}") from exc
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    nrm = float(np.linalg.norm(A)) or 1.0
    rr = np.linalg.norm(A @ vr - vr * w, axis=0)
    rl = np.linalg.norm(A.conj().T @ vl - vl * w.conj(), axis=0)
    res = np.maximum(rr, rl) / nrm
    if tol is not None and np.any(res > tol):
        raise LinalgError(f"backward residual {res.max():.3e} exceeds {tol:.3e}")
    return EigenDecomposition(w, vr, vl, res, nrm)


@dataclass(frozen=True)
class SingularValue:
    value: float
    singular: bool
    relative_residual: float


def smallest_singular(A) -> SingularValue:
    """Smallest singular value via the bidiagonal SVD.

    Exactly singular input (sigma_min at roundoff level of ||A||) returns 0
    with ``singular=True``.  The residual certificate is
    ||A v - sigma u|| / ||A|| for the computed singular triplet.
    """
    A = as_matrix(A)
    if A.size == 0:
        raise LinalgError("empty matrix")
    try:
        U, s, Vh = sla.svd(A, check_finite=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        U, s, Vh = sla.svd(A, check_finite=False, lapack_driver="gesvd")
    smin = float(s[-1])
    smax = float(s[0])
    resid = float(np.linalg.norm(A @ Vh[-1].conj() - smin * U[:, -1])) / max(smax, 1e-300)
    if smax == 0.0 or smin <= A.shape[0] * EPS * smax:
        return SingularValue(0.0, True, resid)
    return SingularValue(smin, False, resid)


# {{{ exact inner products

_SPLITTER = 134217729.0  # 2^27 + 1


def two_prod(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Error-free product a*b = p + e (Dekker, Veltkamp splitting)."""
    p = a * b
    ca = _SPLITTER * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLITTER * b
    bhi = cb - (cb - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


@dataclass(frozen=True)
class DotResult:
    value: complex
    error_bound: float


def _exact_real_dot(parts: list[np.ndarray]) -> float:
    return math.fsum(np.concatenate(parts).tolist())


def compensated_dot(x, y) -> DotResult:
    """<x, y> = sum conj(y_i) x_i with every product split exactly.

    Products are expanded into error-free pairs (two_prod) and the resulting
    terms summed with a correctly rounded summation, so the only error is the
    final rounding of each of the real and imaginary parts (barring
    underflow in the splitting).
    """
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if x.shape != y.shape:
        raise LinalgError("dot product of vectors with different lengths")
    xr, xi, yr, yi = x.real, x.imag, y.real, y.imag
    # conj(y) x = (yr xr + yi xi) + i (yr xi - yi xr)
    p1, e1 = two_prod(yr, xr)
    p2, e2 = two_prod(yi, xi)
    p3, e3 = two_prod(yr, xi)
    p4, e4 = two_prod(yi, xr)
    re = _exact_real_dot([p1, e1, p2, e2])
    im = _exact_real_dot([p3, e3, -p4, -e4])
    value = complex(re, im)
    scale = float(np.sum(np.abs(x) * np.abs(y)))
    bound = EPS * abs(value) + 2 * x.size * np.finfo(float).tiny + EPS**2 * scale
    return DotResult(value, bound)


# }}}


def greedy_pairing(a, b) -> list[tuple[int, int, float]]:
    """Match eigenvalues of two runs by repeatedly taking the closest pair.

    Returns (index in a, index in b, distance) for min(len(a), len(b)) pairs,
    ordered by index in a.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    D = np.abs(a[:, None] - b[None, :])
    pairs = []
    used_a = np.zeros(len(a), bool)
    used_b = np.zeros(len(b), bool)
    order = np.argsort(D, axis=None, kind="stable")
    for flat in order:
        i, j = divmod(int(flat), len(b))
        if used_a[i] or used_b[j]:
            continue
        used_a[i] = used_b[j] = True
        pairs.append((i, j, float(D[i, j])))
        if len(pairs) == min(len(a), len(b)):
            break
    return sorted(pairs)
