"""Gauge infinite products and partial-fraction expansions of their reciprocals.

The gauge function is the canonical product

    F(w) = prod_{k >= 1} (1 + w / a_k),    a_k = (k / nu) ** (1 / rho),

an entire function of order ``rho`` in (0, 1) with zeros at ``-a_k``.  For
``rho < 1/2`` the reciprocal has the absolutely convergent expansion
``1/F(w) = sum_n 1 / (F'(-a_n) (w + a_n))``; at ``rho = 1/2`` the expansion
becomes the alternating series ``1 + 2 sum_n (-1)^n w / (w + a_n)``.

Products are accumulated as (log-magnitude, unwrapped argument) pairs so that
values far beyond the double-precision range can still be compared.  Tails of
products and of logarithmic series are summed with Hurwitz zeta values, which
keeps the number of explicit factors small even for tight tolerances.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as hurwitz_zeta

__all__ = [
    "GaugeError",
    "TruncationError",
    "UnsupportedRegimeError",
    "PoleProximityError",
    "GaugeSpec",
    "ProductValue",
    "PfdReport",
    "zero",
    "eval_F",
    "integral_tail_bound",
    "log_asymptote",
    "a_product",
    "log_a_product",
    "a_product_raw",
    "f_prime_at_zero",
    "log_abs_f_prime",
    "pfd_coefficient",
    "pfd_eval",
    "pfd_half_eval",
    "cauchy_kernel_pfd",
    "power_pfd",
]

EPS = np.finfo(float).eps


class GaugeError(ValueError):
    """Base class for invalid gauge evaluations."""


class TruncationError(GaugeError):
    """The term cap was reached before the requested tolerance."""

    def __init__(self, message: str, bound: float, terms: int):
        super().__init__(f"{message} (achieved bound {bound:.3e} with {terms} terms)")
        self.bound = bound
        self.terms = terms


class UnsupportedRegimeError(GaugeError):
    """The requested expansion does not exist for this order."""


class PoleProximityError(GaugeError):
    """Evaluation point too close to a zero of F."""


@dataclass(frozen=True)
class GaugeSpec:
    """Parameters of the gauge product.

    ``tail_tolerance`` is the target relative error of products and series,
    ``max_terms`` caps the number of explicit factors or series terms.
    """

    nu: float
    rho: float
    tail_tolerance: float = 1e-15
    max_terms: int = 4_000_000

    def __post_init__(self):
        problems = []
        if not (math.isfinite(self.nu) and self.nu > 0):
            problems.append("nu must be positive")
        if not (0 < self.rho < 1):
            problems.append("rho must lie in (0, 1)")
        if not (0 < self.tail_tolerance < 1):
            problems.append("tail_tolerance must lie in (0, 1)")
        if int(self.max_terms) < 1:
            problems.append("max_terms must be at least 1")
        if problems:
            raise GaugeError("; ".join(problems))

    @property
    def b(self) -> float:
        """Zero exponent ``1/rho``."""
        return 1.0 / self.rho

    def zeros(self, n: int) -> np.ndarray:
        """The first ``n`` zero moduli a_1 ... a_n."""
        k = np.arange(1, n + 1, dtype=float)
        return (k / self.nu) ** self.b

    def is_half(self) -> bool:
        return abs(self.rho - 0.5) < 1e-14


def zero(g: GaugeSpec, k: int) -> float:
    """Return a_k = (k / nu) ** (1 / rho)."""
    if k < 1:
        raise GaugeError("zero index must be >= 1")
    return (k / g.nu) ** g.b


@dataclass(frozen=True)
class ProductValue:
    """A product stored as log-magnitude and unwrapped argument."""

    log_abs: float
    arg: float
    tail_bound: float
    terms: int

    @property
    def value(self) -> complex:
        if self.log_abs == -math.inf:
            return 0j
        return cmath.exp(complex(self.log_abs, self.arg))

    @property
    def is_zero(self) -> bool:
        return self.log_abs == -math.inf


def _log1p_complex(u: np.ndarray) -> np.ndarray:
    """Accurate principal log(1 + u) for small complex u."""
    re, im = u.real, u.imag
    return 0.5 * np.log1p(2.0 * re + re * re + im * im) + 1j * np.arctan2(im, 1.0 + re)


def integral_tail_bound(g: GaugeSpec, w: complex, K: int) -> float:
    """Bound on |sum_{k>K} log(1 + w/a_k)| by integral comparison.

    Valid when a_{K+1} >= 2|w|, where |log(1+u)| <= 2|u|.
    """
    b = g.b
    return 2.0 * abs(w) * g.nu**b * K ** (1.0 - b) / (b - 1.0)


def _scaled_zeta(s: float, q: float) -> float:
    """q^s zeta(s, q) = sum_{j>=0} (1 + j/q)^{-s}, without under- or overflow."""
    if s * math.log(q) < 600.0:
        return float(hurwitz_zeta(s, q)) * q**s
    if s < 0.01 * q:
        # Euler-Maclaurin; the next correction is below 1e-15 relative here
        return q / (s - 1.0) + 0.5 + s / (12.0 * q) - s * (s + 1.0) * (s + 2.0) / (720.0 * q**3)
    j = np.arange(0, 64 + int(40.0 * q / s))
    return math.fsum(np.exp(-s * np.log1p(j / q)).tolist())


def _zeta_log_tail(c: complex, expo: float, K: int, ratio: float, tol: float, max_m: int = 400):
    """sum_{k>K} log(1 + c k^{-expo}) via its power series in c.

    ``ratio`` is |c| (K+1)^{-expo}, which must be < 1.  Returns the tail and
    a bound on the neglected part of the series.  Powers of c are carried
    scaled by (K+1)^{-expo} so that large |c| cannot overflow.
    """
    q = K + 1.0
    x = c / q**expo
    total = 0j
    xm = 1.0 + 0j
    bound = math.inf
    for m in range(1, max_m + 1):
        xm *= x
        total += (-1) ** (m + 1) * xm * _scaled_zeta(m * expo, q) / m
        bound = abs(xm * x) * _scaled_zeta((m + 1) * expo, q) / ((m + 1) * (1.0 - ratio))
        if bound <= tol:
            break
    return total, bound


def eval_F(g: GaugeSpec, w: complex, method: str = "zeta") -> ProductValue:
    """Evaluate F(w) in log space.

    ``method="truncate"`` keeps factors until the integral-comparison bound on
    the neglected log-tail is below ``tail_tolerance``.  ``method="zeta"``
    (default) keeps only the factors with a_k < 2|w| and sums the rest of the
    log-series in closed form through Hurwitz zeta values; the reported bound
    is then the remainder of that series.
    """
    w = complex(w)
    if not cmath.isfinite(w):
        raise GaugeError("w must be finite")
    if w == 0:
        return ProductValue(0.0, 0.0, 0.0, 0)
    b, tol = g.b, g.tail_tolerance
    r = abs(w)
    # smallest K with a_{K+1} >= 2|w|
    K = max(int(math.ceil(g.nu * (2.0 * r) ** g.rho)) - 1, 8)
    if method == "truncate":
        K_tol = int(math.ceil((2.0 * r * g.nu**b / ((b - 1.0) * tol)) ** (1.0 / (b - 1.0))))
        K = max(K, K_tol)
        if K > g.max_terms:
            raise TruncationError("product truncation", integral_tail_bound(g, w, g.max_terms), g.max_terms)
    elif method != "zeta":
        raise GaugeError(f"unknown method {method!r}")
    if K > g.max_terms:
        raise TruncationError("product head", math.inf, g.max_terms)

    a = g.zeros(K)
    u = w / a
    if np.any(u == -1.0):
        return ProductValue(-math.inf, 0.0, 0.0, K)
    with np.errstate(divide="ignore"):
        logs = _log1p_complex(u)
    if np.any(np.isneginf(logs.real)):
        return ProductValue(-math.inf, 0.0, 0.0, K)
    log_abs = math.fsum(logs.real)
    arg = math.fsum(logs.imag)
    if method == "truncate":
        return ProductValue(log_abs, arg, integral_tail_bound(g, w, K), K)

    ratio = r / zero(g, K + 1)
    tail, bound = _zeta_log_tail(w * g.nu**b, b, K, ratio, tol)
    return ProductValue(log_abs + tail.real, arg + tail.imag, bound, K)


def log_asymptote(g: GaugeSpec, r: float, theta: float) -> float:
    """Leading term pi nu r^rho cos(theta rho) / sin(pi rho) of log|F(r e^{i theta})|."""
    if r <= 0:
        raise GaugeError("r must be positive")
    if not abs(theta) < math.pi:
        raise GaugeError("theta must lie strictly inside (-pi, pi)")
    rho = g.rho
    return math.pi * g.nu * r**rho * math.cos(theta * rho) / math.sin(math.pi * rho)


# {{{ A(n; b)


def _log_r(k: np.ndarray, n: int, b: float) -> np.ndarray:
    # log of r(k/n) = (1 - v^{b/2}) / (1 - v), v = (n/k)^2, via expm1 near k = n
    L = np.log(k / n)
    return np.log(np.abs(np.expm1(-b * L))) - np.log(np.abs(np.expm1(-2.0 * L)))


def _series_tail(n: int, expo: float, K: int, tol: float, max_m: int = 400):
    """sum_{k>K} -log(1 - (n/k)^expo) = sum_m n^{m expo} zeta(m expo, K+1) / m."""
    q = K + 1.0
    x = (n / q) ** expo
    total = 0.0
    bound = math.inf
    for m in range(1, max_m + 1):
        total += x**m * _scaled_zeta(m * expo, q) / m
        bound = x ** (m + 1) * _scaled_zeta((m + 1) * expo, q) / ((m + 1) * (1.0 - x))
        if bound <= tol:
            break
    return total, bound


def log_a_product(n: int, b: float, tolerance: float = 1e-15, max_terms: int = 4_000_000) -> float:
    """log A(n; b) through the paired factors r(k/n).

    A(n; b) = (1/2) prod_{k != n} r(k/n) with r(t) = (1 - t^{-b}) / (1 - t^{-2});
    the factors beyond K = 2n + 16 are summed as log-series in n/k.
    """
    n = int(n)
    if n < 1:
        raise GaugeError("n must be >= 1")
    if not b > 1:
        raise GaugeError("b must exceed 1")
    K = 2 * n + 16
    if K > max_terms:
        raise TruncationError("A(n;b) head", math.inf, max_terms)
    k = np.arange(1, K + 1, dtype=float)
    k = k[k != n]
    head = math.fsum(_log_r(k, n, b))
    # log r = -log(1 - v) + log(1 - v^{b/2}) with v = (n/k)^2
    t2, e2 = _series_tail(n, 2.0, K, tolerance)
    tb, eb = _series_tail(n, b, K, tolerance)
    return math.log(0.5) + head + t2 - tb


def a_product(n: int, b: float, tolerance: float = 1e-15, max_terms: int = 4_000_000) -> float:
    """A(n; b) = (-1)^{n-1} prod_{k != n} (1 - n^b / k^b); always positive."""
    return math.exp(log_a_product(n, b, tolerance, max_terms))


def a_product_raw(n: int, b: float, tolerance: float = 1e-15) -> float:
    """A(n; b) from the unpaired factors, for cross-checking the paired form."""
    n = int(n)
    if not b > 1:
        raise GaugeError("b must exceed 1")
    K = 2 * n + 16
    k = np.arange(1, K + 1, dtype=float)
    k = k[k != n]
    head = math.fsum(np.log(np.abs(np.expm1(b * np.log(n / k)))))
    tail, _ = _series_tail(n, b, K, tolerance)
    return math.exp(head - tail)


# }}}

# {{{ derivative at the zeros


def log_abs_f_prime(g: GaugeSpec, n: int) -> float:
    """log |F'(-a_n)| = b log nu - b log n + log A(n; b)."""
    b = g.b
    return b * math.log(g.nu) - b * math.log(n) + log_a_product(n, b, g.tail_tolerance, g.max_terms)


def f_prime_at_zero(g: GaugeSpec, n: int) -> float:
    """F'(-a_n) = (1/a_n) prod_{k != n} (1 - a_n/a_k) = (-1)^{n-1} nu^b A(n;b) / n^b."""
    if n < 1:
        raise GaugeError("n must be >= 1")
    sign = 1.0 if n % 2 == 1 else -1.0
    return sign * math.exp(log_abs_f_prime(g, n))


def pfd_coefficient(g: GaugeSpec, n: int) -> float:
    """1 / F'(-a_n), computed without forming the possibly huge derivative."""
    sign = 1.0 if n % 2 == 1 else -1.0
    return sign * math.exp(-log_abs_f_prime(g, n))


# }}}

# {{{ partial fractions


@dataclass(frozen=True)
class PfdReport:
    value_direct: complex
    value_series: complex
    residual: float
    terms_used: int
    value_unpaired: complex | None = None

    @property
    def residual_unpaired(self) -> float | None:
        if self.value_unpaired is None:
            return None
        return abs(self.value_direct - self.value_unpaired)


def _check_poles(g: GaugeSpec, *points: complex) -> None:
    for w in points:
        w = complex(w)
        if w.real >= 0:
            continue
        # nearest zero to -w along the negative axis
        k = max(1, int(round(g.nu * (-w.real) ** g.rho)))
        for kk in (k - 1, k, k + 1):
            if kk < 1:
                continue
            a = zero(g, kk)
            if abs(w + a) < 1e-6 * max(1.0, a):
                raise PoleProximityError(f"w={w} lies within the exclusion radius of -a_{kk}")


def _reciprocal_F(g: GaugeSpec, w: complex) -> complex:
    pv = eval_F(g, w)
    if pv.is_zero:
        raise PoleProximityError(f"F vanishes at w={w}")
    return cmath.exp(-complex(pv.log_abs, pv.arg))


def _coefficients(g: GaugeSpec, terms: int | None, scale: float = 1.0):
    """Coefficients 1/F'(-a_n) and zeros, adaptively when ``terms`` is None."""
    if terms is not None:
        if terms > g.max_terms:
            raise TruncationError("series", math.inf, g.max_terms)
        n = np.arange(1, terms + 1)
        return np.array([pfd_coefficient(g, int(k)) for k in n]), g.zeros(terms)
    coeffs = []
    n = 0
    small = 0
    while True:
        n += 1
        if n > g.max_terms:
            raise TruncationError("series", abs(coeffs[-1]), g.max_terms)
        c = pfd_coefficient(g, n)
        coeffs.append(c)
        # term size relative to the expected O(1) scale of the sum
        if abs(c) / max(zero(g, n), 1.0) * scale < g.tail_tolerance * 1e-2:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return np.array(coeffs), g.zeros(len(coeffs))


def pfd_eval(g: GaugeSpec, w: complex, terms: int | None = None) -> PfdReport:
    """Compare 1/F(w) with sum_{n <= terms} 1 / (F'(-a_n)(w + a_n)), rho < 1/2."""
    if g.rho >= 0.5:
        raise UnsupportedRegimeError("the absolutely convergent expansion needs rho < 1/2")
    w = complex(w)
    _check_poles(g, w)
    c, a = _coefficients(g, terms)
    series = complex(np.sum(c / (w + a)))
    direct = _reciprocal_F(g, w)
    return PfdReport(direct, series, abs(direct - series), len(c))


def _half_terms(g: GaugeSpec, w: complex, tol: float) -> int:
    # paired terms decay like |w| nu^2 / (4 m^3); the zeta tail handles the rest,
    # so only enough pairs for a_{2M+1} > 2|w| and a healthy margin are needed
    M = int(math.ceil(g.nu * math.sqrt(2.0 * abs(w)))) + 32
    return 2 * M


def _half_tail(g: GaugeSpec, w: complex, M: int, tol: float) -> complex:
    """sum over pairs m > M of [t(a_{2m}) - t(a_{2m-1})], t(a) = w / (w + a).

    With a_n = (n/nu)^2, t(a) = sum_j (-1)^{j+1} (w/a)^j and the pair sums
    become Hurwitz zeta differences.
    """
    c = w * g.nu**2 / 4.0
    ratio = abs(w) / zero(g, 2 * M + 1)
    lo, hi = M + 0.5, M + 1.0
    x = c / lo**2
    shrink = (lo / hi) ** 2
    total = 0j
    xj = 1.0 + 0j
    for j in range(1, 400):
        xj *= x
        diff = shrink**j * _scaled_zeta(2 * j, hi) - _scaled_zeta(2 * j, lo)
        total += (-1) ** (j + 1) * xj * diff
        if abs(xj * x) * _scaled_zeta(2 * j + 2, lo) / (1.0 - ratio) < tol:
            break
    return total


def pfd_half_eval(g: GaugeSpec, w: complex, terms: int | None = None, tail: bool = True) -> PfdReport:
    """Alternating expansion 1/F(w) = 1 + 2 sum_n (-1)^n w/(w + a_n) at rho = 1/2.

    Terms are combined in adjacent pairs before summation; with ``tail`` the
    remaining pairs are added in closed form.  The report also carries the
    plain (unpaired, untailed) partial sum with the same number of terms.
    """
    if not g.is_half():
        raise UnsupportedRegimeError("pfd_half_eval requires rho = 1/2")
    w = complex(w)
    _check_poles(g, w)
    if terms is None:
        terms = _half_terms(g, w, g.tail_tolerance)
    if terms > g.max_terms:
        raise TruncationError("alternating series", math.inf, g.max_terms)
    M = terms // 2
    a = g.zeros(2 * M)
    t = w / (w + a)
    # t(a_{2m}) - t(a_{2m-1}) = w (a_{2m-1} - a_{2m}) / ((w + a_{2m}) (w + a_{2m-1})), and
    # a_{2m-1} - a_{2m} = -(4m - 1)/nu^2 exactly, so the pair carries no cancellation
    m = np.arange(1, M + 1, dtype=float)
    pairs = -w * (4.0 * m - 1.0) / g.nu**2 / ((w + a[1::2]) * (w + a[0::2]))
    series = 1.0 + 2.0 * complex(math.fsum(pairs.real), math.fsum(pairs.imag))
    if tail and M > 0:
        series += 2.0 * _half_tail(g, w, M, g.tail_tolerance)
    signs = np.where(np.arange(1, 2 * M + 1) % 2 == 0, 1.0, -1.0)
    plain = np.cumsum(signs * t)
    unpaired = 1.0 + 2.0 * complex(plain[-1]) if M > 0 else 1.0 + 0j
    direct = _reciprocal_F(g, w)
    return PfdReport(direct, series, abs(direct - series), 2 * M, unpaired)


def _alternating_sum(terms: np.ndarray) -> complex:
    """Sum an alternating series with smooth magnitudes by averaging the
    last two partial sums, which cancels the leading oscillating error."""
    s = np.cumsum(terms)
    return complex(0.5 * (s[-1] + s[-2]))


def _half_kernel_count(g: GaugeSpec, *points: complex) -> int:
    r = max(abs(complex(p)) for p in points)
    return max(200_000, int(math.ceil(20 * g.nu * math.sqrt(r))))


def power_pfd(g: GaugeSpec, z: complex, w: complex, p: int = 1, terms: int | None = None) -> float:
    """Residual of 1/((z-w) F(w^p)) = 1/(F(z^p)(z-w)) + sum_n S_p / ((z^p + a_n) F'(-a_n) (w^p + a_n)).

    S_p = sum_{k<p} w^k z^{p-1-k}.  At rho = 1/2 the series becomes
    2 sum_n (-1)^{n+1} a_n S_p / ((z^p + a_n)(w^p + a_n)).
    """
    z, w = complex(z), complex(w)
    if p < 1:
        raise GaugeError("p must be a positive integer")
    if z == w:
        raise GaugeError("the kernel is singular at z = w")
    zp, wp = z**p, w**p
    _check_poles(g, zp, wp)
    sp = sum(w**k * z ** (p - 1 - k) for k in range(p))
    lhs = _reciprocal_F(g, wp) / (z - w)
    head = _reciprocal_F(g, zp) / (z - w)
    if g.rho < 0.5:
        scale = max(1.0, abs(sp)) / min(1.0, abs(zp + 1.0) * abs(wp + 1.0))
        c, a = _coefficients(g, terms, scale)
        series = complex(np.sum(sp * c / ((zp + a) * (wp + a))))
    elif g.is_half():
        count = terms if terms is not None else _half_kernel_count(g, zp, wp)
        a = g.zeros(count)
        signs = np.where(np.arange(1, count + 1) % 2 == 1, 1.0, -1.0)
        series = 2.0 * sp * _alternating_sum(signs * a / ((zp + a) * (wp + a)))
    else:
        raise UnsupportedRegimeError("partial fractions need rho <= 1/2")
    return abs(lhs - head - series)


def cauchy_kernel_pfd(g: GaugeSpec, z: complex, w: complex, terms: int | None = None) -> float:
    """Residual of the kernel expansion of 1/((z-w) F(w)); the p = 1 case of power_pfd."""
    return power_pfd(g, z, w, 1, terms)


# }}}
