"""Operator families, their validity constraints and closed-form asymptotics.

Five families of Schroedinger operators ``-d^2/dx^2 + V`` on the real line:

``PolynomialL``
    V = x^{2a} + V1 with a polynomial perturbation V1 whose real part has
    degree at most 2a - 1 and whose imaginary part has degree b with
    a - 1 < b < 2a and a positive leading coefficient c_b.
``EvenImaginary``
    V = i |x|^b.
``OddImaginary``
    V = i x^{2b+1}.
``Conjugated``
    (-i d/dx + i v')^2 + |x|^b with v(x) = x^{(2+b)s/2} / 2 for x > 1,
    similar to the self-adjoint operator -d^2 + |x|^b.
``SelfAdjointPower``
    V = |x|^l.

Polynomial coefficients are stored dense, lowest degree first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

__all__ = [
    "FAMILIES",
    "ModelError",
    "OscillatorSpec",
    "AsymptoticConstants",
    "ProjectionModel",
    "validate",
    "constants",
    "predicted_eigenvalue",
    "exact_shifted_ho",
    "predicted_projection_norm",
    "potential_eval",
    "conjugation_weight",
    "turning_points",
    "admissible_region",
    "shifted_oscillator",
]

FAMILIES = ("PolynomialL", "EvenImaginary", "OddImaginary", "Conjugated", "SelfAdjointPower")


class ModelError(ValueError):
    """Invalid oscillator specification or out-of-domain request."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or [message]


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class OscillatorSpec:
    """One operator from the five supported families.

    Only the fields relevant to ``family`` are used.  ``shift`` is an explicit
    real constant added to the potential (it moves the whole spectrum).
    """

    family: str
    a: int | None = None
    re_coeffs: tuple[float, ...] = ()
    im_coeffs: tuple[float, ...] = ()
    b: float | None = None
    s: float | None = None
    l: float | None = None
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "re_coeffs", _trim(self.re_coeffs))
        object.__setattr__(self, "im_coeffs", _trim(self.im_coeffs))

    # convenience constructors
    @classmethod
    def polynomial(cls, a: int, im_coeffs, re_coeffs=(), shift: float = 0.0) -> OscillatorSpec:
        return cls("PolynomialL", a=int(a), re_coeffs=tuple(re_coeffs), im_coeffs=tuple(im_coeffs), shift=shift)

    @classmethod
    def even_imaginary(cls, b: float) -> OscillatorSpec:
        return cls("EvenImaginary", b=float(b))

    @classmethod
    def odd_imaginary(cls, b: int) -> OscillatorSpec:
        return cls("OddImaginary", b=int(b))

    @classmethod
    def conjugated(cls, b: float, s: float) -> OscillatorSpec:
        return cls("Conjugated", b=float(b), s=float(s))

    @classmethod
    def self_adjoint_power(cls, l: float) -> OscillatorSpec:
        return cls("SelfAdjointPower", l=float(l))

    # derived quantities used throughout
    @property
    def im_degree(self) -> int:
        return len(self.im_coeffs) - 1

    @property
    def c_b(self) -> float:
        return self.im_coeffs[-1] if self.im_coeffs else 0.0

    def potential_coefficients(self) -> np.ndarray | None:
        """Complex coefficients of V (low to high), or None if V is not a polynomial."""
        f = self.family
        if f == "PolynomialL":
            deg = 2 * self.a
            c = np.zeros(deg + 1, dtype=complex)
            c[deg] = 1.0
            c[: len(self.re_coeffs)] += np.asarray(self.re_coeffs)
            c[: len(self.im_coeffs)] += 1j * np.asarray(self.im_coeffs)
        elif f == "EvenImaginary" and _is_even_int(self.b):
            c = np.zeros(int(round(self.b)) + 1, dtype=complex)
            c[-1] = 1j
        elif f == "OddImaginary":
            c = np.zeros(2 * int(self.b) + 2, dtype=complex)
            c[-1] = 1j
        elif f == "SelfAdjointPower" and _is_even_int(self.l):
            c = np.zeros(int(round(self.l)) + 1, dtype=complex)
            c[-1] = 1.0
        else:
            return None
        c[0] += self.shift
        return c

    @property
    def is_polynomial(self) -> bool:
        return self.potential_coefficients() is not None

    @property
    def leading_degree(self) -> float:
        """Growth exponent of |V| at infinity."""
        f = self.family
        if f == "PolynomialL":
            return 2.0 * self.a
        if f == "OddImaginary":
            return 2.0 * self.b + 1
        if f == "SelfAdjointPower":
            return float(self.l)
        return float(self.b)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"family": self.family}
        if self.family == "PolynomialL":
            d.update(a=self.a, re_coeffs=list(self.re_coeffs), im_coeffs=list(self.im_coeffs))
        elif self.family in ("EvenImaginary", "OddImaginary"):
            d["b"] = self.b
        elif self.family == "Conjugated":
            d.update(b=self.b, s=self.s)
        elif self.family == "SelfAdjointPower":
            d["l"] = self.l
        if self.shift:
            d["shift"] = self.shift
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> OscillatorSpec:
        allowed = {
            "PolynomialL": {"a", "re_coeffs", "im_coeffs"},
            "EvenImaginary": {"b"},
            "OddImaginary": {"b"},
            "Conjugated": {"b", "s"},
            "SelfAdjointPower": {"l"},
        }
        fam = d.get("family")
        if fam not in allowed:
            raise ModelError(f"family must be one of {', '.join(FAMILIES)}")
        extra = set(d) - allowed[fam] - {"family", "shift"}
        if extra:
            raise ModelError(f"unknown oscillator keys for {fam}: {sorted(extra)}")
        kw = {k: d[k] for k in d if k != "family"}
        for key in ("re_coeffs", "im_coeffs"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return cls(fam, **kw)


def _is_even_int(x) -> bool:
    return x is not None and float(x) == round(float(x)) and int(round(float(x))) % 2 == 0


def shifted_oscillator(alpha1: complex = 1j, alpha0: complex = 0.0) -> OscillatorSpec:
    """-d^2 + x^2 + alpha1 x + alpha0 for purely imaginary alpha1 and real alpha0."""
    alpha1, alpha0 = complex(alpha1), complex(alpha0)
    if alpha1.real != 0 or alpha0.imag != 0:
        raise ModelError("only imaginary alpha1 and real alpha0 fit the polynomial family")
    return OscillatorSpec.polynomial(1, im_coeffs=(0.0, alpha1.imag), shift=alpha0.real)


def validate(spec: OscillatorSpec) -> list[str]:
    """Return the list of violated constraints (empty when valid)."""
    v: list[str] = []
    f = spec.family
    if f not in FAMILIES:
        return [f"family must be one of {', '.join(FAMILIES)}"]
    if not math.isfinite(spec.shift):
        v.append("shift must be finite")
    if f == "PolynomialL":
        a = spec.a
        if a is None or int(a) != a or a < 1:
            v.append("a must be a positive integer")
            return v
        if len(spec.re_coeffs) - 1 > 2 * a - 1:
            v.append(f"deg Re V1 = {len(spec.re_coeffs) - 1} exceeds 2a-1 = {2 * a - 1}")
        if not spec.im_coeffs:
            v.append("Im V1 must be a nonzero polynomial")
        else:
            b = spec.im_degree
            if not (a - 1 < b < 2 * a):
                v.append(f"degree condition a-1 < b < 2a violated: a={a}, b={b}")
            if spec.c_b <= 0:
                v.append(f"leading coefficient c_b = {spec.c_b} of Im V1 must be positive")
        for c in spec.re_coeffs + spec.im_coeffs:
            if not math.isfinite(c):
                v.append("coefficients must be finite")
                break
    elif f == "EvenImaginary":
        if spec.b is None or not spec.b > 0:
            v.append("EvenImaginary requires b > 0")
    elif f == "OddImaginary":
        if spec.b is None or int(spec.b) != spec.b or spec.b < 1:
            v.append("OddImaginary requires an integer b >= 1")
    elif f == "Conjugated":
        if spec.b is None or not spec.b >= 2:
            v.append("Conjugated requires b >= 2")
        if spec.s is None or not 0 < spec.s < 1:
            v.append("Conjugated requires 0 < s < 1")
    elif f == "SelfAdjointPower":
        if spec.l is None or not spec.l > 0:
            v.append("SelfAdjointPower requires l > 0")
    return v


def _require_valid(spec: OscillatorSpec) -> None:
    v = validate(spec)
    if v:
        raise ModelError("; ".join(v), v)


# {{{ constants


def _beta(x: float, y: float) -> float:
    return math.exp(gammaln(x) + gammaln(y) - gammaln(x + y))


def power_d(l: float) -> float:
    """Weyl constant of -d^2 + |x|^l: mu_n ~ (d n)^{2l/(l+2)}."""
    return math.sqrt(math.pi) * math.exp(gammaln(1.5 + 1.0 / l) - gammaln(1.0 + 1.0 / l))


@dataclass(frozen=True)
class AsymptoticConstants:
    kappa: float
    d: float
    sigma: float | None = None
    tau: float | None = None
    omega0: float | None = None
    ray_angle: float | None = None
    slope_constant: float | None = None
    projection_exponent: float | None = None


def constants(spec: OscillatorSpec) -> AsymptoticConstants:
    """Closed-form exponents and coefficients attached to ``spec``."""
    _require_valid(spec)
    f = spec.family
    if f == "PolynomialL":
        a, b = spec.a, spec.im_degree
        kappa = 2.0 * a / (a + 1)
        d = math.pi / _beta(0.5, 1.0 + 1.0 / (2 * a))
        tau = (b - (a - 1)) / (2.0 * a)
        sigma = (b - (a - 1)) / (1.0 + a)
        omega0 = tau * b / (b + 1.0)
        slope = None
        if a == 1 and b == 1:
            # shifted oscillator: log ||P_n|| ~ sqrt(2) |Im alpha1| n^{1/2}
            slope = math.sqrt(2.0) * spec.c_b
        return AsymptoticConstants(kappa, d, sigma, tau, omega0, slope_constant=slope)
    if f == "EvenImaginary":
        b = spec.b
        slope = math.log1p(math.sqrt(2.0)) if b == 2 else None
        return AsymptoticConstants(2.0 * b / (b + 2), power_d(b), ray_angle=math.pi / (b + 2), slope_constant=slope)
    if f == "OddImaginary":
        b = int(spec.b)
        m = 2 * b + 1
        d = math.pi / (_beta(0.5, 1.0 + 1.0 / m) * math.cos(math.pi / (2 * m)))
        slope = math.pi / math.sqrt(3.0) if b == 1 else None
        return AsymptoticConstants((4.0 * b + 2) / (2 * b + 3), d, slope_constant=slope)
    if f == "Conjugated":
        b, s = spec.b, spec.s
        kappa = 2.0 * b / (b + 2)
        return AsymptoticConstants(kappa, power_d(b), projection_exponent=s / kappa)
    l = spec.l
    return AsymptoticConstants(2.0 * l / (l + 2), power_d(l))


def predicted_eigenvalue(spec: OscillatorSpec, n: int) -> complex:
    """Leading model (d n)^kappa for the real part of the n-th eigenvalue.

    For EvenImaginary the model is placed on the ray of angle pi/(b+2).
    """
    if n < 1:
        raise ModelError("n must be >= 1")
    c = constants(spec)
    mod = (c.d * n) ** c.kappa
    if c.ray_angle is not None:
        return mod * complex(math.cos(c.ray_angle), math.sin(c.ray_angle))
    return complex(mod)


def exact_shifted_ho(alpha1: complex, alpha0: complex, n: int) -> complex:
    """n-th eigenvalue 2n - 1 + alpha0 - alpha1^2/4 of -d^2 + x^2 + alpha1 x + alpha0."""
    if n < 1:
        raise ModelError("n must be >= 1")
    return 2 * n - 1 + complex(alpha0) - complex(alpha1) ** 2 / 4


@dataclass(frozen=True)
class ProjectionModel:
    """What is known in closed form about ||P_n||.

    ``kind`` is one of ``value`` (full formula), ``slope`` (log ||P_n|| ~ slope * n),
    ``exponent`` (log ||P_n|| ~ lambda_n^exponent) or ``none`` (only the
    growth order ``sigma`` of log ||P_n|| in n is available).
    """

    kind: str
    value: float | None = None
    slope: float | None = None
    exponent: float | None = None
    sigma: float | None = None


def predicted_projection_norm(spec: OscillatorSpec, n: int) -> ProjectionModel:
    if n < 1:
        raise ModelError("n must be >= 1")
    c = constants(spec)
    f = spec.family
    if f == "PolynomialL" and spec.a == 1 and spec.im_degree == 1:
        g = abs(spec.c_b)
        val = 2 ** -0.75 * (math.pi * g) ** -0.5 * math.exp(math.sqrt(2.0) * g * math.sqrt(n)) * n**-0.25
        return ProjectionModel("value", value=val, sigma=c.sigma)
    if c.slope_constant is not None and f in ("EvenImaginary", "OddImaginary"):
        return ProjectionModel("slope", slope=c.slope_constant)
    if f == "Conjugated":
        return ProjectionModel("exponent", exponent=c.projection_exponent)
    return ProjectionModel("none", sigma=c.sigma)


# }}}

# {{{ potentials


def _conjugation_poly(p: float) -> np.ndarray:
    """Odd quintic on [0, 1] matching x^p / 2 to second order at x = 1."""
    A = np.array([[1.0, 1.0, 1.0], [1.0, 3.0, 5.0], [0.0, 6.0, 20.0]])
    rhs = np.array([0.5, 0.5 * p, 0.5 * p * (p - 1.0)])
    c1, c3, c5 = np.linalg.solve(A, rhs)
    return np.array([0.0, c1, 0.0, c3, 0.0, c5])


def conjugation_weight(spec: OscillatorSpec, x, derivative: int = 0):
    """The conjugating weight v and its derivatives for the Conjugated family.

    v(x) = x^p / 2 with p = (2+b)s/2 for x >= 1, extended to an odd C^2
    function by a quintic on [-1, 1].
    """
    if spec.family != "Conjugated":
        raise ModelError("conjugation weight is defined only for the Conjugated family")
    x = np.asarray(x, dtype=float)
    p = (2.0 + spec.b) * spec.s / 2.0
    ax = np.abs(x)
    sgn = np.sign(x)
    outer = ax >= 1.0
    safe = np.where(outer, ax, 1.0)
    coef = 0.5 * np.prod([p - j for j in range(derivative)]) if derivative else 0.5
    big = coef * safe ** (p - derivative)
    poly = P.polyder(_conjugation_poly(p), derivative) if derivative else _conjugation_poly(p)
    small = P.polyval(ax, poly)
    val = np.where(outer, big, small)
    # v is odd: even derivatives are odd functions, odd derivatives even
    if derivative % 2 == 0:
        val = sgn * val
    return val


def potential_eval(spec: OscillatorSpec, z):
    """V(z).  Non-polynomial families accept only real arguments."""
    coeffs = spec.potential_coefficients()
    if coeffs is not None:
        return P.polyval(np.asarray(z, dtype=complex) if np.iscomplexobj(z) else z, coeffs)
    if np.iscomplexobj(z) and np.any(np.imag(z) != 0):
        raise ModelError(f"{spec.family} potential is defined only for real arguments")
    x = np.asarray(np.real(z), dtype=float)
    f = spec.family
    if f == "EvenImaginary":
        out = 1j * np.abs(x) ** spec.b
    elif f == "SelfAdjointPower":
        out = np.abs(x) ** spec.l + 0j
    elif f == "Conjugated":
        out = np.abs(x) ** spec.b + 0j
    else:  # pragma: no cover - polynomial families handled above
        raise ModelError(f"unknown family {f}")
    return out + spec.shift


def turning_points(spec: OscillatorSpec, lam: complex) -> tuple[float, float]:
    """(x_alpha, y_beta) with x_alpha^{2a} = Re lambda and c_b y_beta^b = Im lambda."""
    if spec.family != "PolynomialL":
        raise ModelError("turning points are defined for the PolynomialL family")
    _require_valid(spec)
    alpha, beta = complex(lam).real, complex(lam).imag
    if alpha <= 0:
        raise ModelError("Re lambda must be positive")
    if beta < 0:
        raise ModelError("Im lambda must be nonnegative")
    return alpha ** (1.0 / (2 * spec.a)), (beta / spec.c_b) ** (1.0 / spec.im_degree)


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def admissible_region(spec: OscillatorSpec, lam: complex, epsilon: float, omega: float | None = None) -> Admissibility:
    """Membership of lambda in the region where resolvent lower bounds hold.

    Odd b: 0 <= beta <= (c_b - eps) alpha^{b/(2a)}.
    Even b: alpha^{b/(2(b+1)) + omega} <= beta <= (c_b - eps) alpha^{b/(2a)}.
    """
    if spec.family != "PolynomialL":
        raise ModelError("admissible regions are defined for the PolynomialL family")
    _require_valid(spec)
    cb, a, b = spec.c_b, spec.a, spec.im_degree
    if not 0 < epsilon < cb:
        raise ModelError(f"epsilon must lie in (0, c_b) = (0, {cb})")
    alpha, beta = complex(lam).real, complex(lam).imag
    if alpha <= 0:
        return Admissibility(False, "Re lambda must be positive")
    upper = (cb - epsilon) * alpha ** (b / (2.0 * a))
    if b % 2 == 1:
        if beta < 0:
            return Admissibility(False, "Im lambda below 0")
        if beta > upper:
            return Admissibility(False, f"Im lambda above upper envelope {upper:.6g}")
        return Admissibility(True, "inside odd-b region")
    omega0 = constants(spec).omega0
    if omega is None or not 0 < omega < omega0:
        raise ModelError(f"omega must lie in (0, omega0) = (0, {omega0})")
    lower = alpha ** (b / (2.0 * (b + 1)) + omega)
    if beta < lower:
        return Admissibility(False, f"Im lambda below lower envelope {lower:.6g}")
    if beta > upper:
        return Admissibility(False, f"Im lambda above upper envelope {upper:.6g}")
    return Admissibility(True, "inside even-b region")


# }}}
