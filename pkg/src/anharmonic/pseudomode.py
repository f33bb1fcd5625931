"""Constructive pseudomodes for the polynomial family.

The quasimode is ``u = chi * exp(i phi) * (a_0 + ... + a_N)`` supported on
``[y - 2 Delta, y + 2 Delta]`` around the imaginary turning point ``y``.
The phase solves the eikonal equation ``phi' = -(lambda - V)^{1/2}`` and the
amplitudes follow the transport recursion

    a_0 = s(y) / s,   a_j = s^{-1} int_y^x i a_{j-1}'' / (2 s),   s = i (lambda - V)^{1/4},

so that ``(lambda - L) exp(i phi) sum a_j = exp(i phi) a_N''``.  All smooth
factors are Chebyshev interpolants on the support; the residual is assembled
from that identity and never by differentiating u.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial.chebyshev import Chebyshev

from . import model
from .discretize import BasisSpec, assemble, hermite_functions
from .model import ModelError, OscillatorSpec
from .spectra import resolvent_norm_matrix

__all__ = [
    "PseudomodeError",
    "BranchError",
    "PseudomodeParams",
    "PseudomodeResult",
    "ScanResult",
    "Certificate",
    "cutoff",
    "build",
    "quality_scan",
    "certify_against_svd",
]

SUPPORT_RULES = ("disc", "branch")


class PseudomodeError(ValueError):
    pass


class BranchError(PseudomodeError):
    """lambda - V crosses the branch cut of the principal root on the support."""


@dataclass(frozen=True)
class PseudomodeParams:
    """Construction parameters.

    ``delta_override`` replaces the default width factor (1 - zeta)/32,
    which is far too small at moderate alpha.  ``n_terms=None`` selects the
    number of transport terms adaptively.  ``support_rule`` chooses the
    safety condition on the support: ``"disc"`` requires alpha > |V| there,
    ``"branch"`` only requires lambda - V to stay off the branch cut, which
    admits supports reaching past the real turning point.
    """

    epsilon: float = 0.5
    delta_override: float | None = 0.3
    n_terms: int | None = None
    cheb_order: int = 32
    quad_order: int = 256
    support_rule: str = "disc"
    omega: float | None = None
    allow_inadmissible: bool = False
    chop_tolerance: float = 1e-13

    def __post_init__(self):
        if not self.epsilon > 0:
            raise PseudomodeError("epsilon must be positive")
        if self.delta_override is not None and not self.delta_override > 0:
            raise PseudomodeError("delta_override must be positive")
        if self.n_terms is not None and (int(self.n_terms) != self.n_terms or self.n_terms < 0):
            raise PseudomodeError("n_terms must be a nonnegative integer")
        if self.cheb_order < 16:
            raise PseudomodeError("cheb_order must be at least 16")
        if self.quad_order < 2 * self.cheb_order:
            raise PseudomodeError("quad_order must be at least 2 * cheb_order")
        if self.support_rule not in SUPPORT_RULES:
            raise PseudomodeError(f"support_rule must be one of {SUPPORT_RULES}")


# {{{ cutoff


def _bump(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 0.5
    out[m] = np.exp(-1.0 / (1.0 - 4.0 * t[m] ** 2))
    return out


def _bump_prime(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 0.5
    s = 1.0 - 4.0 * t[m] ** 2
    out[m] = np.exp(-1.0 / s) * (-8.0 * t[m] / s**2)
    return out


_GL_X, _GL_W = legendre.leggauss(64)
_BUMP_MASS = float(np.sum(_GL_W * _bump(0.5 * _GL_X)) * 0.5)


def _ramp(t):
    """int_{-1/2}^{t} E / int E for t in [-1/2, 1/2], vectorized Gauss-Legendre."""
    t = np.clip(np.asarray(t, dtype=float), -0.5, 0.5)
    half = 0.5 * (t + 0.5)
    nodes = -0.5 + half[..., None] * (_GL_X + 1.0)
    out = np.sum(_GL_W * _bump(nodes), axis=-1) * half / _BUMP_MASS
    # pin the ends so the plateau is exactly 1 and the exterior exactly 0
    return np.where(t >= 0.5, 1.0, np.where(t <= -0.5, 0.0, out))


def cutoff(t, derivative: int = 0):
    """Smooth plateau h(t): 1 on |t| <= 1, 0 for |t| >= 2, in the scaled variable.

    The flanks are the normalized antiderivative of the bump
    E(s) = exp(-1/(1 - 4 s^2)) on |s| < 1/2, shifted to 1 < |t| < 2.
    """
    t = np.asarray(t, dtype=float)
    if derivative == 0:
        return _ramp(1.5 - np.abs(t))
    if derivative == 1:
        return np.where(t < 0, _bump(1.5 + t), -_bump(1.5 - t)) / _BUMP_MASS
    if derivative == 2:
        return np.where(t < 0, _bump_prime(1.5 + t), _bump_prime(1.5 - t)) / _BUMP_MASS
    raise PseudomodeError("cutoff derivatives up to order 2 only")


# }}}


@dataclass(frozen=True)
class PseudomodeResult:
    lam: complex
    delta: float
    delta_lambda: float
    mu_lambda: float
    n_used: int
    n_ceiling: int
    support: tuple[float, float]
    q: float
    norm_u: float
    norm_residual: float
    center: float
    history: tuple[float, ...]
    evaluate: Callable = field(repr=False, compare=False)
    samples: np.ndarray = field(repr=False, compare=False)

    @property
    def lower_bound(self) -> float:
        return 1.0 / self.q


class _Piecewise:
    """Piecewise Chebyshev representation built by adaptive bisection.

    The potential-dependent factors have complex singularities close to the
    real turning points, so a single interpolant on the whole support needs
    a huge degree and its second derivative drowns in rounding noise.
    """

    def __init__(self, edges: np.ndarray, pieces: list[Chebyshev]):
        self.edges = edges
        self.pieces = pieces

    @classmethod
    def fit(cls, f, lo: float, hi: float, degree: int, tol: float, max_pieces: int = 2048) -> _Piecewise:
        probe = f(np.linspace(lo, hi, 257))
        scale = float(np.max(np.abs(probe))) or 1.0
        stack = [(lo, hi)]
        done: list[tuple[float, float, Chebyshev]] = []
        while stack:
            a, b = stack.pop()
            c = Chebyshev.interpolate(f, degree, domain=[a, b])
            coef = c.coef
            if np.max(np.abs(coef[-4:])) <= tol * scale or len(done) + len(stack) >= max_pieces:
                keep = np.flatnonzero(np.abs(coef) > 0.1 * tol * scale)
                last = int(keep[-1]) + 1 if keep.size else 1
                done.append((a, b, Chebyshev(coef[:last], domain=[a, b])))
            else:
                m = 0.5 * (a + b)
                stack.extend([(m, b), (a, m)])
        done.sort(key=lambda t: t[0])
        edges = np.array([d[0] for d in done] + [done[-1][1]])
        return cls(edges, [d[2] for d in done])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(x.shape, dtype=complex)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.pieces[k](x[m])
        return out

    def deriv(self, m: int = 1) -> _Piecewise:
        return _Piecewise(self.edges, [p.deriv(m) for p in self.pieces])

    def integ(self, anchor: float) -> _Piecewise:
        """Continuous antiderivative vanishing at ``anchor``."""
        pieces = []
        offset = 0j
        for a, p in zip(self.edges[:-1], self.pieces):
            q = p.integ(lbnd=a) + offset
            pieces.append(q)
            offset = complex(q(p.domain[1]))
        out = _Piecewise(self.edges, pieces)
        return _Piecewise(self.edges, [p - out(np.array([anchor]))[0] for p in pieces])


def _width_factor(spec: OscillatorSpec, params: PseudomodeParams) -> float:
    if params.delta_override is not None:
        return float(params.delta_override)
    zeta = (1.0 - params.epsilon / spec.c_b) ** (1.0 / spec.im_degree)
    return (1.0 - zeta) / 32.0


def _check_branch(spec: OscillatorSpec, lam: complex, lo: float, hi: float, rule: str) -> None:
    coeffs = spec.potential_coefficients()
    if rule == "disc":
        xs = np.linspace(lo, hi, 2049)
        gap = lam.real - np.abs(model.potential_eval(spec, xs))
        if np.min(gap) <= 0:
            raise BranchError(f"Re lambda - |V| reaches {np.min(gap):.4g} on the support")
        return
    # lambda - V is on the cut only where Im(lambda - V) = 0 and Re(lambda - V) <= 0
    im_poly = np.polynomial.Polynomial(-np.imag(coeffs))
    im_poly = im_poly + lam.imag
    roots = [r.real for r in im_poly.roots() if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and lo <= r.real <= hi]
    if np.all(np.imag(coeffs) == 0) and lam.imag == 0:
        roots = list(np.linspace(lo, hi, 2049))
    for r in roots:
        val = lam - model.potential_eval(spec, r)
        if val.real <= 0:
            raise BranchError(f"lambda - V meets the branch cut at x = {r:.6g}")


def _prepare(spec: OscillatorSpec, lam: complex, params: PseudomodeParams):
    if spec.family != "PolynomialL":
        raise PseudomodeError("pseudomodes are built for the PolynomialL family only")
    lam = complex(lam)
    if not params.allow_inadmissible:
        omega = params.omega
        if omega is None and spec.im_degree % 2 == 0:
            omega = 0.5 * model.constants(spec).omega0
        adm = model.admissible_region(spec, lam, params.epsilon, omega)
        if not adm:
            raise PseudomodeError(f"lambda = {lam} is not admissible: {adm.reason}")
    x_alpha, y_beta = model.turning_points(spec, lam)
    delta = _width_factor(spec, params)
    width = delta * (x_alpha if spec.im_degree % 2 == 1 else y_beta)
    if not width > 0:
        raise PseudomodeError("support width vanishes (Im lambda = 0 with even b)")
    mu = width ** (spec.im_degree + 1) / math.sqrt(lam.real)
    return lam, y_beta, delta, width, mu


def _nodes(center: float, width: float, min_nodes: int, wavenumber: float = 0.0):
    """Composite Gauss-Legendre on the three cutoff panels.

    Each panel is cut into pieces of at most 30 radians of phase (64 nodes
    each), with at least ``min_nodes`` nodes per panel.
    """
    x, w = legendre.leggauss(64)
    xs, ws = [], []
    for lo, hi in ((-2, -1), (-1, 1), (1, 2)):
        length = width * (hi - lo)
        pieces = max(math.ceil(wavenumber * length / 30.0), math.ceil(min_nodes / 64), 1)
        edges = center + width * np.linspace(lo, hi, pieces + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            xs.append(a + (b - a) * (x + 1) / 2)
            ws.append(w * (b - a) / 2)
    return np.concatenate(xs), np.concatenate(ws)


def build(spec: OscillatorSpec, lam: complex, params: PseudomodeParams | None = None) -> PseudomodeResult:
    """Construct the quasimode at lambda and measure q = ||(lambda - L) u|| / ||u||."""
    params = params or PseudomodeParams()
    lam, y, delta, width, mu = _prepare(spec, lam, params)
    lo, hi = y - 2 * width, y + 2 * width
    _check_branch(spec, lam, lo, hi, params.support_rule)
    order, tol = params.cheb_order, params.chop_tolerance
    V = lambda x: model.potential_eval(spec, x)

    root4 = lambda x: (lam - V(x)) ** 0.25
    s = lambda x: 1j * root4(x)
    dphi = lambda x: -np.sqrt(lam - V(x))
    fit = lambda f: _Piecewise.fit(f, lo, hi, order, tol)
    phi_c = fit(dphi).integ(y)
    s_y = s(np.array([y]))[0]

    amps = [fit(lambda x: s_y / s(x))]
    # ceiling from the size of 1/phi' on the segment
    xs_fine = np.linspace(lo, hi, 4097)
    inv_dphi = float(np.max(1.0 / np.abs(dphi(xs_fine))))
    ceiling = int(math.floor(width / (math.e * inv_dphi)))

    wavenumber = float(np.max(np.abs(dphi(xs_fine))))
    xq, wq = _nodes(y, width, params.quad_order, wavenumber)
    t = (xq - y) / width
    chi, chi1, chi2 = cutoff(t), cutoff(t, 1) / width, cutoff(t, 2) / width**2
    eph = np.exp(1j * phi_c(xq))
    dph = dphi(xq)

    def quality(amplitudes):
        total = sum(a(xq) for a in amplitudes)
        dtotal = sum(a.deriv()(xq) for a in amplitudes)
        u = chi * eph * total
        r = chi2 * eph * total + 2 * chi1 * eph * (1j * dph * total + dtotal) + chi * eph * amplitudes[-1].deriv(2)(xq)
        nu = math.sqrt(float(np.sum(wq * np.abs(u) ** 2)))
        nr = math.sqrt(float(np.sum(wq * np.abs(r) ** 2)))
        return nu, nr

    def next_amplitude(prev):
        d2 = prev.deriv(2)
        g = fit(lambda x: 1j * d2(x) / (2 * s(x))).integ(y)
        return fit(lambda x: g(x) / s(x))

    nu, nr = quality(amps)
    history = [nr / nu if nu > 0 else math.inf]
    best = (history[0], 0, nu, nr)
    target = params.n_terms
    limit = ceiling if target is None else target
    while len(amps) - 1 < limit:
        amps.append(next_amplitude(amps[-1]))
        nu, nr = quality(amps)
        q = nr / nu if nu > 0 else math.inf
        history.append(q)
        if target is None:
            if not q < best[0]:
                amps.pop()
                break
            best = (q, len(amps) - 1, nu, nr)
        else:
            best = (q, len(amps) - 1, nu, nr)
    q, n_used, nu, nr = best
    amps = amps[: n_used + 1]
    if nu < 1e-300:
        raise PseudomodeError("pseudomode norm underflows")

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        inside = (x > lo) & (x < hi)
        out = np.zeros(x.shape, dtype=complex)
        xi = x[inside]
        out[inside] = cutoff((xi - y) / width) * np.exp(1j * phi_c(xi)) * sum(a(xi) for a in amps)
        return out

    grid = np.linspace(lo, hi, 513)
    samples = np.column_stack([grid, evaluate(grid)])
    return PseudomodeResult(lam, delta, width, mu, n_used, ceiling, (lo, hi), q, nu, nr, y,
                            tuple(history), evaluate, samples)


# {{{ scans and certificates


@dataclass(frozen=True)
class ScanResult:
    points: list[tuple[complex, float, float]]
    failures: list[tuple[complex, str]]
    mu: list[float]
    eta_hat: float
    r_squared: float


def quality_scan(spec: OscillatorSpec, curve, params: PseudomodeParams | None = None,
                 threads: int | None = None) -> ScanResult:
    """Builds along a curve and the fit log(1/q) = eta mu_lambda + c."""
    curve = [complex(z) for z in curve]
    if len(curve) < 2:
        raise PseudomodeError("a scan needs at least two points")
    params = params or PseudomodeParams()

    def one(z):
        try:
            return build(spec, z, params)
        except (PseudomodeError, ModelError) as exc:
            return exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, curve))
    else:
        results = [one(z) for z in curve]
    points, failures, mus = [], [], []
    for z, r in zip(curve, results):
        if isinstance(r, Exception):
            failures.append((z, str(r)))
        else:
            points.append((z, r.q, r.lower_bound))
            mus.append(r.mu_lambda)
    if len(points) < 2:
        raise PseudomodeError("fewer than two successful builds; no fit")
    x = np.array(mus)
    yv = np.log([p[2] for p in points])
    if np.ptp(x) == 0:
        raise PseudomodeError("all builds share the same mu; no fit")
    slope, icpt = np.polyfit(x, yv, 1)
    pred = slope * x + icpt
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - float(np.sum((yv - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return ScanResult(points, failures, mus, float(slope), r2)


@dataclass(frozen=True)
class Certificate:
    lam: complex
    q: float
    lower_bound: float
    resolvent_norm: float
    projection_defect: float
    slack: float
    holds: bool
    valid: bool
    informative: bool
    note: str


def certify_against_svd(spec: OscillatorSpec, basis: BasisSpec, lam: complex,
                        params: PseudomodeParams | None = None, slack: float = 0.1,
                        result: PseudomodeResult | None = None) -> Certificate:
    """Compare 1/q with the discretized resolvent norm 1/sigma_min(lambda - A).

    The pseudomode is projected onto the Hermite basis; a relative defect
    above 10% means the basis cannot see u and the certificate is withheld.
    """
    res = result if result is not None else build(spec, lam, params)
    lo, hi = res.support
    xq, wq = _nodes(res.center, res.delta_lambda, 256, math.sqrt(2.0 * basis.size + 1) / basis.scaling)
    u = res.evaluate(xq)
    phi = hermite_functions(xq, basis.size, basis.scaling)
    coef = phi @ (wq * u)
    norm_u2 = float(np.sum(wq * np.abs(u) ** 2))
    defect = math.sqrt(max(norm_u2 - float(np.sum(np.abs(coef) ** 2)), 0.0) / norm_u2)
    A = assemble(spec, basis)
    rn = resolvent_norm_matrix(A, res.lam).norm
    holds = res.lower_bound <= rn * (1 + slack)
    informative = res.q <= 1
    valid = defect <= 0.1
    if not informative:
        note = "q > 1: the bound is weaker than the trivial one"
    elif not valid:
        note = f"projection defect {defect:.3g} exceeds 10%; certificate withheld"
    else:
        note = "certificate holds" if holds else "certificate violated"
    return Certificate(res.lam, res.q, res.lower_bound, rn, defect, slack, holds, valid, informative, note)


# }}}
