"""The fourteen acceptance checks, shared by the test suite and ``anharmonic verify``.

Every check returns a :class:`CriterionResult` with the measured numbers, so
a failure reports how far off it is rather than just that it failed.
"""
from __future__ import annotations

import math
import os
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import gauge, model, pseudomode, spectra
from .discretize import BasisSpec, choose_scaling

__all__ = ["CriterionResult", "CRITERIA", "run", "run_all", "format_line"]

SEED = 20240917


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def format_line(r: CriterionResult) -> str:
    return f"criterion {r.number:2d} {'PASS' if r.passed else 'FAIL'}: {r.title}: {r.summary} [{r.seconds:.1f}s]"


def _slope(n, y) -> float:
    return float(np.polyfit(np.asarray(n, float), np.asarray(y, float), 1)[0])


SHIFTED = model.shifted_oscillator(1j, 0.0)


def shifted_ho_exactness() -> CriterionResult:
    t0 = time.perf_counter()
    s = spectra.compute_spectrum(SHIFTED, BasisSpec(128), 15, check=False)
    exact = np.array([model.exact_shifted_ho(1j, 0.0, n) for n in range(1, 16)])
    err = float(np.max(np.abs(s.values - exact)))
    dt = time.perf_counter() - t0
    ok = err <= 1e-8 and dt < 10
    return CriterionResult(1, "shifted oscillator eigenvalues", ok,
                           f"max |lambda_n - (2n - 3/4)| = {err:.2e} (<= 1e-8), runtime {dt:.2f}s (< 10s)",
                           {"max_error": err, "runtime": dt})


def _shifted_norms(size: int = 256, lo: int = 10, hi: int = 30):
    s = spectra.compute_spectrum(SHIFTED, BasisSpec(size), hi, check=False)
    return [(n, float(s.projection_norms[n - 1])) for n in range(lo, hi + 1)]


def shifted_ho_projections() -> CriterionResult:
    norms = _shifted_norms()
    ratios = [v / model.predicted_projection_norm(SHIFTED, n).value for n, v in norms]
    lo, hi = min(ratios), max(ratios)
    ok = 0.85 <= lo and hi <= 1.15
    return CriterionResult(2, "shifted oscillator projection norms", ok,
                           f"ratio to closed form in [{lo:.4f}, {hi:.4f}] for n in 10..30 (target [0.85, 1.15])",
                           {"ratio_min": lo, "ratio_max": hi})


def _window_slope(spec, size, scaling, lo, hi):
    s = spectra.compute_spectrum(spec, BasisSpec(size, scaling), hi + 5)
    # eigenvalues of such non-normal matrices rarely pass the 1e-8 doubling
    # test this high up, but their projection norms are stable under doubling,
    # so every mode in the window enters the fit
    pn = dict(spectra.projection_norms(s, include_untrusted=True))
    n = np.arange(lo, hi + 1)
    slope = _slope(n, np.log([pn[k] for k in n]))
    return slope, int(np.sum(s.trusted[lo - 1:hi])), int(np.sum(s.precision_limited[lo - 1:hi]))


def davies_constant() -> CriterionResult:
    spec = model.OscillatorSpec.even_imaginary(2)
    target = math.log1p(math.sqrt(2.0))
    slope, trusted, limited = _window_slope(spec, 256, choose_scaling(spec, 256), 10, 25)
    rel = abs(slope - target) / target
    return CriterionResult(3, "even imaginary b=2 projection slope", rel <= 0.05,
                           f"slope {slope:.5f} vs log(1+sqrt2) = {target:.6f}, rel err {rel:.2%} (<= 5%); "
                           f"{trusted}/16 window modes pass the doubling test",
                           {"slope": slope, "target": target, "relative_error": rel, "trusted_in_window": trusted,
                            "precision_limited_in_window": limited})


def cubic_constant() -> CriterionResult:
    spec = model.OscillatorSpec.odd_imaginary(1)
    target = math.pi / math.sqrt(3.0)
    slope, trusted, limited = _window_slope(spec, 300, 1.0, 8, 15)
    rel = abs(slope - target) / target
    return CriterionResult(4, "imaginary cubic projection slope", rel <= 0.15,
                           f"slope {slope:.5f} vs pi/sqrt3 = {target:.6f}, rel err {rel:.2%} (<= 15%); "
                           f"{limited} window modes at the overlap precision floor",
                           {"slope": slope, "target": target, "relative_error": rel, "trusted_in_window": trusted,
                            "precision_limited_in_window": limited})


def eigenvalue_asymptotics() -> CriterionResult:
    spec = model.OscillatorSpec.polynomial(2, (0.0, 0.0, 1.0))
    c = model.constants(spec)
    s = spectra.compute_spectrum(spec, BasisSpec(200, choose_scaling(spec, 200)), 40)
    n = np.arange(20, 41)
    ratios = s.values[19:40].real / (c.d * n) ** (4.0 / 3.0)
    lo, hi = float(ratios.min()), float(ratios.max())
    ok = 0.93 <= lo and hi <= 1.07
    return CriterionResult(5, "quartic eigenvalue asymptotics", ok,
                           f"Re lambda_n / (d n)^(4/3) in [{lo:.4f}, {hi:.4f}] for n in 20..40, d = {c.d:.6f}",
                           {"ratio_min": lo, "ratio_max": hi, "d": c.d,
                            "trusted_in_window": int(np.sum(s.trusted[19:40]))})


def ray_angle() -> CriterionResult:
    out = {}
    for b in (2, 4):
        spec = model.OscillatorSpec.even_imaginary(b)
        s = spectra.compute_spectrum(spec, BasisSpec(200, choose_scaling(spec, 200)), 15)
        out[b] = (spectra.ray_angle_check(s, b, 15), int(np.sum(s.trusted)))
    worst = max(v[0] for v in out.values())
    return CriterionResult(6, "eigenvalue ray angle", worst <= 1e-3,
                           "; ".join(f"b={b}: max dev {v[0]:.2e} over {v[1]} trusted modes" for b, v in out.items()),
                           {f"b{b}": {"max_deviation": v[0], "trusted": v[1]} for b, v in out.items()})


def gauge_exactness() -> CriterionResult:
    vals = [gauge.a_product(n, 2.0) for n in range(1, 11)]
    err = max(abs(v - 0.5) for v in vals)
    return CriterionResult(7, "zero-deleted product at b=2", err <= 1e-6,
                           f"max |A(n;2) - 1/2| = {err:.2e} for n = 1..10 (<= 1e-6)", {"max_error": err})


def f_prime_asymptotics() -> CriterionResult:
    g = gauge.GaugeSpec(1.0, 1.0 / 3.0)
    n = np.arange(5, 41)
    target = math.pi / math.tan(math.pi / 3.0)
    slope = _slope(n, [gauge.log_abs_f_prime(g, int(k)) for k in n])
    product_slope = _slope(n, [gauge.log_a_product(int(k), 3.0) for k in n])
    rel = abs(slope - target) / target
    return CriterionResult(8, "derivative of the gauge at its zeros", rel <= 0.05,
                           f"slope of log|F'(-a_n)| {slope:.4f} vs pi cot(pi/3) = {target:.4f}, rel err {rel:.2%} "
                           f"(<= 5%); the zero-deleted product alone has slope {product_slope:.4f} "
                           f"(the n^-3 factor of F'(-a_n) lowers the finite-window slope)",
                           {"slope": slope, "target": target, "relative_error": rel, "product_slope": product_slope})


def _offset_points(rng, count):
    out = []
    while len(out) < count:
        z = complex(rng.uniform(0.5, 5), rng.choice([-1.0, 1.0]))
        w = complex(rng.uniform(0.5, 5), rng.choice([-1.0, 1.0]))
        if abs(z - w) > 1e-3:
            out.append((z, w))
    return out


def scalar_pfd() -> CriterionResult:
    g = gauge.GaugeSpec(1.0, 1.0 / 3.0)
    rng = np.random.default_rng(SEED)
    kernel = max(gauge.cauchy_kernel_pfd(g, z, w) for z, w in _offset_points(rng, 100))
    power = max(gauge.power_pfd(g, z, w, 2) for z, w in _offset_points(rng, 25))
    ok = kernel <= 1e-8 and power <= 1e-7
    return CriterionResult(9, "scalar partial fractions at rho=1/3", ok,
                           f"kernel residual max {kernel:.2e} (<= 1e-8), p=2 residual max {power:.2e} (<= 1e-7)",
                           {"kernel_max": kernel, "power2_max": power})


def half_order_closed_form() -> CriterionResult:
    g = gauge.GaugeSpec(1.0, 0.5)
    errs = []
    for w in (1.0, 4.0, 9.0):
        x = math.pi * math.sqrt(w)
        errs.append(abs(gauge.pfd_half_eval(g, w).value_series - x / math.sinh(x)))
    err = max(errs)
    return CriterionResult(10, "rho=1/2 expansion vs closed form", err <= 1e-10,
                           f"max error {err:.2e} at w in {{1, 4, 9}} (<= 1e-10)", {"max_error": err})


def _right_half_plane_matrix(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    shift = 1.0 - float(np.min(np.linalg.eigvals(A).real))
    return A + max(shift, 0.0) * np.eye(n)


def operator_identities() -> CriterionResult:
    rng = np.random.default_rng(SEED)
    davies = spectra.davies_identity_check(_right_half_plane_matrix(rng, 5), 2.0 + 1.5j, 4)
    bz = spectra.bz_identity_check(_right_half_plane_matrix(rng, 6), gauge.GaugeSpec(1.0, 1.0 / 3.0), 1.5 + 2.0j)
    ok = davies <= 1e-10 and bz <= 1e-6
    return CriterionResult(11, "operator resolvent identities", ok,
                           f"finite identity residual {davies:.2e} (<= 1e-10), gauge identity residual {bz:.2e} (<= 1e-6)",
                           {"davies_residual": davies, "bz_residual": bz})


# the construction needs its support to reach past the real turning point;
# with alpha > |V| on the support q stays above 0.5 at these alpha
PSEUDOMODE_PARAMS = pseudomode.PseudomodeParams(epsilon=0.5, delta_override=1.2, support_rule="branch")


def pseudomode_certificates() -> CriterionResult:
    spec = model.OscillatorSpec.polynomial(1, (0.0, 1.0))
    basis = BasisSpec(512)
    certs = [pseudomode.certify_against_svd(spec, basis, a, PSEUDOMODE_PARAMS) for a in (50, 100, 200)]
    qs = [c.q for c in certs]
    decreasing = all(x > y for x, y in zip(qs, qs[1:]))
    bounds = all(c.lower_bound <= c.resolvent_norm * 1.1 for c in certs)
    defects = max(c.projection_defect for c in certs)
    ok = decreasing and qs[-1] <= 1e-2 and bounds and defects <= 0.05
    return CriterionResult(12, "pseudomode resolvent certificates", ok,
                           "q = " + ", ".join(f"{q:.3e}" for q in qs) + f" at alpha = 50, 100, 200; "
                           f"1/q <= 1.1 ||R||: {bounds}; max projection defect {defects:.1e} (<= 5%)",
                           {"q": qs, "resolvent_norms": [c.resolvent_norm for c in certs],
                            "defects": [c.projection_defect for c in certs]})


def resolvent_consistency() -> CriterionResult:
    basis = BasisSpec(256)
    ks = np.arange(10, 31)
    zs = 2.0 * ks + 0.25
    logs = []
    for z in zs:
        r = spectra.resolvent_norm(SHIFTED, basis, complex(z))
        logs.append(math.log(r.norm * r.dist_to_spectrum))
    c = _slope(np.sqrt(zs), logs)
    gamma = spectra.fit_growth(_shifted_norms(), sigma=0.5).gamma_hat
    rel = abs(c - gamma) / gamma
    return CriterionResult(13, "resolvent growth vs projection growth", rel <= 0.5,
                           f"fitted c = {c:.4f} against sqrt(z), projection gamma = {gamma:.4f}, rel diff {rel:.1%} (<= 50%)",
                           {"c": c, "gamma_hat": gamma, "relative_difference": rel})


def _tests_dir() -> Path | None:
    here = Path(__file__).resolve()
    for parent in here.parents[:4]:
        cand = parent / "tests"
        if (cand / "test_acceptance.py").exists():
            return cand
    return None


def invariant_suites(elapsed_before: float = 0.0) -> CriterionResult:
    tests = _tests_dir()
    if tests is None:
        return CriterionResult(14, "invariant suites", False, "test directory not found (needs a source checkout)")
    t0 = time.perf_counter()
    env = dict(os.environ, ANHARMONIC_SKIP_NESTED="1")
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(tests), "-q", "-p", "no:cacheprovider",
         "--ignore", str(tests / "test_acceptance.py")],
        capture_output=True, text=True, cwd=tests.parent, env=env,
    )
    dt = time.perf_counter() - t0
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    total = elapsed_before + dt
    ok = proc.returncode == 0 and total <= 600
    return CriterionResult(14, "invariant suites", ok,
                           f"{tail}; suite {dt:.1f}s, total verify time {total:.1f}s (<= 600s)",
                           {"returncode": proc.returncode, "suite_seconds": dt, "total_seconds": total})


CRITERIA = {
    1: shifted_ho_exactness,
    2: shifted_ho_projections,
    3: davies_constant,
    4: cubic_constant,
    5: eigenvalue_asymptotics,
    6: ray_angle,
    7: gauge_exactness,
    8: f_prime_asymptotics,
    9: scalar_pfd,
    10: half_order_closed_form,
    11: operator_identities,
    12: pseudomode_certificates,
    13: resolvent_consistency,
    14: invariant_suites,
}


def run(number: int, elapsed_before: float = 0.0) -> CriterionResult:
    if number not in CRITERIA:
        raise KeyError(f"no criterion {number}")
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number](elapsed_before) if number == 14 else CRITERIA[number]()
    except Exception as exc:  # a crash is a failure with its reason attached
        res = CriterionResult(number, CRITERIA[number].__name__.replace("_", " "), False,
                              f"raised {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(numbers=None, echo=None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else list(numbers)
    out = []
    start = time.perf_counter()
    for k in numbers:
        r = run(k, time.perf_counter() - start)
        out.append(r)
        if echo is not None:
            echo(format_line(r))
    return out
