import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anharmonic import gauge
from anharmonic.gauge import GaugeSpec

import oracles

CUBIC = GaugeSpec(1.0, 1.0 / 3.0)
HALF = GaugeSpec(1.0, 0.5)


# {{{ specs and zeros


@pytest.mark.parametrize("nu, rho, k, expected", [(1, 0.5, 4, 16), (2, 0.5, 2, 1), (1, 1 / 3, 2, 8)])
def test_zero_examples(nu, rho, k, expected):
    assert gauge.zero(GaugeSpec(nu, rho), k) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kwargs", [dict(nu=0, rho=0.3), dict(nu=1, rho=1.0), dict(nu=1, rho=0.0),
                                    dict(nu=1, rho=0.3, tail_tolerance=1.0), dict(nu=1, rho=0.3, max_terms=0)])
def test_spec_rejects_bad_parameters(kwargs):
    with pytest.raises(gauge.GaugeError):
        GaugeSpec(**kwargs)


@given(st.floats(0.1, 10), st.floats(0.05, 0.95))
def test_zeros_strictly_increasing(nu, rho):
    a = GaugeSpec(nu, rho).zeros(50)
    assert np.all(a > 0) and np.all(np.diff(a) > 0)


# }}}

# {{{ products


def test_F_at_origin_is_one():
    assert gauge.eval_F(CUBIC, 0).value == 1


def test_F_half_order_matches_sinh():
    assert gauge.eval_F(HALF, 1.0).value.real == pytest.approx(oracles.SINH_PI_OVER_PI, rel=1e-14)


@pytest.mark.parametrize("w", list(oracles.CUBIC_GAUGE))
def test_F_cubic_matches_gamma_closed_form(w):
    got = gauge.eval_F(CUBIC, w).value
    assert abs(got - oracles.CUBIC_GAUGE[w]) <= 1e-13 * abs(oracles.CUBIC_GAUGE[w])


@given(st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False))
def test_F_cubic_matches_oracle_property(w):
    ref = oracles.cubic_gauge(w)
    assert abs(gauge.eval_F(CUBIC, w).value - ref) <= 1e-11 * max(1.0, abs(ref))


@given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False))
def test_F_half_order_property(w):
    ref = oracles.half_gauge(w)
    assert abs(gauge.eval_F(HALF, w).value - ref) <= 1e-11 * max(1.0, abs(ref))


def test_F_vanishes_at_zeros():
    for g in (CUBIC, HALF, GaugeSpec(2.0, 0.4)):
        for k in (1, 2, 7):
            assert gauge.eval_F(g, -gauge.zero(g, k)).is_zero


def test_truncate_and_zeta_methods_agree():
    g = GaugeSpec(1.0, 1.0 / 3.0, tail_tolerance=1e-10)
    for w in (1.0, 3 - 2j, 20j):
        a = gauge.eval_F(g, w, "truncate")
        b = gauge.eval_F(g, w, "zeta")
        assert abs(a.value - b.value) <= 1e-9 * abs(b.value)
        assert a.tail_bound <= 1e-10


def test_truncation_failure_reports_bound():
    g = GaugeSpec(1.0, 1.0 / 3.0, tail_tolerance=1e-12, max_terms=1000)
    with pytest.raises(gauge.TruncationError) as exc:
        gauge.eval_F(g, 5.0, "truncate")
    assert exc.value.bound > 1e-12 and exc.value.terms == 1000


def test_large_argument_does_not_overflow():
    v = gauge.eval_F(GaugeSpec(1.0, 0.9), 1e6)
    assert math.isfinite(v.log_abs) and v.log_abs > 1e5


@given(st.floats(0.2, 5), st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False))
def test_rescaling_law(nu, w):
    # F_nu(w) = F_1(nu^{1/rho} w)
    rho = 1 / 3
    lhs = gauge.eval_F(GaugeSpec(nu, rho), w).value
    rhs = gauge.eval_F(GaugeSpec(1.0, rho), nu**3 * w).value
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(rhs))


@given(st.floats(0.01, 200), st.sampled_from([0.2, 1 / 3, 0.45, 0.5]))
def test_real_axis_sandwich(x, rho):
    # e^{-1/rho}/(1+x) <= F(x) exp(-pi x^rho / sin(pi rho)) <= exp(-(1/rho) x/(1+x))
    g = GaugeSpec(1.0, rho)
    val = gauge.eval_F(g, x).log_abs - math.pi * x**rho / math.sin(math.pi * rho)
    assert -1 / rho - math.log1p(x) - 1e-12 <= val <= -(1 / rho) * x / (1 + x) + 1e-12


@given(st.floats(0.1, 1.0))
def test_conjugate_symmetry(scale):
    w = scale * (3 + 4j)
    assert abs(gauge.eval_F(CUBIC, w.conjugate()).value - gauge.eval_F(CUBIC, w).value.conjugate()) < 1e-13 * abs(
        gauge.eval_F(CUBIC, w).value)


# }}}

# {{{ asymptote


def test_log_asymptote_examples():
    assert gauge.log_asymptote(HALF, 1.0, 0.0) == pytest.approx(math.pi)
    r = 1e4
    ratio = gauge.eval_F(HALF, r).log_abs / gauge.log_asymptote(HALF, r, 0.0)
    assert 0.97 <= ratio <= 1.03
    for theta in (math.pi, -math.pi, 4.0):
        with pytest.raises(gauge.GaugeError):
            gauge.log_asymptote(HALF, 1.0, theta)


# }}}

# {{{ zero-deleted products and derivatives


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
def test_a_product_half(n):
    assert gauge.a_product(n, 2.0) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("n", list(oracles.A_CUBIC))
def test_a_product_cubic_oracle(n):
    assert gauge.a_product(n, 3.0) == pytest.approx(oracles.A_CUBIC[n], rel=1e-13)


def test_a_product_quartic_against_long_product():
    k = np.arange(2, 1_000_001, dtype=float)
    brute = float(np.prod(1.0 - k**-4.0))
    got = gauge.a_product(1, 4.0)
    assert got == pytest.approx(brute, abs=1e-8)
    assert got == pytest.approx(oracles.A_ONE_FOUR, rel=1e-14)


@given(st.integers(1, 30), st.floats(1.2, 6.0))
def test_a_product_paired_matches_raw(n, b):
    assert gauge.a_product(n, b) == pytest.approx(gauge.a_product_raw(n, b), rel=1e-9)


@given(st.integers(1, 25), st.floats(1.1, 8.0).filter(lambda b: abs(b - 2) > 0.05))
def test_a_product_bounds(n, b):
    a = gauge.a_product(n, b)
    ref = (b / 2) ** n / b
    assert a > 0
    if b > 2:
        assert a > ref
    else:
        assert a < ref


@pytest.mark.parametrize("n", list(oracles.CUBIC_DERIVATIVE))
def test_f_prime_cubic_oracle(n):
    assert gauge.f_prime_at_zero(CUBIC, n) == pytest.approx(oracles.CUBIC_DERIVATIVE[n], rel=1e-12)


def test_f_prime_half_order_values():
    # F(w) = sinh(pi sqrt w)/(pi sqrt w) has F'(-n^2) = (-1)^{n-1} / (2 n^2)
    for n in range(1, 8):
        assert gauge.f_prime_at_zero(HALF, n) == pytest.approx((-1) ** (n - 1) / (2 * n * n), rel=1e-13)


def test_f_prime_sign_alternates():
    for g in (CUBIC, GaugeSpec(1.5, 0.3)):
        for n in range(1, 51):
            assert math.copysign(1, gauge.f_prime_at_zero(g, n)) == (-1) ** (n - 1)


@given(st.integers(1, 30))
def test_pfd_coefficient_is_reciprocal(n):
    assert gauge.pfd_coefficient(CUBIC, n) * gauge.f_prime_at_zero(CUBIC, n) == pytest.approx(1.0, rel=1e-13)


# }}}

# {{{ partial fractions


def test_pfd_at_origin():
    rep = gauge.pfd_eval(CUBIC, 0)
    assert rep.value_direct == 1 and rep.residual <= 1e-14


def test_pfd_example_point():
    rep = gauge.pfd_eval(CUBIC, 2 + 1j)
    assert rep.residual <= 1e-8
    assert rep.residual == abs(rep.value_direct - rep.value_series)
    assert rep.terms_used <= CUBIC.max_terms


def test_pfd_rejects_half_order_and_poles():
    with pytest.raises(gauge.UnsupportedRegimeError):
        gauge.pfd_eval(HALF, 1.0)
    with pytest.raises(gauge.PoleProximityError):
        gauge.pfd_eval(CUBIC, -8.0 + 1e-9)


def test_pfd_residual_decays_geometrically():
    rho = 1 / 3
    w = 1.5 + 0.5j
    terms = np.arange(3, 16)
    res = np.array([gauge.pfd_eval(CUBIC, w, int(t)).residual for t in terms])
    assert np.all(np.diff(res) <= 0)
    slope = np.polyfit(terms, np.log(res), 1)[0]
    assert slope <= -math.pi / math.tan(math.pi * rho) / 2


@given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False))
def test_pfd_property(w):
    try:
        rep = gauge.pfd_eval(CUBIC, w)
    except gauge.PoleProximityError:
        return
    assert rep.residual <= 1e-8 * max(1.0, abs(rep.value_direct))


@pytest.mark.parametrize("w", [0, 1.0, 4.0, 9.0, 2 + 3j])
def test_half_pfd_closed_form(w):
    rep = gauge.pfd_half_eval(HALF, w)
    assert abs(rep.value_series - 1 / oracles.half_gauge(w)) <= 1e-10


def test_half_pfd_pairing_beats_plain_partial_sums():
    for w in (1.0, 4.0, 9.0, 2 + 5j):
        for terms in (40, 400, 2000):
            rep = gauge.pfd_half_eval(HALF, w, terms=terms)
            assert rep.residual < rep.residual_unpaired
            bare = gauge.pfd_half_eval(HALF, w, terms=terms, tail=False)
            assert bare.residual <= bare.residual_unpaired * (1 + 1e-6)


def test_cauchy_kernel_examples():
    assert gauge.cauchy_kernel_pfd(CUBIC, 3, 1 + 1j) <= 1e-8
    assert gauge.cauchy_kernel_pfd(HALF, 5, 2) <= 1e-8
    with pytest.raises(gauge.GaugeError):
        gauge.cauchy_kernel_pfd(CUBIC, 2, 2)


def test_power_pfd_examples():
    assert gauge.power_pfd(CUBIC, 3, 1 + 1j, 1) == gauge.cauchy_kernel_pfd(CUBIC, 3, 1 + 1j)
    assert gauge.power_pfd(CUBIC, 2 + 1j, 1, 2) <= 1e-8
    assert gauge.power_pfd(HALF, 2, 1, 2) <= 1e-7


@given(st.floats(0.5, 5), st.floats(0.5, 5), st.sampled_from([-1.0, 1.0]), st.integers(1, 3))
def test_power_pfd_property(x, y, sign, p):
    z, w = complex(x, 1.0), complex(y, sign)
    if abs(z - w) < 1e-6:
        return
    assert gauge.power_pfd(CUBIC, z, w, p) <= 1e-8


# }}}
