import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anharmonic import discretize as dz
from anharmonic.discretize import BasisSpec
from anharmonic.model import OscillatorSpec

HO = OscillatorSpec.self_adjoint_power(2.0)
QUARTIC = OscillatorSpec.polynomial(2, (0.0, 0.0, 1.0))


def test_basis_spec_validation():
    for kwargs in (dict(size=3), dict(size=8, scaling=0), dict(size=8, assembly="Sinc"), dict(size=7.5)):
        with pytest.raises(dz.DiscretizationError):
            BasisSpec(**kwargs)
    assert BasisSpec(10).quad_order == 52


def test_harmonic_oscillator_is_diagonal():
    A = dz.assemble(HO, BasisSpec(40))
    # kinetic and x^2 off-diagonals cancel up to rounding
    assert np.allclose(A, np.diag(2 * np.arange(40) + 1.0), rtol=0, atol=1e-13)
    assert np.array_equal(np.diag(A), 2 * np.arange(40) + 1.0)


@pytest.mark.parametrize("ell", [1.0, 0.5, 2.3])
def test_position_matrix_entries(ell):
    X = dz.position_matrix(12, ell)
    k = np.arange(11)
    assert np.allclose(np.diag(X, 1), ell * np.sqrt((k + 1) / 2), rtol=0, atol=1e-15)
    assert np.array_equal(X, X.T)
    assert np.count_nonzero(X) == 22


def test_galerkin_derivative_squares_to_kinetic():
    n = 20
    D = dz.derivative_matrix(n + 1, n, 0.7)
    K = -(dz.derivative_matrix(n, n + 1, 0.7) @ D)
    assert np.allclose(K, dz.kinetic_matrix(n, 0.7), atol=1e-13)


def test_hermite_functions_orthonormal():
    x, w = np.polynomial.hermite.hermgauss(80)
    H = dz.hermite_functions(x, 30) * np.exp(x**2 / 2)
    G = (H * w) @ H.T
    assert np.allclose(G, np.eye(30), atol=1e-12)


def test_ladder_rejects_non_polynomial():
    with pytest.raises(dz.DiscretizationError):
        dz.assemble(OscillatorSpec.even_imaginary(2.5), BasisSpec(16))


# {{{ scaling


def test_choose_scaling_examples():
    assert dz.choose_scaling(OscillatorSpec.polynomial(1, (0, 1)), 256) == 1.0
    assert dz.choose_scaling(QUARTIC, 256) == pytest.approx(256 ** (-1 / 6))
    assert dz.choose_scaling(QUARTIC, 256) == pytest.approx(0.397, abs=5e-4)
    assert dz.choose_scaling(QUARTIC, 256, override=0.77) == 0.77


def test_chosen_scaling_improves_convergence():
    base = BasisSpec(96, 1.0)
    tuned = BasisSpec(96, dz.choose_scaling(QUARTIC, 96))
    plain = dz.convergence_check(QUARTIC, base, 24)
    better = dz.convergence_check(QUARTIC, tuned, 24)
    assert better.trusted_count >= plain.trusted_count
    assert np.sum(better.gaps) < np.sum(plain.gaps)


@given(st.floats(0.3, 2.0), st.lists(st.floats(-2, 2), min_size=3, max_size=5))
@settings(max_examples=20)
def test_scaling_absorbed_into_coefficients(ell, coeffs):
    # -d2/dx2 + V(x) at dilation ell equals ell^-2 (-d2/dy2 + ell^2 V(ell y)) at dilation 1
    n = 24
    c = np.array(coeffs, dtype=complex)
    lhs = dz.kinetic_matrix(n, ell) + dz._polynomial_matrix(c, n, ell)
    scaled = c * ell ** (np.arange(len(c)) + 2)
    rhs = (dz.kinetic_matrix(n, 1.0) + dz._polynomial_matrix(scaled, n, 1.0)) / ell**2
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(lhs).max())


def test_spectrum_independent_of_scaling():
    a = dz.sorted_eigenvalues(QUARTIC, BasisSpec(160, 0.5))[:15]
    b = dz.sorted_eigenvalues(QUARTIC, BasisSpec(160, 0.7))[:15]
    assert np.allclose(a, b, rtol=1e-9)


# }}}

# {{{ convergence


@pytest.mark.parametrize("size, m", [(64, 16), (80, 20)])
def test_harmonic_oscillator_all_trusted(size, m):
    # m = 20 at N_b = 64 would break the m <= N_b/4 precondition
    rep = dz.convergence_check(HO, BasisSpec(size), m)
    assert rep.trusted_count == m
    assert np.allclose(rep.values.real, 2 * np.arange(m) + 1)


def test_quartic_trusted_count():
    basis = BasisSpec(200, dz.choose_scaling(QUARTIC, 200))
    rep = dz.convergence_check(QUARTIC, basis, 40)
    assert rep.trusted_count >= 30
    d = rep.to_dict()
    assert d["trusted_count"] == rep.trusted_count and len(d["modes"]) == 40


def test_convergence_count_precondition():
    with pytest.raises(dz.DiscretizationError):
        dz.convergence_check(HO, BasisSpec(64), 17)
    with pytest.raises(dz.DiscretizationError):
        dz.convergence_check(HO, BasisSpec(64), 0)


# }}}

# {{{ structure


def test_real_even_potential_is_hermitian():
    for s, basis in ((OscillatorSpec.self_adjoint_power(4.0), BasisSpec(60)),
                     (OscillatorSpec.self_adjoint_power(3.0), BasisSpec(60, assembly="Quadrature"))):
        A = dz.assemble(s, basis)
        assert np.abs(A - A.conj().T).max() <= 1e-13 * np.abs(A).max()
        assert np.abs(np.linalg.eigvals(A).imag).max() <= 1e-9 * np.abs(A).max()


def test_pt_symmetric_trusted_eigenvalues_are_real():
    spec = OscillatorSpec.polynomial(2, (0.0, 1.0, 0.0, 1.0))
    basis = BasisSpec(160, dz.choose_scaling(spec, 160))
    rep = dz.convergence_check(spec, basis, 40)
    assert rep.trusted_count >= 20
    v = rep.values[rep.trusted]
    assert np.all(np.abs(v.imag) <= 1e-6 * (1 + np.abs(v)))


@pytest.mark.parametrize("spec, assembly", [
    (QUARTIC, "Ladder"),
    (OscillatorSpec.polynomial(1, (0.0, 1.0)), "Ladder"),
    (OscillatorSpec.polynomial(3, (0.0, -1.0, 0.0, 2.0), re_coeffs=(0.0, 0.0, 1.0)), "Ladder"),
    (OscillatorSpec.even_imaginary(2.5), "Quadrature"),
    (OscillatorSpec.conjugated(2.0, 0.5), "Quadrature"),
])
def test_numerical_range_in_right_half_plane(spec, assembly):
    n = 80
    basis = BasisSpec(n, dz.choose_scaling(spec, n), assembly)
    A = dz.assemble(spec, basis)
    H = (A + A.conj().T) / 2
    lo = np.linalg.eigvalsh(H).min()
    rng = np.random.default_rng(11)
    V = rng.standard_normal((n, 50)) + 1j * rng.standard_normal((n, 50))
    V /= np.linalg.norm(V, axis=0)
    sampled = np.real(np.einsum("ij,ij->j", V.conj(), A @ V)).min()
    scale = np.linalg.norm(A, 2)
    assert sampled >= -1e-8 * scale
    # with Re V >= 0 the whole numerical range is accretive; the conjugated form is only similar to such
    if spec.family != "Conjugated":
        assert lo >= -1e-8 * scale


def test_ladder_and_quadrature_agree():
    spec = OscillatorSpec.polynomial(2, (0.5, 0.0, 1.0), re_coeffs=(0.0, 1.0))
    ell = dz.choose_scaling(spec, 60)
    A = dz.assemble(spec, BasisSpec(60, ell, "Ladder"))
    B = dz.assemble(spec, BasisSpec(60, ell, "Quadrature"))
    assert np.abs(A - B).max() <= 1e-10 * np.abs(A).max()


def test_conjugated_spectrum_is_real():
    spec = OscillatorSpec.conjugated(2.0, 0.5)
    rep = dz.convergence_check(spec, BasisSpec(160, assembly="Quadrature"), 30)
    assert rep.trusted_count >= 15
    v = rep.values[rep.trusted]
    assert np.all(np.abs(v.imag) <= 1e-6 * (1 + np.abs(v)))
    # conjugation does not move the spectrum of the |x|^2 oscillator
    assert np.allclose(np.sort(v.real), 2 * np.arange(len(v)) + 1, rtol=1e-7)


def test_assembled_matrix_is_read_only():
    A = dz.assemble(HO, BasisSpec(8))
    with pytest.raises(ValueError):
        A[0, 0] = 5


# }}}
