import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anharmonic import linalg

import oracles


def _sorted(values):
    return sorted(values, key=lambda z: (z.real, z.imag))


# {{{ eigen


def test_eig_diagonal():
    d = linalg.eig(np.diag([1, 2j, -3]))
    assert _sorted(d.values) == _sorted([1, 2j, -3])
    assert np.all(d.backward_residuals <= 1e-14)


def test_eig_jordan_like_2x2():
    d = linalg.eig([[0, 1], [0, 1]])
    order = np.argsort(d.values.real)
    vals = d.values[order]
    assert np.allclose(vals, [0, 1], atol=1e-15)
    right = d.right[:, order]
    # unit vectors are determined up to a phase
    assert abs(abs(np.vdot([1, 0], right[:, 0])) - 1) < 1e-14
    assert abs(abs(np.vdot(np.array([1, 1]) / np.sqrt(2), right[:, 1])) - 1) < 1e-14


def test_eig_companion():
    # w^2 - 3w + 2
    d = linalg.eig([[3, -2], [1, 0]])
    assert np.allclose(_sorted(d.values), [1, 2], atol=1e-14)


def test_eig_rejects_bad_input():
    with pytest.raises(linalg.LinalgError):
        linalg.eig(np.ones((2, 3)))
    with pytest.raises(linalg.LinalgError):
        linalg.eig([[1, np.nan], [0, 1]])


@given(st.integers(0, 2**31 - 1))
def test_eig_residual_and_normalisation(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    d = linalg.eig(A)
    nrm = np.linalg.norm(A)
    assert np.allclose(np.linalg.norm(d.right, axis=0), 1, atol=1e-14)
    assert np.allclose(np.linalg.norm(d.left, axis=0), 1, atol=1e-14)
    rr = np.linalg.norm(A @ d.right - d.right * d.values, axis=0)
    rl = np.linalg.norm(A.conj().T @ d.left - d.left * d.values.conj(), axis=0)
    assert np.all(rr <= d.backward_residuals * nrm * (1 + 1e-12))
    assert np.all(rl <= d.backward_residuals * nrm * (1 + 1e-12))
    assert np.all(d.backward_residuals < 1e-13)


@given(st.integers(0, 2**31 - 1))
def test_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    P = Q @ np.diag(rng.uniform(1, 3, 6))  # condition number at most 3
    B = P @ A @ np.linalg.inv(P)
    a = linalg.eig(A).values
    b = linalg.eig(B).values
    pairs = linalg.greedy_pairing(a, b)
    assert max(dist for _, _, dist in pairs) <= 1e-10 * np.abs(a).max()


# }}}

# {{{ singular values


def test_smallest_singular_examples():
    assert linalg.smallest_singular(np.eye(4)).value == pytest.approx(1, abs=1e-15)
    assert linalg.smallest_singular(np.diag([3, 1e-8])).value == pytest.approx(1e-8, rel=1e-12)
    A = np.array([[1.0, 10.0], [0.0, 1.0]])
    inv = np.array([[1.0, -10.0], [0.0, 1.0]])
    # largest singular value of the explicit inverse, from its 2x2 Gram matrix
    g = inv.T @ inv
    tr, det = np.trace(g), np.linalg.det(g)
    inv_norm = np.sqrt((tr + np.sqrt(tr * tr - 4 * det)) / 2)
    sv = linalg.smallest_singular(A)
    assert sv.value * inv_norm == pytest.approx(1, abs=1e-13)
    assert sv.relative_residual <= 1e-10


def test_smallest_singular_flags_singular():
    sv = linalg.smallest_singular([[1, 1], [1, 1]])
    assert sv.singular and sv.value == 0.0


@given(st.integers(0, 2**31 - 1))
def test_smallest_singular_times_inverse_norm(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)) + 4 * np.eye(5)
    assert linalg.smallest_singular(A).value * np.linalg.norm(np.linalg.inv(A), 2) == pytest.approx(1, abs=1e-10)


@given(st.integers(0, 2**31 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_normal_resolvent_is_inverse_distance(seed, z):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    lam = rng.uniform(-5, 5, 6) + 1j * rng.uniform(-5, 5, 6)
    A = Q @ np.diag(lam) @ Q.conj().T
    dist = np.abs(z - lam).min()
    if dist < 1e-3:
        return
    smin = linalg.smallest_singular(z * np.eye(6) - A).value
    assert (1 / smin) == pytest.approx(1 / dist, rel=1e-10)


# }}}

# {{{ compensated dot


def test_dot_unit():
    assert linalg.compensated_dot([1, 0, 0], [1, 0, 0]).value == 1


def test_dot_cancellation_matches_exact():
    rng = np.random.default_rng(7)
    n = 200
    big = rng.standard_normal(n) * 1e8
    x = np.concatenate([big, big, [1e-14 * n]]) + 0j
    y = np.concatenate([np.ones(n), -np.ones(n), [1.0]]) + 0j
    x = x + 1j * np.concatenate([big[::-1], -big[::-1], [3e-14]])
    exact = oracles.exact_dot(x, y)
    got = linalg.compensated_dot(x, y)
    assert abs(got.value.real - exact.real) <= 2 * np.spacing(abs(exact.real))
    assert abs(got.value.imag - exact.imag) <= 2 * np.spacing(abs(exact.imag))
    # the naive sum misses this by many orders of magnitude
    naive = np.sum(np.conj(y) * x)
    assert abs(naive - exact) > 1e3 * abs(got.value - exact)


@given(st.integers(0, 2**31 - 1))
def test_dot_random_matches_exact(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    y = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    got = linalg.compensated_dot(x, y)
    exact = oracles.exact_dot(x, y)
    assert abs(got.value - exact) <= got.error_bound + 1e-300


@given(st.integers(0, 2**31 - 1))
def test_self_dot_is_real_nonnegative(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    v = linalg.compensated_dot(x, x).value
    assert v.imag == 0 and v.real >= 0


def test_dot_length_mismatch():
    with pytest.raises(linalg.LinalgError):
        linalg.compensated_dot([1, 2], [1])


# }}}


def test_greedy_pairing_reorders():
    a = [1, 2 + 1j, 5]
    b = [5.001, 1.0001, 2 + 1j]
    pairs = linalg.greedy_pairing(a, b)
    assert [(i, j) for i, j, _ in pairs] == [(0, 1), (1, 2), (2, 0)]
