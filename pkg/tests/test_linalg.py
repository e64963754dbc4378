import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qbeh.errors import CapacityError, DimensionError, FormatError, NumericalError
from qbeh.linalg import (
    MM_HEADER,
    as_matrix,
    hadamard,
    is_stable,
    is_symmetric,
    kron,
    read_matrix_market,
    spectral_summary,
    unvectorize,
    vectorize,
    write_matrix_market,
)
from qbeh.systems import CircuitParams, build_transmission_line

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def mats(rows, cols):
    return arrays(np.float64, (rows, cols), elements=finite)


# -- brute-force oracles -------------------------------------------------------


def charpoly_faddeev_leverrier(a):
    """Coefficients c_0..c_n of det(lambda I - A) = sum c_k lambda^(n-k)."""
    n = a.shape[0]
    c = [1.0]
    mk = np.zeros_like(a)
    for k in range(1, n + 1):
        mk = a @ mk + c[-1] * np.eye(n)
        c.append(-np.trace(a @ mk) / k)
    return np.array(c)


def smallest_real_root(coeffs, lo, hi, grid=20001):
    xs = np.linspace(lo, hi, grid)
    ys = np.polyval(coeffs, xs)
    idx = np.nonzero(np.sign(ys[:-1]) != np.sign(ys[1:]))[0][0]
    a, b = xs[idx], xs[idx + 1]
    fa = np.polyval(coeffs, a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = np.polyval(coeffs, mid)
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def kron_by_enumeration(a, b):
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s))
    for i in range(p):
        for j in range(q):
            for k in range(r):
                for l in range(s):
                    out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


# -- hadamard ------------------------------------------------------------------


def test_hadamard_componentwise():
    got = hadamard([[1, 2], [3, 4]], [[5, 6], [7, 8]])
    np.testing.assert_array_equal(got, [[5, 12], [21, 32]])


@given(mats(3, 4))
def test_hadamard_identity_and_zero(a):
    np.testing.assert_array_equal(hadamard(a, np.ones_like(a)), a)
    np.testing.assert_array_equal(hadamard(a, np.zeros_like(a)), np.zeros_like(a))


def test_hadamard_shape_mismatch_names_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 2\).*\(2, 3\)"):
        hadamard(np.ones((2, 2)), np.ones((2, 3)))


# -- kron ----------------------------------------------------------------------


def test_kron_examples():
    b = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(kron(np.eye(1), b), b)
    np.testing.assert_array_equal(kron([[1, 0], [0, 2]], [[3]]), [[3, 0], [0, 6]])
    e1 = np.array([[1.0, 0.0], [0.0, 0.0]])
    e2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0
    np.testing.assert_array_equal(kron(e1, e2), expected)
    np.testing.assert_array_equal(kron_by_enumeration(e1, e2), expected)


@given(mats(2, 3), mats(3, 2))
def test_kron_matches_enumeration(a, b):
    np.testing.assert_array_equal(kron(a, b), kron_by_enumeration(a, b))


def test_kron_capacity():
    big = np.ones((1, 20000))
    with pytest.raises(CapacityError):
        kron(big, big)


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1))
def test_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, c = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    b, d = rng.standard_normal((3, 3)), rng.standard_normal((3, 3))
    lhs = kron(a, b) @ kron(c, d)
    np.testing.assert_allclose(lhs, kron(a @ c, b @ d), atol=1e-12)


# -- vectorize -----------------------------------------------------------------


def test_vectorize_column_stacking():
    np.testing.assert_array_equal(vectorize([[1, 2], [3, 4]]), [[1], [3], [2], [4]])


def test_vectorize_round_trip_and_column_fixed_point(rng):
    a = rng.standard_normal((3, 5))
    np.testing.assert_array_equal(unvectorize(vectorize(a), 3, 5), a)
    col = rng.standard_normal((4, 1))
    np.testing.assert_array_equal(vectorize(col), col)


def test_unvectorize_size_mismatch():
    with pytest.raises(DimensionError):
        unvectorize(np.ones((5, 1)), 2, 3)


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1))
def test_vec_of_triple_product(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((3, 4))
    x = rng.standard_normal((4, 2))
    b = rng.standard_normal((2, 5))
    np.testing.assert_allclose(vectorize(a @ x @ b), kron(b.T, a) @ vectorize(x), atol=1e-12)


# -- spectra -------------------------------------------------------------------


def test_spectral_summary_examples():
    s = spectral_summary(np.diag([-1.0, -2.0]))
    assert s.spectral_abscissa == -1.0 and s.spectral_radius == 2.0
    assert s.min_symmetric_eigenvalue == -2.0
    r = spectral_summary([[0.0, 1.0], [-1.0, 0.0]])
    assert r.spectral_abscissa == pytest.approx(0.0, abs=1e-15)
    assert r.spectral_radius == pytest.approx(1.0)
    assert r.min_symmetric_eigenvalue is None


@pytest.mark.parametrize("seed", range(5))
def test_min_symmetric_eigenvalue_matches_charpoly_roots(seed):
    rng = np.random.default_rng(seed)
    s = rng.standard_normal((6, 6))
    s = s + s.T
    bound = np.abs(s).sum(axis=1).max() + 1.0  # Gershgorin
    expected = smallest_real_root(charpoly_faddeev_leverrier(s), -bound, bound)
    got = spectral_summary(s).min_symmetric_eigenvalue
    assert got == pytest.approx(expected, abs=1e-8)


def test_spectral_summary_rejects_non_square():
    with pytest.raises(DimensionError):
        spectral_summary(np.ones((2, 3)))


def test_is_stable_examples():
    assert is_stable(np.diag([-1.0, -2.0]), 0.0)
    assert not is_stable(np.diag([-1.0, -2.0]), 1.5)
    assert not is_stable([[0.0, 1.0], [-1.0, 0.0]], 0.0)


def test_is_stable_transmission_line_regression():
    # Frozen from an eigensolve: the lifted A is [[A1, A2], [a A1, a A2]], so it
    # has rank <= n and for n=5, a=0.5 also one eigenvalue with positive real part.
    a = build_transmission_line(CircuitParams(5, 0.5)).a_mat
    assert not is_stable(a, 0.0)
    assert spectral_summary(a).spectral_abscissa == pytest.approx(0.04449888050242706, rel=1e-9)
    assert np.linalg.matrix_rank(a) == 5


@pytest.mark.parametrize("n,a", [(3, 1.0), (3, 0.01), (4, 0.3), (6, 2.0)])
def test_is_stable_rejects_rank_deficient_circuit_a(n, a):
    assert not is_stable(build_transmission_line(CircuitParams(n, a)).a_mat)


def test_as_matrix_rejects_nan():
    with pytest.raises(NumericalError):
        as_matrix([[np.nan]])


def test_symmetry_tolerance():
    a = np.array([[1.0, 2.0], [2.0 + 1e-12, 1.0]])
    assert is_symmetric(a)
    a[1, 0] += 1e-6
    assert not is_symmetric(a)


# -- properties from the Hadamard algebra ------------------------------------


@settings(max_examples=100)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8))
def test_schur_product_theorem(seed, n):
    rng = np.random.default_rng(seed)
    r1, r2 = rng.standard_normal((n, n)), rng.standard_normal((n, n))
    prod = hadamard(r1 @ r1.T, r2 @ r2.T)
    assert spectral_summary(prod).min_symmetric_eigenvalue >= -1e-12


@settings(max_examples=100)
@given(st.integers(0, 2**31 - 1), st.integers(1, 32))
def test_rank_one_hadamard_identity(seed, n):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((n, 1)), rng.standard_normal((n, 1))
    lhs = (v * u) @ (v * u).T
    rhs = hadamard(v @ v.T, u @ u.T)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-14, atol=0)


# -- Matrix Market -------------------------------------------------------------


def test_matrix_market_round_trip_is_bitwise(tmp_path, rng):
    a = rng.standard_normal((3, 4)) * 10.0 ** rng.integers(-20, 20, (3, 4))
    write_matrix_market(tmp_path / "a.mtx", a)
    text = (tmp_path / "a.mtx").read_text().splitlines()
    assert text[0] == MM_HEADER and text[1] == "3 4"
    assert float(text[2]) == a[0, 0] and float(text[3]) == a[1, 0]  # column-major
    np.testing.assert_array_equal(read_matrix_market(tmp_path / "a.mtx"), a)


def test_matrix_market_errors_carry_line(tmp_path):
    p = tmp_path / "bad.mtx"
    p.write_text(f"{MM_HEADER}\n% c\n2 1\n1.0\noops\n")
    with pytest.raises(FormatError, match=r"bad\.mtx:5"):
        read_matrix_market(p)
    p.write_text("%%MatrixMarket matrix coordinate real general\n1 1 1\n")
    with pytest.raises(FormatError, match=r":1"):
        read_matrix_market(p)
    with pytest.raises(FormatError):
        read_matrix_market(tmp_path / "missing.mtx")
