import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarair.errors import ConfigurationError
from polarair.spreading import SpreadingDictionaries, energy_detect, matched_filter


def small(seed=3, budget=None, L=20, J=16, n_c=4, N=1024):
    kw = {} if budget is None else {"memory_budget": budget}
    return SpreadingDictionaries(n_c, L, J, N, seed, **kw)


def test_regeneration_is_bit_identical():
    a, b = small(), small()
    assert all(np.array_equal(a.section(i), b.section(i)) for i in range(a.n_c))
    assert not np.array_equal(small(seed=4).section(0), a.section(0))


def test_on_demand_columns_match_materialized():
    dense = small()
    lazy = small(budget=0)
    assert dense.materialized and not lazy.materialized
    for i in range(dense.n_c):
        assert np.array_equal(dense.section(i), lazy.section(i))
        for j in (0, 5, 15):
            assert np.array_equal(lazy.column(i, j), dense.section(i)[:, j])
    assert np.array_equal(lazy.columns_for(7), dense.columns_for(7))


def test_long_columns_on_demand():
    # L > 256 spans several counter blocks per column
    dense = SpreadingDictionaries(2, 600, 8, 8192, 11)
    lazy = SpreadingDictionaries(2, 600, 8, 8192, 11, memory_budget=0)
    assert np.array_equal(lazy.column(1, 6), dense.section(1)[:, 6])


def test_entry_magnitude_is_exact():
    d = SpreadingDictionaries(2, 64, 32, 8192, 0)
    assert np.all(np.abs(d.section(1)) == 1.0 / np.sqrt(8192))


def test_sign_balance():
    L, J = 400, 1024
    d = SpreadingDictionaries(1, L, J, 8192, 99)
    frac = np.mean(d.section(0) > 0)
    sigma = 0.5 / np.sqrt(L * J)
    assert abs(frac - 0.5) <= 5 * sigma


def test_zero_dimension_rejected():
    with pytest.raises(ConfigurationError):
        SpreadingDictionaries(0, 4, 4, 16, 0)


def test_matched_filter_single_column():
    d = small()
    b = np.array([1.0, -1.0, -1.0, 1.0])
    g = 2.5
    y = np.stack([d.column(i, 9) * b[i] * g for i in range(d.n_c)])
    Z = matched_filter(y, d)
    np.testing.assert_allclose(Z[:, 9], b * g * d.L / d.N, rtol=1e-12)


def test_matched_filter_zero_and_two_columns(rng):
    d = small()
    assert np.all(matched_filter(np.zeros(d.n_c * d.L), d) == 0)
    b1, b2 = rng.choice([-1.0, 1.0], d.n_c), rng.choice([-1.0, 1.0], d.n_c)
    y = np.stack([b1[i] * 1.5 * d.column(i, 2) + b2[i] * -0.7 * d.column(i, 11)
                  for i in range(d.n_c)])
    Z = matched_filter(y, d)
    for i in range(d.n_c):
        for j in range(d.J):
            assert Z[i, j] == pytest.approx(float(d.column(i, j) @ y[i]), abs=1e-14)
        expected = b1[i] * 1.5 * d.L / d.N + b2[i] * -0.7 * float(d.column(i, 2) @ d.column(i, 11))
        assert Z[i, 2] == pytest.approx(expected, abs=1e-14)


def test_matched_filter_lazy_equals_dense(rng):
    y = rng.normal(size=4 * 20)
    np.testing.assert_allclose(matched_filter(y, small(budget=0)), matched_filter(y, small()),
                               rtol=1e-12, atol=1e-15)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_matched_filter_linearity(alpha, beta, seed):
    d = small()
    r = np.random.default_rng(seed)
    y1, y2 = r.normal(size=(2, d.n_c * d.L))
    lhs = matched_filter(alpha * y1 + beta * y2, d)
    rhs = alpha * matched_filter(y1, d) + beta * matched_filter(y2, d)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_matched_filter_shape_mismatch():
    with pytest.raises(ValueError):
        matched_filter(np.zeros(7), small())


def test_energy_detect_examples():
    Z = np.array([[3.0, 1.0], [-3.0, 1.0]])
    assert energy_detect(Z, 1) == [0]
    assert energy_detect(np.zeros((2, 2)), 1) == [0]
    assert energy_detect(Z, 1, exclude={0}) == [1]
    with pytest.raises(ValueError):
        energy_detect(Z, 2, exclude={0})
    with pytest.raises(ValueError):
        energy_detect(Z, 0)


@given(st.integers(0, 2**31), st.integers(1, 8))
def test_energy_detect_permutation_equivariant(seed, count):
    r = np.random.default_rng(seed)
    Z = r.normal(size=(3, 8))
    perm = r.permutation(8)
    picked = energy_detect(Z[:, perm], count)
    assert [int(perm[j]) for j in picked] == energy_detect(Z, count)
