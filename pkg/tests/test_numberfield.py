from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wandering_iem import ay
from wandering_iem.numberfield import (ALPHA, BETA, CubicNumber, char_poly, eigen_pair, matrix_from_json,
                                       matrix_to_json, poly_eval, poly_from_json, poly_mul, poly_to_json,
                                       root_of_unity_check, squarefree_decomposition)

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
cubic = st.builds(CubicNumber, small, small, small)
nonzero = cubic.filter(lambda x: not x.is_zero())

t = CubicNumber.t()


def test_t_cubed_reduces():
    assert t * (t * t) == CubicNumber(1, -1, -1)


def test_inverse_of_t():
    assert t.inv() == CubicNumber(1, 1, 1)
    assert t * CubicNumber(1, 1, 1) == CubicNumber(1)


def test_inverse_of_zero_rejected():
    with pytest.raises(ZeroDivisionError):
        CubicNumber(0).inv()


def test_embeddings_are_roots():
    for z in (t.embed_alpha(), t.embed_beta()):
        assert abs(z ** 3 + z ** 2 + z - 1) < 1e-14
    assert isinstance(t.embed_alpha(), float)
    assert abs(ALPHA + ALPHA ** 2 + ALPHA ** 3 - 1) < 1e-15


def test_alpha_times_beta_modulus_squared():
    assert abs(ALPHA * abs(BETA) ** 2 - 1) < 1e-12


@given(cubic)
def test_one_is_neutral(x):
    assert x * 1 == x
    assert x * CubicNumber(1) == x


@given(cubic, cubic)
def test_embedding_is_multiplicative(x, y):
    lhs = (x * y).embed_beta()
    rhs = x.embed_beta() * y.embed_beta()
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(cubic, cubic, cubic)
def test_ring_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x - x == CubicNumber(0)


@given(nonzero)
def test_inverse(x):
    assert x * x.inv() == CubicNumber(1)
    assert 1 / x == x.inv()


@given(cubic)
def test_json_round_trip(x):
    assert CubicNumber.from_json(x.to_json()) == x


def test_char_poly_small_cases():
    assert char_poly(np.eye(2, dtype=int)) == [1, -2, 1]  # (t - 1)^2, lowest degree first
    assert char_poly(np.array([[1, 1], [1, 0]])) == [-1, -1, 1]


@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.integers(-4, 4), min_size=n * n, max_size=n * n)))
def test_char_poly_against_numpy(entries):
    n = int(round(len(entries) ** 0.5))
    M = np.array(entries).reshape(n, n)
    expected = np.round(np.poly(M)[::-1]).astype(int).tolist()
    assert char_poly(M) == expected


def test_char_poly_of_ay_matrix():
    p = char_poly(ay.M_AY)
    assert p == [-1, 0, 1, 5, 1, -1, -5, -1, 0, 1]
    assert p == ay.char_poly_expected()
    for z in (ALPHA, BETA, 1 / ALPHA):
        assert abs(poly_eval([float(c) for c in p], z)) < 1e-10


def test_squarefree_decomposition_of_square():
    p = poly_mul([-1, 1], [-1, 1])  # (t - 1)^2
    dec = squarefree_decomposition(p)
    assert set(dec) == {2}
    assert [float(c) for c in dec[2]] in ([-1.0, 1.0], [1.0, -1.0])


def test_eigen_pair_beta():
    ep = eigen_pair(ay.M_AY, -0.77 + 1.11j)
    assert abs(ep.eigenvalue - BETA) < 1e-12
    assert ep.multiplicity == 1
    g = np.array([ay.GAMMA[a] for a in ay.LETTERS])
    v = ep.eigenvector
    scale = v[0] / g[0]
    assert np.abs(v - scale * g).max() < 1e-10
    assert ep.residual(ay.M_AY) <= 1e-10 * np.abs(v).max()


def power_iteration(M, steps=400):
    v = np.ones(len(M))
    for _ in range(steps):
        v = M @ v
        v /= np.linalg.norm(v)
    return v @ M @ v / (v @ v), v


def test_eigen_pair_perron():
    ep = eigen_pair(ay.M_AY, 1.84)
    lam, v = power_iteration(ay.M_AY.astype(float))
    assert abs(ep.eigenvalue - 1 / ALPHA) < 1e-12
    assert abs(ep.eigenvalue - lam) < 1e-9
    w = ep.eigenvector.real
    assert (w > 0).all()
    assert np.abs(w / np.linalg.norm(w) - v).max() < 1e-8


def test_eigen_pair_identity_multiplicity():
    ep = eigen_pair(np.eye(4, dtype=int), 1.0)
    assert ep.eigenvalue == 1
    assert ep.multiplicity == 4


def test_root_of_unity_check():
    assert root_of_unity_check(1j, 16) == 2
    assert root_of_unity_check(-1.5, 4) == 1
    assert root_of_unity_check(BETA, 360) is None
    with pytest.raises(ValueError):
        root_of_unity_check(0, 3)


def test_json_helpers():
    p = [3, -1, 0, 2]
    assert poly_from_json(poly_to_json(p)) == p
    M = np.array([[1, 2], [3, 4]])
    assert (matrix_from_json(matrix_to_json(M)) == M).all()
    assert all(isinstance(x, str) for x in __import__("json").loads(poly_to_json(p)))
