import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wandering_iem import ay
from wandering_iem.iem import (AffineIem, BoundaryHitError, Iem, Partition, evaluate, first_return, itinerary,
                               self_similarity_check)
from wandering_iem.numberfield import ALPHA

ROT = Iem([0.7, 0.3], "ab", "ba")
GOLD = (5 ** 0.5 - 1) / 2


def test_rotation_values():
    assert ROT.delta("a") == pytest.approx(0.3) and ROT.delta("b") == pytest.approx(-0.7)
    assert evaluate(ROT, 0.1) == pytest.approx(0.4, abs=1e-15)
    assert ROT(0.0) == ROT.delta("a")


def test_evaluate_rejects_outside_domain():
    for t in (-0.1, 1.0, 2.0):
        with pytest.raises(ValueError):
            ROT.evaluate(t)


def test_itinerary_by_hand():
    assert itinerary(ROT, 0.1, 0, 3) == ("aab", 0)
    assert itinerary(ROT, 0.0, 0, 1)[0] == ROT.pi0[0]
    word, origin = itinerary(ROT, 0.1, 2, 3)
    # backward: 0.1 -> 0.8 (b) -> 0.5 (a)
    assert (word, origin) == ("abaab", 2)


def test_itinerary_flags_boundary_hits():
    with pytest.raises(BoundaryHitError) as e:
        itinerary(ROT, 0.4, 0, 5, strict=True)
    assert e.value.m == 1


def test_ay_map_at_zero():
    assert ay.ay_map(0.0) == pytest.approx((1 + ALPHA) / 2, abs=1e-15)
    assert ay.ay_iem().evaluate(0.0) == pytest.approx((1 + ALPHA) / 2, abs=1e-14)


def test_half_exchange_by_hand():
    assert ay.half_exchange(0.0, 1.0, 0.25) == 0.75
    assert ay.half_exchange(0.0, 1.0, 0.75) == 0.25
    assert ay.half_exchange(0.2, 0.4, 0.5) == 0.5


def test_ay_iem_matches_composition():
    T = ay.ay_iem()
    ts = np.random.default_rng(1).random(2000)
    assert max(abs(T.evaluate(float(t)) - ay.ay_map(float(t))) for t in ts) < 1e-13


@pytest.mark.parametrize("T", [ROT, Iem([0.2, 0.5, 0.3], "abc", "cab"), ay.ay_iem()], ids=["rot", "three", "ay"])
def test_bijective_on_grid(T):
    x = (np.arange(10_000) + 0.5) / 10_000 * T.length
    y = np.sort(T.evaluate_many(x))
    assert len(np.unique(y)) == len(y)
    assert y[0] >= 0 and y[-1] < T.length
    # images of the pieces tile [0, L)
    lo = sorted((T.top.interval(a)[0] + T.delta(a), T.lengths[a]) for a in T.alphabet)
    edge = 0.0
    for start, length in lo:
        assert abs(start - edge) < 1e-12
        edge = start + length
    assert abs(edge - T.length) < 1e-12


def test_lengths_preserved():
    T = ay.ay_iem()
    for a in T.alphabet:
        assert T.bottom.interval(a)[1] - T.bottom.interval(a)[0] == pytest.approx(T.lengths[a], abs=1e-15)


def test_inverse():
    T = ay.ay_iem()
    Ti = T.inverse()
    for t in np.random.default_rng(2).random(500):
        assert Ti.evaluate(T.evaluate(float(t))) == pytest.approx(float(t), abs=1e-13)


def test_first_return_full_cut():
    T = Iem([0.2, 0.5, 0.3], "abc", "cab")
    fr = first_return(T, 1.0)
    assert (fr.R == np.eye(3, dtype=int)).all()
    assert sorted(fr.return_words) == ["a", "b", "c"]
    for t in np.linspace(0, 0.99, 50):
        assert fr.induced.evaluate(t) == pytest.approx(T.evaluate(t))


def test_first_return_rotation_matches_simulation():
    T = Iem([0.7, 0.3], "ab", "ba")
    fr = first_return(T, 0.7)
    for x in np.random.default_rng(3).random(300) * 0.7:
        y = T.evaluate(float(x))
        while y >= 0.7:
            y = T.evaluate(y)
        assert fr.induced.evaluate(float(x)) == pytest.approx(y, abs=1e-12)


def test_golden_rotation_is_self_similar():
    T = Iem([GOLD, 1 - GOLD], "ab", "ba")
    rep = self_similarity_check(T, GOLD ** 2)
    assert rep.is_scaled_copy and rep.max_residual <= 1e-9
    assert rep.R.shape == (2, 2) and rep.abelianization_matches


def test_generic_rotation_is_not_self_similar():
    lam = float(np.random.default_rng(4).uniform(0.2, 0.8))
    rep = self_similarity_check(Iem([lam, 1 - lam], "ab", "ba"), 0.5)
    assert not rep.is_scaled_copy
    assert rep.failing_sample is not None


def test_ay_self_similarity():
    rep = ay.self_similarity()
    assert rep.is_scaled_copy and rep.max_residual <= 1e-9
    assert rep.substitution == ay.SIGMA
    assert rep.abelianization_matches


def test_coding_commutes_with_substitution():
    T, P = ay.ay_iem(), ay.ay_partition()
    rng = np.random.default_rng(5)
    for t in rng.random(100):
        t = float(t)
        w, _ = itinerary(T, t, 0, 30, P)
        x = ((t - ay.ROTATION) % 1.0) * ALPHA
        v, _ = itinerary(T, x, 0, 30, P)
        assert ay.SIGMA.apply(w)[:30] == v


def test_depth_one_cross_check():
    T, P = ay.ay_iem(), ay.ay_partition()
    w, _ = itinerary(T, 0.01, 0, 20, P)
    x = ((0.01 - ay.ROTATION) % 1.0) * ALPHA
    inner, _ = itinerary(T, x, 0, 20, P)
    assert inner.startswith(ay.SIGMA.apply(w[:5]))


def test_iem_json_round_trip():
    T = ay.ay_iem()
    d = json.loads(T.to_json())
    assert set(d) == {"alphabet", "lambda", "pi0", "pi1"}
    assert all(isinstance(x, str) for x in d["lambda"])
    U = Iem.from_json(T.to_json())
    assert U.lengths == T.lengths and U.pi0 == T.pi0 and U.pi1 == T.pi1


def test_iem_validation():
    with pytest.raises(ValueError):
        Iem([0.5, -0.5], "ab", "ba")
    with pytest.raises(ValueError):
        Iem([0.5, 0.5], "ab", "bc")


def test_affine_iem_validation_and_evaluation():
    f = AffineIem([0, 0.5, 1], [0.5, 1.5], [0.75, -0.75])
    # [0, .5) -> [.75, 1), [.5, 1) -> [0, .75)
    assert f.evaluate(0.0) == 0.75 and f.evaluate(0.5) == 0.0
    assert f.inverse_evaluate(0.75) == pytest.approx(0.0)
    assert AffineIem.from_json(f.to_json()).evaluate(0.9) == f.evaluate(0.9)
    with pytest.raises(ValueError):
        AffineIem([0, 0.5, 1], [1.0, -1.0], [0.5, 1.0])
    with pytest.raises(ValueError):
        AffineIem([0, 0.5, 1], [1.0, 1.0], [0.6, -0.5])


@given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6), st.randoms(use_true_random=False))
def test_random_iem_tiles(lengths, rnd):
    letters = "abcdef"[: len(lengths)]
    perm = list(letters)
    rnd.shuffle(perm)
    T = Iem(lengths, letters, perm)
    x = (np.arange(500) + 0.5) / 500 * T.length
    y = T.evaluate_many(x)
    assert (y >= 0).all() and (y < T.length + 1e-12).all()
    assert len(np.unique(np.round(y, 12))) == len(y)


def test_partition_lookup():
    P = Partition.from_lengths("xyz", [0.2, 0.3, 0.5])
    assert P.letter_of(0.0) == "x" and P.letter_of(0.2) == "y" and P.letter_of(0.99) == "z"
