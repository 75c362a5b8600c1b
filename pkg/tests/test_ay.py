import random

import numpy as np
import pytest

from wandering_iem import ay
from wandering_iem import fractal as fr
from wandering_iem.iem import itinerary
from wandering_iem.numberfield import ALPHA, BETA, CubicNumber

b, HALF = ay.b, ay.HALF


def test_constants():
    a = CubicNumber.t()
    assert a + a * a + a * a * a == CubicNumber(1)
    assert abs(ALPHA + ALPHA ** 2 + ALPHA ** 3 - 1) < 1e-15
    assert ay.SIGMA["1"] == "35" and ay.SIGMA["9"] == "3" and ay.SIGMA["7"] == "29"


def test_eigen_report():
    rep = ay.eigen_report()
    assert rep.ok()
    assert rep.matches_factorization and rep.eigenvector_exact and rep.beta_simple
    assert rep.beta_error < 5e-6


def test_gamma_coordinates():
    expected = {"1": b * b + b + 1, "2": -b, "3": -b, "4": -b * b - b - 1, "5": b + 1, "6": b + 1,
                "7": -b * b - b - 2, "8": CubicNumber(-1), "9": CubicNumber(-1)}
    assert ay.GAMMA_EXACT == expected


def test_partition_lengths():
    lam = ay.perron_lengths()
    assert lam.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(ay.M_AY.T @ lam, lam / ALPHA, atol=1e-13)
    P = ay.ay_partition()
    got = {a: P.interval(a)[1] - P.interval(a)[0] for a in ay.LETTERS}
    assert all(abs(got[a] - lam[i]) < 1e-12 for i, a in enumerate(ay.LETTERS))


def test_partition_search_is_unique():
    assert len(ay.search_partitions()) == 1


def test_partition_breaks():
    expected = [0, .19149, .27184, .41964, .54369, .69149, .77184, .83929, .91964, 1]
    assert np.allclose(ay.ay_partition().breaks, expected, atol=1e-5)


def test_return_matrix_is_transpose():
    rep = ay.self_similarity(500)
    assert (rep.R == ay.M_AY.T).all()


def test_continuity_intervals():
    T = ay.ay_iem()
    assert len(T.alphabet) == 7
    assert np.allclose(T.top.breaks, ay.continuity_breaks())


def test_trib_values():
    assert ay.trib_value([0] * 10) == 0
    assert abs(ay.trib_value([1] + [0] * 8) - BETA ** -3) < 1e-15
    with pytest.raises(ValueError):
        ay.trib_value([1, 1, 1, 0])


def test_trib_shift_identity():
    rng = random.Random(7)
    for _ in range(100):
        d = []
        while len(d) < 30:
            x = rng.randint(0, 1)
            if x and d[-2:] == [1, 1]:
                x = 0
            d.append(x)
        v = ay.trib_value(d)
        assert abs(ay.trib_value(d[1:]) - ay.trib_shift(d, v)) <= 1e-12


def test_trib_cloud_matches_words():
    words = ay.trib_words(8)
    assert all("111" not in "".join(map(str, w)) for w in words)
    vals = np.sort_complex(np.array([ay.trib_value(w) for w in words]))
    assert np.allclose(np.sort_complex(ay.trib_cloud(8)), vals, atol=1e-14)


def test_kappa_ends():
    assert ay.kappa_fixed_exact(0) == ay.Z0_EXACT
    assert ay.Z0_EXACT == (-b * b - 2 * b - 3) * HALF
    assert ay.K_END_EXACT == (-b * b - 2 * b - 1) * HALF
    assert abs(ay.kappa(0.0) - ay.Z0) < 1e-12
    assert abs(ay.kappa(1.0) - ay.Z0 - ay.K_END) < 1e-12


def test_kappa_is_continuous_along_parameter():
    ts = np.linspace(0, 1, 301)
    z = np.array([ay.kappa(t, 30) for t in ts])
    assert np.abs(np.diff(z)).max() < 0.1


def test_k_symmetry_and_decomposition():
    assert ay.k_symmetry_residual(8) <= 1e-8
    assert ay.k_decomposition_residual(8) <= 1e-8


@pytest.mark.parametrize("a,count", [("1", 6), ("8", 4), ("2", 4), ("4", 6), ("5", 4), ("7", 6)])
def test_boundary_curve_segments(a, count):
    c = ay.boundary_curve(a)
    assert c.n_segments == count
    assert c.closed and c.joints_ok


def test_boundary_identifications():
    for x, y in ay.EQUALITIES:
        assert np.array_equal(ay.boundary_curve(x).polyline, ay.boundary_curve(y).polyline)


def test_boundary_curve_hugs_fractal():
    sys = ay.system()
    pts = fr.cloud("1", 16, sys).points
    curve = ay.boundary_curve("1", 6).polyline
    assert fr.set_distance(curve, pts) < 0.05
    # every curve point is close to the cloud
    assert max(np.abs(pts - z).min() for z in curve[::25]) < 0.05


def test_ifs_suite():
    rep = ay.verify_ifs(12)
    assert rep.ok, rep.to_dict()
    assert rep.lagged_residuals["8"] <= 1e-12
    lo, hi = abs(BETA) ** -2 / 3, 3 * abs(BETA) ** -2
    assert all(lo <= q <= hi for q in rep.ratios.values())


def test_ifs_rejects_shallow_depth():
    with pytest.raises(ValueError):
        ay.verify_ifs(4)


EXPECTED_URP = {
    "1": [CubicNumber(-1), (-b * b - 2 * b - 3) * HALF],
    "2": [-b * b - 2 * b - 2, b * b + b + 2],
    "3": [-b * b - 2 * b - 2, b * b + b + 2],
    "4": [b * b + 2 * b + 2, -b * b - b - 1],
    "5": [b * b + 2 * b + 2, (3 * b * b + 6 * b + 7) * HALF],
    "6": [b * b + 2 * b + 2, (3 * b * b + 6 * b + 7) * HALF],
    "7": [CubicNumber(-1), (b * b + 2 * b + 1) * HALF],
}


def test_urp_values_exact():
    rows = ay.verify_urp_witnesses(10, certify=False)
    assert len(rows) == 14
    for r in rows:
        assert r.path.check(ay.SIGMA)
        assert r.value == EXPECTED_URP[r.case][r.witness - 1]
        assert r.exact_match


@pytest.mark.slow
def test_urp_membership_certificates():
    rows = ay.verify_urp_witnesses(10, certify=True)
    for r in rows:
        assert len(r.certificates) == 2 and all(r.certificates.values()), (r.case, r.witness)


def test_membership_certificate_negative():
    far = CubicNumber(50)
    cert = ay.membership_certificate(far, "1", ("", "3", "5"))
    assert not cert.found


def test_boundary_lemmas():
    rep = ay.verify_boundary_lemmas(12, 8)
    assert rep.ok, rep.to_dict()
    assert rep.rauzy2["clusters"] == 1
    assert all(v > 1e-3 for v in rep.separations.values())


def test_rauzy3_intersection_concentrates_at_zero():
    radii = []
    for kd in (5, 6, 7, 8):
        r3 = ay.verify_boundary_lemmas(12, kd).rauzy3
        assert all(float(v["nearest_to_zero"]) < 1e-12 for v in r3.values())
        radii.append(max(float(v["close_radius"]) for v in r3.values()))
    assert all(y < x for x, y in zip(radii, radii[1:]))


def test_k_in_tribonacci_intersection():
    rep = ay.verify_boundary_lemmas(14, 8)
    assert rep.K_in_R < 1e-2


def test_coding_of_random_points_refines():
    T, P = ay.ay_iem(), ay.ay_partition()
    for t in np.random.default_rng(11).random(100):
        w, _ = itinerary(T, float(t), 0, 12, P)
        x = ((float(t) - ay.ROTATION) % 1.0) * ALPHA
        v, _ = itinerary(T, x, 0, len(ay.SIGMA.apply(w)), P)
        assert v == ay.SIGMA.apply(w)
