import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wandering_iem import ay
from wandering_iem import fractal as fr
from wandering_iem.estimators import FractalSupport, MinimalSequence, WanderingConjugacy


def test_params_and_clone():
    est = FractalSupport(letter="4", depth=9, theta=0.1)
    assert est.get_params() == {"letter": "4", "depth": 9, "theta": 0.1}
    c = clone(est).set_params(depth=7)
    assert c.depth == 7 and est.depth == 9
    assert WanderingConjugacy(N=100).get_params()["N"] == 100


@pytest.mark.parametrize("est", [FractalSupport(), MinimalSequence(), WanderingConjugacy()])
def test_not_fitted(est):
    with pytest.raises(NotFittedError):
        est.transform([0.5])


@pytest.mark.parametrize("est", [FractalSupport(letter="x"), FractalSupport(depth=0), MinimalSequence(radius=-1),
                                 MinimalSequence(rho=0), WanderingConjugacy(N=0), WanderingConjugacy(n_orbit=-1)])
def test_invalid_params(est):
    with pytest.raises(ValueError):
        est.fit()


def test_fractal_support():
    est = FractalSupport(depth=10).fit()
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    v = est.transform(th)
    sys = ay.system()
    assert np.allclose(v, [fr.v_min("1", 10, np.exp(1j * t), sys).value for t in th], atol=1e-12)
    pts = est.predict(th.reshape(-1, 1))
    assert pts.shape == (16, 2)
    assert np.allclose((np.exp(1j * th) * (pts[:, 0] + 1j * pts[:, 1])).real, v, atol=1e-12)
    with pytest.raises(ValueError):
        est.transform(np.zeros((3, 2)))


def test_minimal_sequence():
    est = MinimalSequence(radius=3000).fit()
    vals = est.transform([-100, 0, 100])
    assert vals[1] == 0 and (vals >= -1e-9).all()
    assert est.growth_["ok"]
    with pytest.raises(ValueError):
        est.transform([10**6])


def test_wandering_conjugacy():
    est = WanderingConjugacy(N=600, n_orbit=100).fit()
    assert set(est.slopes_) == set(ay.LETTERS)
    t = np.linspace(0, 0.99, 200)
    g = est.transform(t)
    assert (np.diff(g) >= 0).all() and 0 <= g.min() and g.max() <= 1
    assert (np.diff(est.inverse_transform(t)) >= 0).all()
    y = est.predict(t)
    assert ((0 <= y) & (y < 1 + 1e-12)).all()
    with pytest.raises(ValueError):
        est.transform([1.5])
