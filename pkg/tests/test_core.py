import math

import numpy as np
import pytest
from mpmath import findroot, mp, mpf

from stochsirs import ModelParams, NoiseIntensities, State, equilibria
from stochsirs.core import BASELINE_INITIAL, diffusion, drift


def _mp_r0(p):
    with mp.workdps(40):
        lam, beta, mu, gamma, alpha = (mpf(repr(v)) for v in (p.lam, p.beta, p.mu, p.gamma, p.alpha))
        return beta * lam / (mu * (alpha + mu + gamma))


def test_r0_baseline(low, high):
    assert low.r0 == pytest.approx(0.89375, rel=1e-12)
    assert high.r0 == pytest.approx(13.75, rel=1e-12)
    assert abs(low.r0 - float(_mp_r0(low))) <= 1e-12 * 0.89375


def test_dfe_is_a_zero_of_the_drift(low, high):
    for p in (low, high):
        eq = equilibria(p)
        assert eq.dfe == State(p.lam / p.mu, 0.0, 0.0)
        assert np.all(np.abs(drift(eq.dfe, p)) < 1e-12)


def test_ee_absent_below_threshold(low):
    assert equilibria(low).ee is None


def test_ee_at_r0_exactly_one_is_absent():
    p = ModelParams(lam=1.0, beta=1.0, eta=0.1, mu=0.5, gamma=1.0, alpha=0.5)
    assert p.r0 == 1.0
    assert equilibria(p).ee is None


def test_ee_matches_extended_precision_root(high):
    ee = equilibria(high).ee
    with mp.workdps(40):
        lam, beta, eta, mu, gamma, alpha = (mpf(repr(v)) for v in high.as_tuple())

        def f(x, y, z):
            return [lam + eta * z - beta * x * y - mu * x,
                    beta * x * y - (alpha + mu + gamma) * y,
                    gamma * y - (eta + mu) * z]

        root = findroot(f, (4, 15, 20))
    assert (ee.x, ee.y, ee.z) == pytest.approx([float(v) for v in root], rel=1e-13)
    # frozen oracle values
    assert ee.x == pytest.approx(4.0, rel=1e-14)
    assert ee.y == pytest.approx(15.091836734693878, rel=1e-13)
    assert ee.z == pytest.approx(20.816326530612245, rel=1e-13)
    assert np.all(np.abs(drift(ee, high)) < 1e-10)


def test_ee_formula_without_lambda_is_not_an_equilibrium(high):
    # Dropping Λ from Z* gives (4.0, 45.73.., 63.08..), which does not
    # annihilate the drift; the implemented point does.
    wrong = State(4.0, 45.73283858998145, 63.07977736549165)
    assert abs(drift(wrong, high)[0]) > 0.1
    ee = equilibria(high).ee
    assert wrong.z == pytest.approx(ee.z / high.lam, rel=1e-12)


def test_diffusion_sigma4_column_cancels_in_total():
    g = diffusion(State(3.0, 2.0, 1.0), NoiseIntensities(0.1, 0.2, 0.3, 0.4))
    assert g[0, 3] == -g[1, 3] == -0.4 * 6.0
    assert g[2, 3] == 0.0
    assert g.shape == (3, 4)
    assert np.count_nonzero(g[:, :3] - np.diag(np.diag(g[:, :3]))) == 0


@pytest.mark.parametrize("field", ["lam", "beta", "eta", "mu", "gamma", "alpha"])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_model_params_reject_nonpositive(field, bad):
    kw = dict(lam=0.33, beta=0.013, eta=0.023, mu=0.05, gamma=0.04, alpha=0.006)
    kw[field] = bad
    with pytest.raises(ValueError, match=field):
        ModelParams(**kw)


def test_noise_rejects_negative():
    with pytest.raises(ValueError, match="sigma3"):
        NoiseIntensities(0, 0, -0.1, 0)
    assert NoiseIntensities().is_zero
    assert NoiseIntensities(0.1, 0, 0, 0.2).scaled(2).as_tuple() == (0.2, 0, 0, 0.4)


def test_state_helpers():
    s = BASELINE_INITIAL
    assert s.total == 17.0 and s.admissible
    assert State.from_array(s.as_array()) == s
    assert not State(1.0, 0.0, 1.0).admissible
