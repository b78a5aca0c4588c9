import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvpm.algebra import (
    D_x,
    SquareParams,
    build_pm_square,
    context_by_label,
    context_product,
    exchange_phase,
    kappa_ideal,
)
from cvpm.fock import FockState, commutativity_test_exact
from cvpm.gaussian import GaussianState, expectation
from cvpm.noise import (
    NoiseModel,
    dephase,
    effective_visibility,
    event_fraction,
    fit_context_visibilities,
    fit_uniform_visibility,
    jittered_visibilities,
    miscalibrate,
)

from conftest import SQRT_HALF_PI

prob = st.floats(0, 1)


def test_dephase_examples():
    assert dephase(0.37, 1.0) == 0.37
    assert dephase(1.0, 0.9928) == pytest.approx(0.9964, abs=1e-15)
    assert 2 * dephase(1.0, 0.9928) - 1 == pytest.approx(0.9928, abs=1e-15)
    assert dephase(0.5, 0.3) == 0.5


@given(prob, prob)
def test_dephase_stays_in_unit_interval(p, v):
    assert 0 <= dephase(p, v) <= 1


@given(prob, prob, prob, prob)
def test_dephase_is_affine(p, q, v, t):
    mix = t * p + (1 - t) * q
    assert dephase(mix, v) == pytest.approx(t * dephase(p, v) + (1 - t) * dephase(q, v), abs=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(visibility_hadamard=1.2)
    with pytest.raises(ValueError):
        NoiseModel(g2=1.0)
    with pytest.raises(ValueError):
        NoiseModel(visibility_jitter_sd=-0.1)
    with pytest.raises(ValueError):
        dephase(0.5, 1.5)


def test_miscalibrate_identity(params):
    assert miscalibrate(params, NoiseModel()) == params


def test_miscalibrate_exchange_phase(params):
    p = miscalibrate(params, NoiseModel(calib_eps_p=0.01))
    assert p.product == pytest.approx(math.pi / 2 * 1.01, abs=1e-12)
    phase = exchange_phase(D_x(p.q0), D_x(1j * p.p0))
    assert phase == pytest.approx(np.exp(-1j * math.pi * 1.01), abs=1e-12)


def test_miscalibrated_row_on_vacuum(params):
    # net amplitude stays zero; only the phase moves off -1
    p = miscalibrate(params, NoiseModel(calib_eps_p=0.01))
    sq = build_pm_square(p)
    op = context_product(sq, context_by_label("Row 3"))
    value = expectation(GaussianState.vacuum(), op)
    assert abs(value.real) < 1
    assert value == pytest.approx(-0.9995065603657315 + 0.0314107590781275j, abs=1e-12)
    for label in ("Row 1", "Row 2"):
        assert context_product(sq, context_by_label(label)).phase == pytest.approx(-1)


def test_effective_visibility():
    assert effective_visibility(NoiseModel(visibility_hadamard=0.97)) == 0.97
    v = effective_visibility(NoiseModel(visibility_hadamard=0.9928, g2=0.0083))
    assert v == pytest.approx(0.98455976, abs=1e-8)
    assert 6 * effective_visibility(NoiseModel(g2=0.0083)) == pytest.approx(5.9502, abs=1e-4)
    assert event_fraction(NoiseModel(g2=0.0083)) == pytest.approx(0.9917)


@pytest.mark.parametrize("eps_q,eps_p", [(0.0, 0.01), (0.02, -0.01), (-0.03, 0.05)])
def test_miscalibrated_kappa_matches_fock(params, eps_q, eps_p):
    p = miscalibrate(params, NoiseModel(calib_eps_q=eps_q, calib_eps_p=eps_p))
    a, b = D_x(p.q0), D_x(1j * p.p0)
    closed = math.sin(math.pi / 2 * (1 + eps_q) * (1 + eps_p)) ** 2
    assert kappa_ideal(a, b) == pytest.approx(closed, abs=1e-12)
    assert commutativity_test_exact(FockState.vacuum(60), a, b) == pytest.approx(closed, abs=1e-6)


def test_jitter_truncated_to_unit_interval():
    v = jittered_visibilities(0.99, 0.05, 5000, np.random.default_rng(0))
    assert v.min() >= 0 and v.max() <= 1
    assert np.array_equal(jittered_visibilities(0.9, 0.0, 3, np.random.default_rng(0)), [0.9] * 3)


def test_visibility_fits():
    table = [-0.9928, -0.9929, -0.9881, 0.9912, 0.9916, 0.9831]
    ideal = [-1, -1, -1, 1, 1, 1]
    assert fit_context_visibilities(table, ideal) == pytest.approx([abs(x) for x in table])
    assert fit_uniform_visibility(table, ideal) == pytest.approx(sum(abs(x) for x in table) / 6)
    with pytest.raises(ValueError, match="incompatible"):
        fit_context_visibilities(table, ideal, g2=0.0083)
