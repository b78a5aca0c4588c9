import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvpm import fock
from cvpm.algebra import COLUMN_LABELS, DisplacementProduct, context_by_label, context_product, contexts
from cvpm.gaussian import (
    GaussianState,
    apply_displacement,
    characteristic,
    expectation,
    symplectic_form,
)

from conftest import SQRT_HALF_PI, random_amp

# exp(-q0^2 / 2) with q0 = sqrt(pi/2)
O11_VACUUM = 0.4559381277659963


def test_vacuum_at_origin():
    assert characteristic(GaussianState.vacuum(2), [0, 0]) == 1


def test_vacuum_single_mode():
    assert characteristic(GaussianState.vacuum(1), [1.0]) == pytest.approx(math.exp(-0.5), abs=1e-15)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False), st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_vacuum_closed_form(a, b):
    got = characteristic(GaussianState.vacuum(2), [a, b])
    assert got == pytest.approx(math.exp(-(abs(a) ** 2 + abs(b) ** 2) / 2), abs=1e-14)


def test_o11_on_vacuum(square):
    assert expectation(GaussianState.vacuum(), square[0, 0]) == pytest.approx(O11_VACUUM, abs=1e-15)
    assert O11_VACUUM == pytest.approx(math.exp(-math.pi / 4), abs=1e-15)


def test_row_two_on_vacuum(square):
    op = context_product(square, context_by_label("Row 2"))
    assert abs(expectation(GaussianState.vacuum(), op) + 1) < 1e-12


def test_column_two_on_thermal(square):
    op = context_product(square, context_by_label("Column 2"))
    assert abs(expectation(GaussianState.thermal([0.7, 1.3]), op) - 1) < 1e-12


def _random_states(n, seed=5):
    rng = np.random.default_rng(seed)
    return [GaussianState.random(rng) for _ in range(n)]


def test_normalization_and_hermiticity(rng):
    for state in _random_states(20):
        assert characteristic(state, [0, 0]) == pytest.approx(1.0, abs=1e-15)
        amps = np.array([random_amp(rng), random_amp(rng)])
        c = characteristic(state, amps)
        assert abs(c) <= 1 + 1e-12
        assert characteristic(state, -amps) == pytest.approx(np.conj(c), abs=1e-14)


def test_state_independence_of_context_products(square):
    for state in _random_states(10):
        for ctx in contexts():
            value = expectation(state, context_product(square, ctx))
            assert abs(value - (-1 if ctx.is_row else 1)) < 1e-12


def test_apply_displacement():
    state = GaussianState.random(np.random.default_rng(3))
    same = apply_displacement(state, [0, 0])
    assert np.array_equal(same.mean, state.mean) and np.array_equal(same.cov, state.cov)
    shifted = apply_displacement(GaussianState.vacuum(2), [0.4 + 0.3j, -1.1j])
    assert characteristic(shifted, [0, 0]) == 1
    assert np.array_equal(shifted.cov, GaussianState.vacuum(2).cov)


def test_displaced_vacuum_matches_fock(rng):
    n = 60
    for _ in range(5):
        alpha = [random_amp(rng, 1.5), random_amp(rng, 1.5)]
        beta = [random_amp(rng), random_amp(rng)]
        g = characteristic(apply_displacement(GaussianState.vacuum(2), alpha), beta)
        f = fock.expectation_exact(
            fock.FockState.product(n, alphas=alpha), [DisplacementProduct(0.0, *beta)]
        )
        assert abs(g - f) < 1e-6


def test_backend_equivalence_100_pairs():
    # product states so the Fock image is exact; random squeezing, phase, thermal noise
    rng = np.random.default_rng(2024)
    n = 60
    for _ in range(100):
        alphas = (random_amp(rng, 1.0), random_amp(rng, 1.0))
        rs = tuple(rng.uniform(0, 0.5, 2))
        phis = tuple(rng.uniform(0, 2 * np.pi, 2))
        nbars = tuple(rng.uniform(0, 0.3, 2)) if rng.uniform() < 0.3 else (0.0, 0.0)
        op = DisplacementProduct(rng.uniform(-np.pi, np.pi), random_amp(rng), random_amp(rng))
        g = expectation(GaussianState.product(alphas, rs, phis, nbars), op)
        f = fock.expectation_exact(fock.FockState.product(n, alphas, rs, phis, nbars), [op])
        assert abs(g - f) < 1e-6, (alphas, rs, phis, nbars, op)


def test_uncertainty_violation_rejected():
    with pytest.raises(ValueError, match="uncertainty"):
        GaussianState(np.zeros(2), 0.1 * np.eye(2))


def test_asymmetric_cov_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        GaussianState(np.zeros(2), np.array([[1.0, 0.2], [0.0, 1.0]]))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        GaussianState(np.zeros(3), np.eye(3))
    with pytest.raises(ValueError):
        characteristic(GaussianState.vacuum(2), [1.0])
    with pytest.raises(ValueError):
        apply_displacement(GaussianState.vacuum(2), [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        expectation(GaussianState.vacuum(3), DisplacementProduct(0.0, 1.0, 0.0))


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_random_states_are_physical(seed):
    state = GaussianState.random(np.random.default_rng(seed))
    eig = np.linalg.eigvalsh(state.cov + 0.5j * symplectic_form(2))
    assert eig.min() > -1e-9


def test_states_are_immutable():
    state = GaussianState.vacuum()
    with pytest.raises(ValueError):
        state.mean[0] = 1.0
