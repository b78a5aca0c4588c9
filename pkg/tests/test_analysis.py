import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvpm.algebra import COLUMN_LABELS, D_x, DisplacementProduct, ROW_LABELS
from cvpm.analysis import (
    NC_BOUND,
    KappaReport,
    corrected_bound,
    delta_exact,
    delta_matrix,
    disturbance_bound,
    evaluate_L,
    inequality_report,
    kappa_matrix,
    kappa_threshold,
    propagate_sd,
    significance,
)
from cvpm.fock import CutoffError, FockState

from conftest import SQRT_HALF_PI, random_amp

# measured counts: (N+, N-) per context, rows then columns
HADAMARD_COUNTS = [(405, 112087), (347, 98031), (340, 56842),
                   (76384, 337), (88341, 369), (89648, 763)]
HADAMARD_VALUES = [-0.9928, -0.9929, -0.9881, 0.9912, 0.9916, 0.9831]
PAIR_COUNTS = [
    (28286, 392), (28257, 416), (28151, 396), (23132, 388), (23050, 381), (23512, 376),
    (20207, 358), (18552, 420), (19623, 351), (24101, 403), (22990, 366), (23579, 375),
    (18703, 334), (24007, 504), (24136, 489), (28390, 420), (15687, 361), (15188, 361),
]
PAIR_KAPPA = [0.0137, 0.0145, 0.0139, 0.0165, 0.0163, 0.0157, 0.0174, 0.0222, 0.0176,
                  0.0164, 0.0157, 0.0157, 0.0175, 0.0206, 0.0199, 0.0146, 0.0225, 0.0232]
LABELS = ROW_LABELS + COLUMN_LABELS


def _as_map(values):
    return dict(zip(LABELS, values))


def test_ideal_L():
    assert evaluate_L(_as_map([-1, -1, -1, 1, 1, 1])) == 6
    assert evaluate_L(_as_map([0] * 6)) == 0


def test_measured_hadamard_values():
    assert evaluate_L(_as_map(HADAMARD_VALUES)) == pytest.approx(5.9398, abs=2e-4)
    from_counts = [(a - b) / (a + b) for a, b in HADAMARD_COUNTS]
    assert from_counts == pytest.approx(HADAMARD_VALUES, abs=1e-4)
    assert evaluate_L(_as_map(from_counts)) == pytest.approx(5.9398, abs=1e-4)


def test_imaginary_parts_ignored():
    values = [-1 + 0.3j, -1, -1 - 0.2j, 1, 1 + 0.5j, 1]
    assert evaluate_L(_as_map(values)) == 6


def test_missing_context():
    m = _as_map([-1] * 6)
    del m["Column 2"]
    with pytest.raises(ValueError, match="missing context: Column 2"):
        evaluate_L(m)


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_L_invariant_under_group_permutations(values):
    base = evaluate_L(_as_map(values))
    for rp in itertools.permutations(values[:3]):
        for cp in itertools.permutations(values[3:]):
            assert evaluate_L(_as_map(list(rp) + list(cp))) == pytest.approx(base, abs=1e-12)


@given(st.floats(0, 1))
def test_uniform_visibility_gives_6V(v):
    assert evaluate_L(_as_map([-v] * 3 + [v] * 3)) == pytest.approx(6 * v, abs=1e-12)


def test_nc_bound():
    assert NC_BOUND == 3 * math.sqrt(3)
    assert NC_BOUND == pytest.approx(5.196152422706632, abs=1e-15)


def test_significance():
    assert significance(5.9398, 0.0019) == pytest.approx(391.3, abs=0.5)
    assert significance(5.9398, 0.0019) >= 350
    assert significance(NC_BOUND, 0.01) == 0
    assert significance(5.0, 0.01) < 0
    assert significance(6.0, 0.0) == math.inf
    assert significance(5.0, 0.0) == -math.inf


def test_propagate_sd():
    sds = [0.0005, 0.0003, 0.0006, 0.0007, 0.0008, 0.0013]
    assert propagate_sd(sds) == pytest.approx(0.0019, abs=1e-4)


def test_disturbance_bound():
    assert disturbance_bound(0.0) == 0
    assert disturbance_bound(0.02) == pytest.approx(0.2828, abs=1e-4)
    assert disturbance_bound(1.0) == 2
    with pytest.raises(ValueError):
        disturbance_bound(1.5)


def test_measured_pair_kappa():
    ks = [n_minus / (n_plus + n_minus) for n_plus, n_minus in PAIR_COUNTS]
    assert ks == pytest.approx(PAIR_KAPPA, abs=2e-4)
    assert np.mean(ks) == pytest.approx(0.0174, abs=1e-4)
    assert np.std(ks, ddof=1) == pytest.approx(0.0030, abs=1e-4)
    assert max(ks) < 0.0233


def test_corrected_bound():
    assert corrected_bound(KappaReport.uniform(0.0)) == NC_BOUND
    b = corrected_bound(KappaReport.uniform(0.0174))
    assert b == pytest.approx(NC_BOUND + 36 * math.sqrt(0.0174), abs=1e-12)
    assert b == pytest.approx(9.94, abs=0.01) and b > 6


def test_kappa_threshold():
    t = kappa_threshold(6.0, 3)
    assert t == pytest.approx(((6 - NC_BOUND) / 36) ** 2, rel=1e-12)
    assert t == pytest.approx(4.986e-4, abs=1e-6)
    assert corrected_bound(KappaReport.uniform(t)) == pytest.approx(6.0, abs=1e-12)
    assert kappa_threshold(6.0, 2) > t


@given(st.lists(st.floats(0, 0.5), min_size=18, max_size=18), st.integers(0, 17), st.floats(0, 0.5))
def test_corrected_bound_monotone(ks, i, bump):
    rep = KappaReport.uniform(0.0)
    for p, k in zip(rep.pairs, ks):
        p["kappa"] = k
    before = corrected_bound(rep)
    rep.pairs[i]["kappa"] = min(1.0, ks[i] + bump)
    assert corrected_bound(rep) >= before - 1e-12


def test_inequality_report_flags():
    per = [{"label": lab, "expectation": 0.85 * s, "sd": 0.001}
           for lab, s in zip(LABELS, [-1] * 3 + [1] * 3)]
    rep = inequality_report(per)
    assert rep.L == pytest.approx(5.1) and not rep.violation and rep.significance < 0


# --- disturbance ----------------------------------------------------------------

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.diag([1.0, -1.0]).astype(complex)


def test_qubit_example():
    b = SIGMA3
    a = math.sqrt(0.99) * SIGMA3 + 0.1 * SIGMA1
    plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
    rho = np.outer(plus, plus.conj())
    kappa = kappa_matrix(a, b, rho).real
    # |[A,B]|^2 = 0.04 * identity, so the commutativity test reads 0.01
    assert kappa == pytest.approx(0.01, abs=1e-12)
    before = np.trace(rho @ b).real
    after = np.trace(a @ rho @ a.conj().T @ b).real
    shift = abs(after - before)
    assert shift == pytest.approx(0.199, abs=1e-3)  # "almost 0.2"
    assert abs(delta_matrix(a, b, rho)) == pytest.approx(shift, abs=1e-12)
    assert shift <= disturbance_bound(kappa) + 1e-12
    assert shift <= disturbance_bound(0.02)


def test_delta_commuting_pair(square):
    rec = delta_exact(FockState.vacuum(60), square[0, 0], square[0, 1])
    assert abs(rec.delta) < 1e-10 and rec.kappa == pytest.approx(0, abs=1e-10) and rec.holds


def test_delta_anticommuting_pair():
    rec = delta_exact(FockState.vacuum(60), D_x(SQRT_HALF_PI), D_x(1j * SQRT_HALF_PI))
    assert rec.kappa == pytest.approx(1.0, abs=1e-6)
    assert abs(rec.delta) <= 2 * math.sqrt(rec.kappa) + 1e-8
    # D_y(0) pair of anticommuting displacements moves <B> by 2 <B>
    assert abs(rec.delta) == pytest.approx(2 * math.exp(-math.pi / 4), abs=1e-8)
    assert rec.kappa_rho_prime is not None


def test_delta_random_sweep():
    rng = np.random.default_rng(77)
    for _ in range(20):
        state = FockState.product(
            60, alphas=(random_amp(rng, 0.8), random_amp(rng, 0.8)),
            rs=tuple(rng.uniform(0, 0.3, 2)), phis=tuple(rng.uniform(0, 6.28, 2)),
        )
        a = DisplacementProduct(rng.uniform(-3, 3), random_amp(rng, 1.2), random_amp(rng, 1.2))
        b = DisplacementProduct(rng.uniform(-3, 3), random_amp(rng, 1.2), random_amp(rng, 1.2))
        rec = delta_exact(state, a, b)
        assert rec.holds, rec


def test_delta_guard():
    with pytest.raises(CutoffError):
        delta_exact(FockState.product(10, alphas=(2.0, 0)), D_x(1.0), D_x(1j))
