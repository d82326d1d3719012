import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tende.sde import (_time_table, chi_t, default_schedule, g2_t,
                       gaussian_ref_score, gaussian_tail_kl, k_t,
                       make_schedule, perturb, sample_time_importance,
                       sample_times, v_t)

# hand integral for the default schedule: int_0^1 beta = 0.1 + 19.9/2
B_FULL = 10.05


def test_identity_at_zero():
    sched = default_schedule()
    assert k_t(sched, 0.0) == 1.0
    assert v_t(sched, 0.0) == 0.0


def test_linear_schedule_closed_form():
    sched = make_schedule(0.1, 20.0, 1.0)
    assert k_t(sched, 1.0) ** 2 == pytest.approx(math.exp(-B_FULL), rel=1e-12)
    assert v_t(sched, 1.0) == pytest.approx(1.0 - math.exp(-B_FULL), rel=1e-12)


def test_constant_rate_closed_form():
    sched = make_schedule(1.0, 1.0, 1.0)
    t = np.linspace(0.0, 1.0, 11)
    assert np.allclose(k_t(sched, t), np.exp(-t / 2.0), rtol=1e-12)
    assert v_t(sched, 0.5) == pytest.approx(1.0 - math.exp(-0.5), rel=1e-12)


@pytest.mark.parametrize("bad", [(-0.1, 20, 1), (0, 20, 1), (0.1, 0.05, 1),
                                 (0.1, 20, 0), (0.1, 20, -2)])
def test_invalid_schedule_parameters(bad):
    with pytest.raises(ValueError):
        make_schedule(*bad)


def test_rate_endpoints_and_range_checks():
    sched = default_schedule()
    assert g2_t(sched, 0.0) == pytest.approx(0.1)
    assert g2_t(sched, 1.0) == pytest.approx(20.0)
    for fn in (k_t, v_t, g2_t):
        with pytest.raises(ValueError):
            fn(sched, -0.01)
        with pytest.raises(ValueError):
            fn(sched, 1.01)


def test_chi_examples():
    sched = default_schedule()
    t = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(chi_t(sched, t, 1.0) - 1.0)) <= 1e-12
    assert chi_t(sched, 0.0, 2.0) == pytest.approx(4.0, rel=1e-12)
    expected = 4.0 * math.exp(-B_FULL) + 1.0 - math.exp(-B_FULL)
    assert chi_t(sched, 1.0, 2.0) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        chi_t(sched, 0.5, 0.0)


@given(st.floats(min_value=0.0, max_value=1.0))
def test_vp_identity(t):
    sched = default_schedule()
    assert abs(k_t(sched, t) ** 2 + v_t(sched, t) - 1.0) <= 1e-12


def test_perturb_is_identity_at_zero():
    rng = np.random.default_rng(0)
    x0 = rng.normal(size=(4, 3))
    out = perturb(default_schedule(), x0, 0.0, rng.normal(size=(4, 3)))
    assert np.array_equal(out, x0)


def test_perturb_endpoint_is_mostly_noise():
    sched = default_schedule()
    rng = np.random.default_rng(1)
    x0 = rng.normal(size=(200, 1))
    noise = rng.normal(size=(200, 1))
    out = perturb(sched, x0, 1.0, noise)
    k_end = math.exp(-B_FULL / 2.0)  # ~6.6e-3
    bound = k_end * np.abs(x0) + (1.0 - math.sqrt(1.0 - math.exp(-B_FULL))) * np.abs(noise)
    assert np.all(np.abs(out - noise) <= bound + 1e-12)


def test_perturb_hand_arithmetic():
    # constant rate: k(t) = exp(-t/2) = 0.8 at t = -2 log 0.8, so v = 0.36
    sched = make_schedule(1.0, 1.0, 1.0)
    t = -2.0 * math.log(0.8)
    out = perturb(sched, np.array([2.0]), t, np.array([0.5]))
    assert out[0] == pytest.approx(0.8 * 2.0 + 0.6 * 0.5, rel=1e-12)


def test_perturb_shape_mismatch():
    with pytest.raises(ValueError):
        perturb(default_schedule(), np.zeros(3), 0.5, np.zeros(4))


def test_perturb_variance_matches_kernel():
    sched = default_schedule()
    rng = np.random.default_rng(7)
    n = 100000
    for t in (0.1, 0.5):
        out = perturb(sched, np.zeros((n, 1)), t, rng.normal(size=(n, 1)))
        v = float(v_t(sched, t))
        se = v * math.sqrt(2.0 / (n - 1))
        assert abs(out.var() - v) <= 3.0 * se


def test_gaussian_ref_score():
    assert np.array_equal(gaussian_ref_score(np.zeros(5), 2.0), np.zeros(5))
    assert np.allclose(gaussian_ref_score(np.array([1.0, -2.0]), 1.0), [-1.0, 2.0])
    assert np.allclose(gaussian_ref_score(np.array([3.0]), 1.5), [-2.0])
    with pytest.raises(ValueError):
        gaussian_ref_score(np.ones(2), 0.0)


def test_gaussian_tail_kl_values():
    assert gaussian_tail_kl(7, 1.0) == 0.0
    assert gaussian_tail_kl(2, math.e) == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert gaussian_tail_kl(4, 2.0) == pytest.approx(2.0 * (math.log(2.0) - 0.5),
                                                     rel=1e-12)


@given(st.floats(min_value=0.01, max_value=100.0))
def test_gaussian_tail_kl_nonnegative(chi):
    val = gaussian_tail_kl(3, chi)
    assert val >= 0.0
    if abs(chi - 1.0) > 1e-6:
        assert val > 0.0


def test_time_sampler_unbiased_for_constants():
    # the realized piecewise density makes sum(p_j * w_j) the exact span
    sched = make_schedule(1.0, 1.0, 1.0)
    grid, cdf, seg_w = _time_table(sched)
    total = float(np.sum(np.diff(cdf) * seg_w))
    assert total == pytest.approx(sched.t_horizon - sched.t_min, abs=1e-3)


def test_time_sampler_weight_statistics():
    sched = default_schedule()
    rng = np.random.default_rng(3)
    t, w = sample_times(sched, rng, 100000)
    assert np.all(w > 0) and np.all(np.isfinite(w))
    assert np.all((t >= sched.t_min) & (t <= sched.t_horizon))
    span = sched.t_horizon - sched.t_min
    assert abs(w.mean() - span) <= 0.01 * span
    # nontrivial integrand: E[w t^2] = int t^2 dt over [t_min, T]
    vals = w * t * t
    target = (sched.t_horizon ** 3 - sched.t_min ** 3) / 3.0
    assert abs(vals.mean() - target) <= 4.0 * vals.std() / math.sqrt(len(vals))


def test_time_sampler_scalar_api():
    sched = default_schedule()
    t, w = sample_time_importance(sched, np.random.default_rng(0))
    assert sched.t_min <= t <= sched.t_horizon
    assert w > 0.0 and math.isfinite(w)
