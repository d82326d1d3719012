"""Fast built-in sanity checks, runnable as `tende selftest`.

Each check is a closed-form identity or an exactness property that holds
independent of training; failures indicate a broken build, not statistical
noise.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from ..baselines import (GaussianBlocks, _digamma_combination, digamma,
                         gaussian_cmi)
from ..neural import (adam_init, adam_step, finite_difference_check, forward,
                      init_network, load_checkpoint, save_checkpoint)
from ..sde import (chi_t, default_schedule, gaussian_tail_kl, k_t,
                   sample_times, v_t)
from ..systems import (LinearGaussianParams, TimeSeriesPair, build_te_dataset,
                       te_linear_gaussian_truth)

__all__ = ["run_selftest"]


def _vp_identities() -> bool:
    sched = default_schedule()
    t = np.linspace(0.0, sched.t_horizon, 2001)
    ok = np.max(np.abs(k_t(sched, t) ** 2 + v_t(sched, t) - 1.0)) <= 1e-12
    ok &= np.max(np.abs(chi_t(sched, t, 1.0) - 1.0)) <= 1e-12
    return bool(ok and gaussian_tail_kl(3, 1.0) == 0.0)


def _sampler_weights() -> bool:
    sched = default_schedule()
    t, w = sample_times(sched, np.random.default_rng(0), 100000)
    span = sched.t_horizon - sched.t_min
    return bool(np.all(w > 0) and np.all(np.isfinite(w))
                and abs(w.mean() - span) < 0.01 * span)


def _network_exactness() -> bool:
    rng = np.random.default_rng(5)
    net = init_network(2, 3, 2, hidden=(16, 12), n_frequencies=4, rng=rng)
    y = rng.normal(size=(6, 2))
    x1, x2 = rng.normal(size=(6, 3)), rng.normal(size=(6, 3))
    z = rng.normal(size=(6, 2))
    t = rng.uniform(0.1, 0.9, 6)
    if np.any(forward(net, y, x1, z, t, [1, 0, 0]) != 0.0):
        return False  # zero-initialized head must emit zero
    net.weights[-1][:] = rng.normal(size=net.weights[-1].shape)
    a = forward(net, y, x1, z, t, [1, -1, 0])
    b = forward(net, y, x2, z, t, [1, -1, 0])
    if not np.array_equal(a, b):
        return False  # -1 encoding must erase the block exactly
    return finite_difference_check(net, y, x1, z, t, [1, 0, 0], n_probes=20,
                                   rng=rng) < 1e-4


def _adam_zero_grad() -> bool:
    net = init_network(1, 1, 1, hidden=(8,), n_frequencies=2)
    state = adam_init(net)
    before = [p.copy() for p in net.parameters()]
    zero = [(np.zeros_like(w), np.zeros_like(b))
            for w, b in zip(net.weights, net.biases)]
    adam_step(net, zero, state)
    return all(np.array_equal(p, q) for p, q in zip(before, net.parameters()))


def _gaussian_oracle_agreement() -> bool:
    p = LinearGaussianParams()
    a = np.array([[p.b_x, p.lam], [0.0, p.b_y]])
    q = np.diag([p.sigma_x2, p.sigma_y2])
    s = q.copy()
    for _ in range(5000):
        s = a @ s @ a.T + q
    # covariance of (x_t, y_{t-1}, x_{t-1})
    cov = np.empty((3, 3))
    cov[0, 0] = s[0, 0]
    cov[1, 1] = s[1, 1]
    cov[2, 2] = s[0, 0]
    cov[0, 1] = cov[1, 0] = p.b_x * s[0, 1] + p.lam * s[1, 1]
    cov[0, 2] = cov[2, 0] = p.b_x * s[0, 0] + p.lam * s[0, 1]
    cov[1, 2] = cov[2, 1] = s[0, 1]
    cmi = gaussian_cmi(GaussianBlocks(cov, idx_x=(0,), idx_y=(1,), idx_z=(2,)))
    return abs(cmi - te_linear_gaussian_truth(p)) <= 1e-6


def _digamma_identities() -> bool:
    ok = abs(digamma(6.0) - digamma(5.0) - 1.0 / 5.0) < 1e-12
    k = 5
    ok &= abs(_digamma_combination(k, np.full(10, k), np.full(10, k),
                                   np.full(10, k)) - (-1.0 / k)) < 1e-12
    return bool(ok)


def _dataset_shape() -> bool:
    rng = np.random.default_rng(0)
    pair = TimeSeriesPair(rng.normal(size=(10, 1)), rng.normal(size=(10, 1)))
    ds = build_te_dataset(pair, k=2, ell=3)
    return ds.n == 7 and ds.x.shape == (7, 2) and ds.z.shape == (7, 3)


def _checkpoint_roundtrip() -> bool:
    net = init_network(1, 2, 1, hidden=(8,), n_frequencies=4,
                       rng=np.random.default_rng(3))
    net.weights[-1][:] = 0.25
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "net.npz"
        save_checkpoint(net, path)
        other = load_checkpoint(path)
    return (other.block_dims == net.block_dims
            and all(np.array_equal(a, b) for a, b in zip(net.parameters(),
                                                         other.parameters())))


CHECKS = [
    ("vp identities (k^2+v=1, chi(.,1)=1, zero tail)", _vp_identities),
    ("time sampler weights positive and calibrated", _sampler_weights),
    ("network zero-init, masking and gradients", _network_exactness),
    ("adam no-op on zero gradient", _adam_zero_grad),
    ("gaussian oracle matches lyapunov truth", _gaussian_oracle_agreement),
    ("digamma recurrence and degenerate count", _digamma_identities),
    ("lagged dataset row count", _dataset_shape),
    ("checkpoint round-trip", _checkpoint_roundtrip),
]


def run_selftest(log=print) -> bool:
    all_ok = True
    for name, check in CHECKS:
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, keep going
            ok = False
            log(f"FAIL {name}: {exc!r}")
            all_ok = False
            continue
        log(("PASS" if ok else "FAIL") + f" {name}")
        all_ok &= ok
    return all_ok
