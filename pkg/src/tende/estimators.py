"""Score-difference estimators for KL, entropy, conditional information
and transfer entropy.

The common primitive is a Monte-Carlo time integral: diffuse the target
samples to importance-sampled times, evaluate score functions there, and
average importance_weight * g2(t)/2 * (a squared-norm expression).  Four
conditional-information variants are provided; they differ in whether a
marginal score ("joint" approach) or a Gaussian reference (option 2) is
used as the common anchor.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ._compute import pinned_blas
from .neural import ScoreNetwork
from .score_model import (MASK_COND_XZ, MASK_COND_Z, MASK_MARGINAL,
                          TrainConfig, normalize_approach, score_at, train)
from .sde import (VpSchedule, chi_t, g2_t, gaussian_tail_kl, perturb,
                  sample_times)
from .systems import TeDataset, build_te_dataset

__all__ = [
    "EstimatorConfig",
    "TeEstimate",
    "kl_estimate_e",
    "entropy_estimate",
    "cmi_c1",
    "cmi_c2",
    "cmi_j1",
    "cmi_j2",
    "evaluate_cmi",
    "transfer_entropy",
]

ScoreFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class EstimatorConfig:
    """Which conditional-information variant to evaluate and at what budget."""

    approach: str = "c"   # "c": two conditional scores; "j": adds the marginal
    option: int = 1       # 1: score differences; 2: Gaussian-reference form
    sigma: float = 1.0    # reference scale, used by option 2 only
    mc_time_draws_per_point: int = 10
    seed: int = 0

    def __post_init__(self):
        self.approach = normalize_approach(self.approach)
        if self.option not in (1, 2):
            raise ValueError("option must be 1 or 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.mc_time_draws_per_point < 1:
            raise ValueError("need at least one time draw per point")


@dataclass
class TeEstimate:
    """Across-seed aggregate of a transfer-entropy run (values in nats)."""

    value: float
    per_seed_values: list[float]
    std_dev: float
    per_seed_wall_times: list[float] = field(default_factory=list)


def _sq(a: np.ndarray) -> np.ndarray:
    return np.sum(a * a, axis=1)


def kl_estimate_e(score_p: ScoreFn, score_q: ScoreFn, samples: np.ndarray,
                  sched: VpSchedule, n_time_draws: int = 10,
                  rng: np.random.Generator | None = None) -> float:
    """Monte-Carlo score-difference estimate of KL(p || q).

    Both score functions act on the diffused space, as (x_t, t) -> score.
    `samples` must be draws from p.  The result is nonnegative and omits
    the (small) divergence remaining at the time horizon.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.size == 0:
        raise ValueError("empty sample set")
    if rng is None:
        rng = np.random.default_rng(0)
    n = samples.shape[0]
    total = 0.0
    for _ in range(n_time_draws):
        t, w = sample_times(sched, rng, n)
        x_t = perturb(sched, samples, t, rng.standard_normal(samples.shape))
        diff = score_p(x_t, t) - score_q(x_t, t)
        total += float(np.mean(w * 0.5 * g2_t(sched, t) * _sq(diff)))
    return total / n_time_draws


def entropy_estimate(score_or_net, data: np.ndarray, sigma: float,
                     sched: VpSchedule, n_time_draws: int = 10,
                     rng: np.random.Generator | None = None) -> float:
    """Differential entropy via the KL against an isotropic Gaussian.

    `score_or_net` is either a trained network (its marginal encoding is
    used) or a score function (x_t, t) -> score for the diffused data.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    data = np.atleast_2d(np.asarray(data, dtype=float))
    dim = data.shape[1]
    if isinstance(score_or_net, ScoreNetwork):
        net = score_or_net
        d_x, d_z = net.block_dims[1], net.block_dims[2]

        def score_p(x_t, t):
            n = x_t.shape[0]
            return score_at(net, x_t, np.zeros((n, d_x)), np.zeros((n, d_z)),
                            t, MASK_MARGINAL, sched)
    else:
        score_p = score_or_net

    def score_ref(x_t, t):
        return -x_t / chi_t(sched, t, sigma)[..., None]

    e_pq = kl_estimate_e(score_p, score_ref, data, sched, n_time_draws, rng)
    chi_T = float(chi_t(sched, sched.t_horizon, sigma))
    return (0.5 * dim * math.log(2.0 * math.pi * sigma * sigma)
            + float(np.mean(_sq(data))) / (2.0 * sigma * sigma)
            - e_pq - gaussian_tail_kl(dim, chi_T))


# -- conditional-information variants ------------------------------------------


def _require_trained(net: ScoreNetwork) -> None:
    if not net.trained:
        raise ValueError("network has not been trained; run train() first")


def _mc_variant(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
                cfg: EstimatorConfig, rng: np.random.Generator | None,
                integrand: Callable[..., np.ndarray],
                need_marginal: bool) -> float:
    """Average w * g2/2 * integrand(...) over data points and time draws.

    The integrand receives the two conditional scores, plus the marginal
    score and/or the Gaussian-reference pull y_t/chi as needed.
    """
    _require_trained(net)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n = ds.n
    total = 0.0
    for _ in range(cfg.mc_time_draws_per_point):
        t, w = sample_times(sched, rng, n)
        y_t = perturb(sched, ds.y, t, rng.standard_normal(ds.y.shape))
        s_xz = score_at(net, y_t, ds.x, ds.z, t, MASK_COND_XZ, sched)
        s_z = score_at(net, y_t, ds.x, ds.z, t, MASK_COND_Z, sched)
        extra = {}
        if need_marginal:
            extra["s_m"] = score_at(net, y_t, ds.x, ds.z, t, MASK_MARGINAL, sched)
        if cfg.option == 2:
            extra["ref"] = y_t / chi_t(sched, t, cfg.sigma)[:, None]
        vals = integrand(s_xz, s_z, **extra)
        total += float(np.mean(w * 0.5 * g2_t(sched, t) * vals))
    return total / cfg.mc_time_draws_per_point


def cmi_c1(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
           cfg: EstimatorConfig, rng: np.random.Generator | None = None) -> float:
    """Conditional information from the two conditional scores alone;
    nonnegative by construction."""
    cfg = replace(cfg, approach="c", option=1)
    return _mc_variant(net, ds, sched, cfg, rng,
                       lambda s_xz, s_z: _sq(s_xz - s_z), need_marginal=False)


def cmi_c2(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
           cfg: EstimatorConfig, rng: np.random.Generator | None = None) -> float:
    """Difference of squared pulls toward the Gaussian reference; may be
    negative on finite samples."""
    cfg = replace(cfg, approach="c", option=2)
    return _mc_variant(net, ds, sched, cfg, rng,
                       lambda s_xz, s_z, ref: _sq(s_xz + ref) - _sq(s_z + ref),
                       need_marginal=False)


def cmi_j1(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
           cfg: EstimatorConfig, rng: np.random.Generator | None = None) -> float:
    """Difference of squared distances to the marginal score."""
    cfg = replace(cfg, approach="j", option=1)
    return _mc_variant(net, ds, sched, cfg, rng,
                       lambda s_xz, s_z, s_m: _sq(s_xz - s_m) - _sq(s_z - s_m),
                       need_marginal=True)


def cmi_j2(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
           cfg: EstimatorConfig, rng: np.random.Generator | None = None) -> float:
    """Difference of two reference-anchored information terms.

    The shared marginal term enters both halves with the same draws, so it
    cancels pointwise; it is kept in the expression for fidelity to the
    estimator's definition.
    """
    cfg = replace(cfg, approach="j", option=2)

    def integrand(s_xz, s_z, s_m, ref):
        shared = _sq(s_m + ref)
        return (_sq(s_xz + ref) - shared) - (_sq(s_z + ref) - shared)

    return _mc_variant(net, ds, sched, cfg, rng, integrand, need_marginal=True)


_VARIANTS = {("c", 1): cmi_c1, ("c", 2): cmi_c2, ("j", 1): cmi_j1, ("j", 2): cmi_j2}


def evaluate_cmi(net: ScoreNetwork, ds: TeDataset, sched: VpSchedule,
                 cfg: EstimatorConfig, rng: np.random.Generator | None = None) -> float:
    """Dispatch to the variant selected by (approach, option)."""
    return _VARIANTS[(cfg.approach, cfg.option)](net, ds, sched, cfg, rng)


# -- end-to-end transfer entropy ------------------------------------------------


def _standardize(ds: TeDataset) -> TeDataset:
    def norm(a):
        mu = a.mean(axis=0)
        sd = a.std(axis=0)
        sd = np.where(sd < 1e-12, 1.0, sd)
        return (a - mu) / sd
    return TeDataset(norm(ds.y), norm(ds.x), norm(ds.z), ds.k, ds.ell)


def _split(ds: TeDataset, holdout: float,
           rng: np.random.Generator) -> tuple[TeDataset, TeDataset]:
    if holdout <= 0:
        return ds, ds
    idx = rng.permutation(ds.n)
    cut = max(1, int(round(ds.n * holdout)))
    hold, fit = idx[:cut], idx[cut:]
    pick = lambda sel: TeDataset(ds.y[sel], ds.x[sel], ds.z[sel], ds.k, ds.ell)
    return pick(fit), pick(hold)


def _single_seed_te(series, k: int, ell: int, direction: str,
                    cfg: EstimatorConfig, train_cfg: TrainConfig,
                    seed_index: int) -> tuple[float, float]:
    t0 = time.perf_counter()
    ss = np.random.SeedSequence([train_cfg.seed, cfg.seed, seed_index])
    key_data, key_train, key_est, key_split = ss.spawn(4)
    pair = series(np.random.default_rng(key_data)) if callable(series) else series
    ds = build_te_dataset(pair, k, ell, direction)
    if train_cfg.standardize:
        ds = _standardize(ds)
    fit_ds, eval_ds = _split(ds, train_cfg.holdout_fraction,
                             np.random.default_rng(key_split))
    seed_train_cfg = replace(train_cfg,
                             seed=int(key_train.generate_state(1)[0]))
    result = train(fit_ds, seed_train_cfg)
    value = evaluate_cmi(result.network, eval_ds, train_cfg.schedule, cfg,
                         np.random.default_rng(key_est))
    return value, time.perf_counter() - t0


def transfer_entropy(series, k: int, ell: int, direction: str,
                     cfg: EstimatorConfig, train_cfg: TrainConfig,
                     n_seeds: int = 5, n_workers: int = 1) -> TeEstimate:
    """Estimate directed information flow between two series.

    `series` is either a TimeSeriesPair or a callable rng -> TimeSeriesPair;
    in the latter case every seed trains on freshly generated data.  Each
    seed retrains the network from scratch; the estimate is the across-seed
    mean with its sample standard deviation.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    if normalize_approach(cfg.approach) == "j" and train_cfg.approach != "j":
        raise ValueError("joint estimators need a network trained with approach 'j'")
    run = lambda i: _single_seed_te(series, k, ell, direction, cfg, train_cfg, i)
    with pinned_blas():
        if n_workers > 1 and n_seeds > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(run, range(n_seeds)))
        else:
            results = [run(i) for i in range(n_seeds)]
    values = [float(v) for v, _ in results]
    walls = [float(w) for _, w in results]
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return TeEstimate(float(np.mean(values)), values, std, walls)
