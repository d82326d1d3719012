"""Training of the amortized denoiser and evaluation of its scores.

One network learns every score required for the conditional-information
estimators.  Each training step draws an importance-sampled diffusion
time, diffuses only the target block (conditioning blocks stay clean),
picks one encoding mask at random, and regresses the injected noise under
the likelihood weighting g2(t)/v(t); the importance weight makes the
Monte-Carlo step an unbiased estimate of the weighted objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._compute import pinned_blas
from .neural import (AdamState, ScoreNetwork, adam_init, adam_step, backward,
                     forward, forward_with_cache, init_network)
from .sde import VpSchedule, default_schedule, g2_t, k_t, sample_times, v_t
from .systems import TeDataset

__all__ = [
    "MASK_COND_XZ",
    "MASK_COND_Z",
    "MASK_MARGINAL",
    "NumericError",
    "TrainConfig",
    "TrainResult",
    "sample_encoding",
    "denoising_loss",
    "training_step",
    "train",
    "score_at",
]

MASK_COND_XZ = np.array([1, 0, 0])    # score of target given source and own past
MASK_COND_Z = np.array([1, -1, 0])    # score of target given own past only
MASK_MARGINAL = np.array([1, -1, -1])  # unconditional target score

_APPROACHES = {"c": "c", "conditional_only": "c", "j": "j", "joint": "j"}


class NumericError(RuntimeError):
    """Raised when training or estimation produces non-finite numbers."""


def normalize_approach(approach: str) -> str:
    try:
        return _APPROACHES[approach]
    except KeyError:
        raise ValueError(f"unknown approach {approach!r}; expected 'c'/'conditional_only' "
                         f"or 'j'/'joint'") from None


@dataclass
class TrainConfig:
    approach: str = "c"
    epochs: int = 300
    batch_size: int = 256
    seed: int = 0
    schedule: VpSchedule = field(default_factory=default_schedule)
    lr: float = 1e-3
    hidden: tuple[int, ...] = (128, 128, 128)
    n_frequencies: int = 32
    dtype: str = "float32"        # network precision; float64 for exact tests
    standardize: bool = True      # per-column affine rescaling of the dataset
    holdout_fraction: float = 0.0  # >0 trains on a split, estimates on the rest

    def __post_init__(self):
        self.approach = normalize_approach(self.approach)
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be 'float32' or 'float64'")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ValueError("holdout_fraction must lie in [0, 1)")


@dataclass
class TrainResult:
    network: ScoreNetwork
    loss_trace: np.ndarray                        # per-epoch mean training loss
    mask_counts: dict[tuple[int, int, int], int]  # encoding usage over all steps


def sample_encoding(approach: str, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw over the legal encodings for the given approach."""
    masks = (MASK_COND_XZ, MASK_COND_Z)
    if normalize_approach(approach) == "j":
        masks = (MASK_COND_XZ, MASK_COND_Z, MASK_MARGINAL)
    return masks[rng.integers(len(masks))].copy()


def _loss_and_grads(net, y, x, z, t, eps, mask, sched, sample_weights):
    """Weighted denoising loss and its parameter gradients for one batch."""
    k = k_t(sched, t)
    v = v_t(sched, t)
    y_t = k[:, None] * y + np.sqrt(v)[:, None] * eps
    out, cache = forward_with_cache(net, y_t, x, z, t, mask)
    resid = out - np.asarray(eps, dtype=out.dtype)
    w = sample_weights * g2_t(sched, t) / v
    loss = float(np.mean(w * np.sum(resid * resid, axis=1, dtype=float)))
    dout = np.asarray((2.0 / y.shape[0]) * w, dtype=out.dtype)[:, None] * resid
    return loss, backward(net, cache, dout)


def denoising_loss(net: ScoreNetwork, y, x, z, t, mask, sched: VpSchedule,
                   rng: np.random.Generator) -> float:
    """Denoising loss at caller-chosen times: mean of w(t)*||eps - eps_hat||^2
    with w(t) = g2(t)/v(t).  `t` may be a scalar or a per-row vector."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float).reshape(-1), (y.shape[0],))
    eps = rng.standard_normal(y.shape)
    loss, _ = _loss_and_grads(net, y, x, z, t, eps, mask,
                              sched, np.ones(y.shape[0]))
    return loss


def training_step(net: ScoreNetwork, adam: AdamState, y, x, z,
                  sched: VpSchedule, approach: str,
                  rng: np.random.Generator) -> tuple[float, np.ndarray]:
    """One optimizer update on a batch; returns (loss, mask used)."""
    n = y.shape[0]
    t, is_w = sample_times(sched, rng, n)
    eps = rng.standard_normal(y.shape)
    mask = sample_encoding(approach, rng)
    loss, grads = _loss_and_grads(net, y, x, z, t, eps, mask, sched, is_w)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite training loss ({loss}); "
                           "check the input data for outliers or rescale it")
    adam_step(net, grads, adam)
    return loss, mask


def train(dataset: TeDataset, cfg: TrainConfig) -> TrainResult:
    """Fit the denoiser on a lagged-triplet dataset.

    Runs `epochs` passes of shuffled minibatches and returns the network
    together with the per-epoch mean loss and the encoding usage counters.
    """
    if dataset.n == 0:
        raise ValueError("dataset is empty")
    rng = np.random.default_rng(cfg.seed)
    net = init_network(dataset.y.shape[1], dataset.x.shape[1], dataset.z.shape[1],
                       hidden=cfg.hidden, n_frequencies=cfg.n_frequencies, rng=rng,
                       dtype=np.dtype(cfg.dtype))
    adam = adam_init(net, lr=cfg.lr)
    counts = {tuple(m): 0 for m in (MASK_COND_XZ, MASK_COND_Z, MASK_MARGINAL)}
    trace = np.empty(cfg.epochs)
    with pinned_blas():
        for epoch in range(cfg.epochs):
            order = rng.permutation(dataset.n)
            losses = []
            for lo in range(0, dataset.n, cfg.batch_size):
                idx = order[lo:lo + cfg.batch_size]
                loss, mask = training_step(net, adam, dataset.y[idx], dataset.x[idx],
                                           dataset.z[idx], cfg.schedule, cfg.approach, rng)
                counts[tuple(mask)] += 1
                losses.append(loss)
            trace[epoch] = float(np.mean(losses))
            if not all(np.isfinite(p).all() for p in net.parameters()):
                raise NumericError(f"non-finite network parameters after epoch {epoch}")
    net.trained = True
    return TrainResult(net, trace, counts)


def score_at(net: ScoreNetwork, y_t, x, z, t, mask,
             sched: VpSchedule) -> np.ndarray:
    """Score of the diffused target at time t: -eps_hat / sqrt(v(t)).

    Valid on [t_min, T] only; the kernel variance vanishes below t_min.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < sched.t_min) or np.any(t_arr > sched.t_horizon):
        raise ValueError(f"t must lie in [{sched.t_min}, {sched.t_horizon}]")
    eps_hat = forward(net, y_t, x, z, t, mask)
    root_v = np.sqrt(v_t(sched, t_arr))
    if eps_hat.ndim == 2 and root_v.ndim == 1:
        root_v = root_v[:, None]
    return -eps_hat / root_v
