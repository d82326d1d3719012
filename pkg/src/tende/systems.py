"""Benchmark time-series generators with known directed-information values.

Two bivariate systems are provided: a coupled first-order vector
autoregression (information flows y -> x) and a threshold-switching
"joint" system (information flows x -> y).  Both admit closed-form
transfer entropy, which the stacking constructions and monotone marginal
transforms leave unchanged or scale additively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

__all__ = [
    "TimeSeriesPair",
    "TeDataset",
    "LinearGaussianParams",
    "JointSystemParams",
    "build_te_dataset",
    "gen_linear_gaussian",
    "te_linear_gaussian_truth",
    "gen_joint_system",
    "te_joint_truth",
    "stack_redundant",
    "stack_linear",
    "transform_half_cube",
    "transform_gauss_cdf",
    "write_series",
    "read_series",
]

BURN_IN = 1000


@dataclass(frozen=True)
class TimeSeriesPair:
    """Aligned pair of (possibly multichannel) series, rows are time steps."""

    x: np.ndarray  # (T_len, n_x)
    y: np.ndarray  # (T_len, n_y)

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.atleast_2d(np.asarray(self.y, dtype=float))
        if x.ndim != 2 or y.ndim != 2:
            raise ValueError("series must be 1- or 2-dimensional arrays")
        if x.shape[0] != y.shape[0]:
            raise ValueError("x and y must have equal length")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("series contain non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def t_len(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class TeDataset:
    """I.i.d.-style triplets (future target, source past, target past)."""

    y: np.ndarray  # (n, n_y)      target at time t
    x: np.ndarray  # (n, k * n_x)  [X_{t-1}, ..., X_{t-k}]
    z: np.ndarray  # (n, ell * n_y) [Y_{t-1}, ..., Y_{t-ell}]
    k: int
    ell: int

    @property
    def n(self) -> int:
        return self.y.shape[0]


def _lag_stack(series: np.ndarray, lags: int, start: int) -> np.ndarray:
    # row i holds [s_{start+i-1}, ..., s_{start+i-lags}], newest lag first
    n = series.shape[0] - start
    return np.concatenate([series[start - j - 1:start - j - 1 + n] for j in range(lags)],
                          axis=1)


def build_te_dataset(pair: TimeSeriesPair, k: int, ell: int,
                     direction: str = "x_to_y") -> TeDataset:
    """Slice a series pair into (Y_t, source past, target past) triplets.

    `k` lags of the source and `ell` lags of the target's own past; for
    direction "y_to_x" the two series swap roles first.  Produces
    t_len - max(k, ell) rows.
    """
    if k < 1 or ell < 1:
        raise ValueError("lags k and ell must be >= 1")
    if direction == "x_to_y":
        src, tgt = pair.x, pair.y
    elif direction == "y_to_x":
        src, tgt = pair.y, pair.x
    else:
        raise ValueError(f"unknown direction {direction!r}")
    start = max(k, ell)
    if pair.t_len <= start:
        raise ValueError(f"series of length {pair.t_len} too short for lags ({k}, {ell})")
    return TeDataset(y=tgt[start:].copy(),
                     x=_lag_stack(src, k, start),
                     z=_lag_stack(tgt, ell, start),
                     k=k, ell=ell)


# -- linear Gaussian system ---------------------------------------------------


@dataclass(frozen=True)
class LinearGaussianParams:
    """x_t = b_x x_{t-1} + lam y_{t-1} + e_x,  y_t = b_y y_{t-1} + e_y."""

    b_x: float = 0.5
    b_y: float = 0.5
    lam: float = 0.5
    sigma_x2: float = 1.0
    sigma_y2: float = 1.0

    def __post_init__(self):
        if abs(self.b_x) >= 1 or abs(self.b_y) >= 1:
            raise ValueError("stationarity requires |b_x|, |b_y| < 1")
        if self.sigma_x2 <= 0 or self.sigma_y2 <= 0:
            raise ValueError("innovation variances must be positive")


def gen_linear_gaussian(p: LinearGaussianParams, t_len: int,
                        rng: np.random.Generator) -> TimeSeriesPair:
    """Simulate the coupled AR pair, discarding a burn-in for stationarity."""
    total = t_len + BURN_IN
    ex = rng.normal(scale=math.sqrt(p.sigma_x2), size=total)
    ey = rng.normal(scale=math.sqrt(p.sigma_y2), size=total)
    x = np.empty(total)
    y = np.empty(total)
    xp = yp = 0.0
    for t in range(total):
        xc = p.b_x * xp + p.lam * yp + ex[t]
        yc = p.b_y * yp + ey[t]
        x[t], y[t] = xc, yc
        xp, yp = xc, yc
    return TimeSeriesPair(x[BURN_IN:, None], y[BURN_IN:, None])


def _var1_stationary_cov(p: LinearGaussianParams) -> np.ndarray:
    # discrete Lyapunov fixed point S = A S A' + Q for the 2x2 system
    a = np.array([[p.b_x, p.lam], [0.0, p.b_y]])
    q = np.diag([p.sigma_x2, p.sigma_y2])
    s = q.copy()
    for _ in range(10000):
        s_next = a @ s @ a.T + q
        if np.max(np.abs(s_next - s)) < 1e-15:
            return s_next
        s = s_next
    return s


def te_linear_gaussian_truth(p: LinearGaussianParams,
                             direction: str = "y_to_x",
                             k: int = 1, ell: int = 1) -> float:
    """Exact transfer entropy of the AR pair at unit lags.

    y -> x: 0.5 * log(Var(x_t | x_{t-1}) / sigma_x^2) from the stationary
    covariance; x -> y is identically zero because y never reads x.
    """
    if k != 1 or ell != 1:
        raise ValueError("closed form available for k = ell = 1 only")
    if direction == "x_to_y":
        return 0.0
    if direction != "y_to_x":
        raise ValueError(f"unknown direction {direction!r}")
    s = _var1_stationary_cov(p)
    var_x, c_xy = s[0, 0], s[0, 1]
    cov_x_lag = p.b_x * var_x + p.lam * c_xy  # Cov(x_t, x_{t-1})
    var_cond = var_x - cov_x_lag ** 2 / var_x
    return 0.5 * math.log(var_cond / p.sigma_x2)


# -- threshold-switching joint system -----------------------------------------


@dataclass(frozen=True)
class JointSystemParams:
    """y_t mixes in x_{t-1} with weight rho whenever y_{t-1} >= lam."""

    lam: float = 0.5
    rho: float = 0.9

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")


def gen_joint_system(p: JointSystemParams, t_len: int,
                     rng: np.random.Generator) -> TimeSeriesPair:
    """Simulate the switching system; x and the latent z are i.i.d. N(0,1)."""
    x = rng.normal(size=t_len)
    z = rng.normal(size=t_len)
    y = np.empty(t_len)
    y[0] = rng.normal()
    mix = math.sqrt(1.0 - p.rho * p.rho)
    for t in range(1, t_len):
        if y[t - 1] < p.lam:
            y[t] = z[t - 1]
        else:
            y[t] = p.rho * x[t - 1] + mix * z[t - 1]
    return TimeSeriesPair(x[:, None], y[:, None])


def te_joint_truth(p: JointSystemParams, direction: str = "x_to_y") -> float:
    """-(1/2) (1 - Phi(lam)) log(1 - rho^2) for x -> y; zero for y -> x."""
    if direction == "y_to_x":
        return 0.0
    if direction != "x_to_y":
        raise ValueError(f"unknown direction {direction!r}")
    return -0.5 * (1.0 - ndtr(p.lam)) * math.log1p(-p.rho * p.rho)


# -- stacking constructions ----------------------------------------------------


def stack_redundant(pair: TimeSeriesPair, d: int,
                    rng: np.random.Generator) -> TimeSeriesPair:
    """Append d independent white-noise channels to each series.

    The added channels carry no directed information, so the transfer
    entropy of the stacked pair equals that of the base pair.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d == 0:
        return pair
    n = pair.t_len
    return TimeSeriesPair(
        np.concatenate([pair.x, rng.normal(size=(n, d))], axis=1),
        np.concatenate([pair.y, rng.normal(size=(n, d))], axis=1))


def stack_linear(generator: Callable[..., TimeSeriesPair], params, d: int,
                 t_len: int, rng: np.random.Generator,
                 single_truth: float | None = None
                 ) -> tuple[TimeSeriesPair, float | None]:
    """Stack d independent replicates columnwise; transfer entropy adds."""
    if d < 1:
        raise ValueError("d must be >= 1")
    pairs = [generator(params, t_len, rng) for _ in range(d)]
    stacked = TimeSeriesPair(np.concatenate([q.x for q in pairs], axis=1),
                             np.concatenate([q.y for q in pairs], axis=1))
    truth = None if single_truth is None else d * single_truth
    return stacked, truth


# -- marginal transforms (leave transfer entropy invariant) --------------------


def transform_half_cube(pair: TimeSeriesPair) -> TimeSeriesPair:
    """Elementwise x -> x * sqrt(|x|), strictly increasing."""
    f = lambda a: a * np.sqrt(np.abs(a))
    return TimeSeriesPair(f(pair.x), f(pair.y))


def transform_gauss_cdf(pair: TimeSeriesPair) -> TimeSeriesPair:
    """Elementwise standard-normal CDF, mapping every channel into (0, 1)."""
    return TimeSeriesPair(ndtr(pair.x), ndtr(pair.y))


# -- plain-text serialization ---------------------------------------------------


def write_series(pair: TimeSeriesPair, path) -> None:
    """One time step per line, x columns then y columns, with a
    "# n_x n_y t_len" header."""
    n_x, n_y = pair.x.shape[1], pair.y.shape[1]
    data = np.concatenate([pair.x, pair.y], axis=1)
    with open(path, "w") as fh:
        fh.write(f"# {n_x} {n_y} {pair.t_len}\n")
        for row in data:
            fh.write(" ".join(format(val, ".17g") for val in row) + "\n")


def read_series(path) -> TimeSeriesPair:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "#":
            raise ValueError(f"{path}: missing '# n_x n_y t_len' header")
        n_x, n_y, t_len = (int(v) for v in header[1:])
        data = np.loadtxt(fh, ndmin=2)
    if data.shape != (t_len, n_x + n_y):
        raise ValueError(f"{path}: expected {(t_len, n_x + n_y)} values, got {data.shape}")
    return TimeSeriesPair(data[:, :n_x], data[:, n_x:])
