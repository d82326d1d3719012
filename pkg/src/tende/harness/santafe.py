"""Ingestion and lag analysis of the sleep-laboratory multichannel recording
(heart rate, chest respiration, blood oxygen, sampled at 2 Hz)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..estimators import EstimatorConfig, transfer_entropy
from ..score_model import TrainConfig
from ..systems import TimeSeriesPair
from .results import ResultRow, append_rows
from .svg import Series, line_chart

__all__ = ["SLICE_START", "SLICE_STOP", "load_santa_fe", "standardized_slice",
           "run_santafe"]

# analysis window used by prior work on this recording
SLICE_START, SLICE_STOP = 2350, 3550
CHANNELS = ("heart", "resp", "oxygen")


def load_santa_fe(path, columns: tuple[int, int, int] = (0, 1, 2)) -> np.ndarray:
    """Read the whitespace-delimited recording into an (n, 3) array.

    `columns` maps file columns to (heart, resp, oxygen), since mirrors of
    the data disagree on column order.  The file must contain at least
    SLICE_STOP rows and constant-width numeric rows.
    """
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vals = [float(v) for v in line.split()]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed row {raw!r}") from None
            rows.append(vals)
            if len(vals) != len(rows[0]):
                raise ValueError(f"{path}:{lineno}: inconsistent column count")
    if len(rows) < SLICE_STOP:
        raise ValueError(f"{path}: need at least {SLICE_STOP} rows, found {len(rows)}")
    data = np.asarray(rows, dtype=float)
    if max(columns) >= data.shape[1]:
        raise ValueError(f"{path}: column mapping {columns} exceeds "
                         f"{data.shape[1]} available columns")
    return data[:, list(columns)]


def standardized_slice(series: np.ndarray) -> np.ndarray:
    """The analysis window, each channel scaled to zero mean, unit variance."""
    window = series[SLICE_START:SLICE_STOP]
    return (window - window.mean(axis=0)) / window.std(axis=0)


def run_santafe(path, out_dir, columns=(0, 1, 2), k_max: int = 5, ell: int = 2,
                n_seeds: int = 5, est_cfg: EstimatorConfig | None = None,
                train_cfg: TrainConfig | None = None, n_workers: int = 1,
                log=print) -> list[ResultRow]:
    """Directionality-vs-lag analysis between respiration and heart rate.

    For k = 1..k_max computes the information flow respiration -> heart and
    heart -> respiration at fixed own-past depth `ell`, writing per-seed CSV
    rows and a chart with across-seed error bars.
    """
    est_cfg = est_cfg or EstimatorConfig()
    train_cfg = train_cfg or TrainConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    window = standardized_slice(load_santa_fe(path, columns))
    pair = TimeSeriesPair(window[:, [1]], window[:, [0]])  # x = resp, y = heart
    variant = f"{est_cfg.approach}{est_cfg.option}"
    directions = {"resp_to_heart": "x_to_y", "heart_to_resp": "y_to_x"}
    rows: list[ResultRow] = []
    curves = {name: ([], []) for name in directions}
    for k in range(1, k_max + 1):
        for name, direction in directions.items():
            est = transfer_entropy(pair, k, ell, direction, est_cfg, train_cfg,
                                   n_seeds=n_seeds, n_workers=n_workers)
            curves[name][0].append(est.value)
            curves[name][1].append(est.std_dev)
            rows.extend(ResultRow(system="santa_fe_b", n_samples=pair.t_len - max(k, ell),
                                  param=float(k), direction=name, variant=variant,
                                  seed=i, estimate=v, truth=None, wall_time_s=w)
                        for i, (v, w) in enumerate(zip(est.per_seed_values,
                                                       est.per_seed_wall_times)))
            log(f"k={k} {name}: {est.value:+.4f} +/- {est.std_dev:.4f}")
    append_rows(out_dir / "results_santafe.csv", rows)
    ks = list(range(1, k_max + 1))
    line_chart(out_dir / "fig_santafe.svg",
               [Series(name, ks, vals, errs) for name, (vals, errs) in curves.items()],
               title=f"respiration/heart information flow (own past = {ell} lags)",
               xlabel="source lag k", ylabel="transfer entropy (nats)")
    return rows
