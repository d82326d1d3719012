"""Benchmark sweeps: multi-seed runs over sample size, coupling strength,
stacking depth and marginal transforms, persisted as CSV rows and SVG
charts with the known ground-truth curve."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from ..estimators import EstimatorConfig, TeEstimate, transfer_entropy
from ..score_model import TrainConfig
from ..systems import (JointSystemParams, LinearGaussianParams,
                       TimeSeriesPair, gen_joint_system, gen_linear_gaussian,
                       stack_linear, stack_redundant, te_joint_truth,
                       te_linear_gaussian_truth, transform_gauss_cdf,
                       transform_half_cube)
from .results import ResultRow, append_rows
from .svg import Series, line_chart

__all__ = ["SUITES", "SweepPoint", "run_sweep_point", "run_suite",
           "informative_direction", "make_generator", "system_truth"]

# benchmark defaults: the coupled system carries signal, the linear system
# acts as a null control unless the coupling is swept
DEFAULT_COUPLING = {"joint": 0.5, "linear_gaussian": 0.0}
SAMPLE_SIZES = (500, 1000, 5000, 10000)
COUPLING_GRID = tuple(np.linspace(0.0, 1.0, 9))
REDUNDANT_DEPTHS = (0, 1, 2, 4)
LINEAR_DEPTHS = (1, 2, 3)
TRANSFORMS = {"half_cube": transform_half_cube, "gauss_cdf": transform_gauss_cdf}


def informative_direction(system: str) -> str:
    """The direction along which the system carries information."""
    return "x_to_y" if system == "joint" else "y_to_x"


def _base_params(system: str, coupling: float):
    if system == "joint":
        return JointSystemParams(lam=coupling)
    if system == "linear_gaussian":
        return LinearGaussianParams(lam=coupling)
    raise ValueError(f"unknown system {system!r}")


def system_truth(system: str, coupling: float, direction: str) -> float:
    if system == "joint":
        return te_joint_truth(JointSystemParams(lam=coupling), direction)
    return te_linear_gaussian_truth(LinearGaussianParams(lam=coupling), direction)


def make_generator(system: str, coupling: float, t_len: int,
                   redundant: int = 0, replicates: int = 1,
                   transform: str | None = None
                   ) -> Callable[[np.random.Generator], TimeSeriesPair]:
    """Build an rng -> TimeSeriesPair callable for a sweep configuration."""
    params = _base_params(system, coupling)
    gen = gen_joint_system if system == "joint" else gen_linear_gaussian

    def generate(rng: np.random.Generator) -> TimeSeriesPair:
        if replicates > 1:
            pair, _ = stack_linear(gen, params, replicates, t_len, rng)
        else:
            pair = gen(params, t_len, rng)
        if redundant > 0:
            pair = stack_redundant(pair, redundant, rng)
        if transform is not None:
            pair = TRANSFORMS[transform](pair)
        return pair

    return generate


@dataclass(frozen=True)
class SweepPoint:
    """One configuration of a sweep: system, size, sweep value, direction."""

    system: str
    n_samples: int
    param: float           # the swept value (lambda, stack depth, lag, ...)
    direction: str
    coupling: float
    truth: float | None
    redundant: int = 0
    replicates: int = 1
    transform: str | None = None

    def generator(self, k: int, ell: int):
        return make_generator(self.system, self.coupling,
                              self.n_samples + max(k, ell),
                              self.redundant, self.replicates, self.transform)


def run_sweep_point(point: SweepPoint, est_cfg: EstimatorConfig,
                    train_cfg: TrainConfig, n_seeds: int, n_workers: int = 1,
                    k: int = 1, ell: int = 1) -> tuple[TeEstimate, list[ResultRow]]:
    est = transfer_entropy(point.generator(k, ell), k, ell, point.direction,
                           est_cfg, train_cfg, n_seeds=n_seeds, n_workers=n_workers)
    variant = f"{est_cfg.approach}{est_cfg.option}"
    system = point.system if point.transform is None else \
        f"{point.system}_{point.transform}"
    rows = [ResultRow(system=system, n_samples=point.n_samples, param=point.param,
                      direction=point.direction, variant=variant, seed=i,
                      estimate=v, truth=point.truth, wall_time_s=w)
            for i, (v, w) in enumerate(zip(est.per_seed_values,
                                           est.per_seed_wall_times))]
    return est, rows


def _sample_size_points() -> list[SweepPoint]:
    pts = []
    for system in ("joint", "linear_gaussian"):
        lam = DEFAULT_COUPLING[system]
        for direction in ("x_to_y", "y_to_x"):
            for n in SAMPLE_SIZES:
                pts.append(SweepPoint(system, n, float(n), direction, lam,
                                      system_truth(system, lam, direction)))
    return pts


def _coupling_points() -> list[SweepPoint]:
    pts = []
    for system in ("joint", "linear_gaussian"):
        direction = informative_direction(system)
        for lam in COUPLING_GRID:
            pts.append(SweepPoint(system, 10000, float(lam), direction, float(lam),
                                  system_truth(system, float(lam), direction)))
    return pts


def _redundant_points(transform: str | None = None) -> list[SweepPoint]:
    pts = []
    for system in ("joint", "linear_gaussian"):
        lam = DEFAULT_COUPLING[system]
        direction = informative_direction(system)
        truth = system_truth(system, lam, direction)
        for d in REDUNDANT_DEPTHS:
            pts.append(SweepPoint(system, 10000, float(d), direction, lam, truth,
                                  redundant=d, transform=transform))
    return pts


def _linear_points(transform: str | None = None) -> list[SweepPoint]:
    pts = []
    for system in ("joint", "linear_gaussian"):
        lam = DEFAULT_COUPLING[system]
        direction = informative_direction(system)
        single = system_truth(system, lam, direction)
        for d in LINEAR_DEPTHS:
            pts.append(SweepPoint(system, 10000, float(d), direction, lam,
                                  d * single, replicates=d, transform=transform))
    return pts


def _transform_points() -> list[SweepPoint]:
    pts = []
    for name in TRANSFORMS:
        pts.extend(_redundant_points(transform=name))
        pts.extend(_linear_points(transform=name))
        for system in ("joint", "linear_gaussian"):
            direction = informative_direction(system)
            for lam in COUPLING_GRID:
                pts.append(SweepPoint(system, 10000, float(lam), direction,
                                      float(lam),
                                      system_truth(system, float(lam), direction),
                                      transform=name))
    return pts


SUITES: dict[str, tuple[Callable[[], list[SweepPoint]], str]] = {
    "sample_size": (_sample_size_points, "sample size"),
    "coupling": (_coupling_points, "coupling strength"),
    "redundant_stacking": (_redundant_points, "redundant dimensions"),
    "linear_stacking": (_linear_points, "stacked replicates"),
    "transforms": (_transform_points, "swept value"),
}


def _chart_groups(points: list[SweepPoint]) -> dict[tuple, list[SweepPoint]]:
    groups: dict[tuple, list[SweepPoint]] = {}
    for p in points:
        groups.setdefault((p.system, p.direction, p.transform), []).append(p)
    return groups


def run_suite(name: str, out_dir, est_cfg: EstimatorConfig,
              train_cfg: TrainConfig, n_seeds: int = 5, n_workers: int = 1,
              log=print) -> list[ResultRow]:
    """Run a named sweep end to end, writing results.csv and one SVG per
    (system, direction, transform) group."""
    try:
        point_fn, xlabel = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = point_fn()
    csv_path = out_dir / f"results_{name}.csv"
    all_rows: list[ResultRow] = []
    estimates: dict[SweepPoint, TeEstimate] = {}
    t0 = time.time()
    for i, point in enumerate(points):
        est, rows = run_sweep_point(point, est_cfg, train_cfg, n_seeds, n_workers)
        estimates[point] = est
        append_rows(csv_path, rows)
        all_rows.extend(rows)
        label = point.transform or ""
        log(f"[{i + 1}/{len(points)}] {point.system} {label} {point.direction} "
            f"param={point.param:g}: {est.value:+.4f} +/- {est.std_dev:.4f} "
            f"(truth {point.truth if point.truth is not None else 'n/a'}) "
            f"[{time.time() - t0:.0f}s elapsed]")
    for (system, direction, transform), group in _chart_groups(points).items():
        group = sorted(group, key=lambda p: p.param)
        xs = [p.param for p in group]
        srs = Series(f"{est_cfg.approach}{est_cfg.option} estimate", xs,
                     [estimates[p].value for p in group],
                     [estimates[p].std_dev for p in group])
        truth = None
        if all(p.truth is not None for p in group):
            truth = Series("ground truth", xs, [p.truth for p in group])
        stem = f"fig_{name}_{system}_{direction}"
        if transform:
            stem += f"_{transform}"
        line_chart(out_dir / f"{stem}.svg", [srs], truth=truth,
                   title=f"{system} ({direction}){' ' + transform if transform else ''}",
                   xlabel=xlabel, ylabel="transfer entropy (nats)")
    return all_rows
