"""Scratch calibration: accuracy vs training budget on the benchmark tasks."""
import time

import numpy as np

from tende.estimators import EstimatorConfig, cmi_c1, cmi_c2, cmi_j1, cmi_j2, _standardize
from tende.score_model import TrainConfig, train
from tende.sde import default_schedule
from tende.systems import (JointSystemParams, LinearGaussianParams,
                           build_te_dataset, gen_joint_system,
                           gen_linear_gaussian, te_joint_truth,
                           te_linear_gaussian_truth)

sched = default_schedule()
N = 10000

def run(system, direction, approach, epochs, seed):
    rng = np.random.default_rng([seed, 77])
    if system == "joint":
        pair = gen_joint_system(JointSystemParams(0.5, 0.9), N + 1, rng)
    else:
        pair = gen_linear_gaussian(LinearGaussianParams(), N + 1, rng)
    ds = _standardize(build_te_dataset(pair, 1, 1, direction))
    tc = TrainConfig(approach=approach, epochs=epochs, seed=seed)
    t0 = time.time()
    res = train(ds, tc)
    t_train = time.time() - t0
    cfg = EstimatorConfig(seed=seed)
    t0 = time.time()
    erng = np.random.default_rng([seed, 99])
    vals = {}
    vals["c1"] = cmi_c1(res.network, ds, sched, cfg, erng)
    vals["c2"] = cmi_c2(res.network, ds, sched, cfg, erng)
    if approach == "j":
        vals["j1"] = cmi_j1(res.network, ds, sched, cfg, erng)
        vals["j2"] = cmi_j2(res.network, ds, sched, cfg, erng)
    t_est = time.time() - t0
    return vals, t_train, t_est


truth_joint = te_joint_truth(JointSystemParams(0.5, 0.9))
truth_lg = te_linear_gaussian_truth(LinearGaussianParams())
print(f"truth joint x->y = {truth_joint:.4f}; lin-gauss y->x = {truth_lg:.4f}", flush=True)

for epochs in (100, 200, 300):
    for sys_name, direction, truth in (("joint", "x_to_y", truth_joint),
                                       ("joint", "y_to_x", 0.0),
                                       ("lg", "y_to_x", truth_lg),
                                       ("lg", "x_to_y", 0.0)):
        for approach in ("c", "j"):
            vals, tt, te_ = run(sys_name, direction, approach, epochs, seed=1)
            s = "  ".join(f"{k}={v:+.4f}" for k, v in vals.items())
            print(f"ep={epochs:3d} {sys_name:5s} {direction:6s} {approach}  {s}  "
                  f"truth={truth:+.4f}  train={tt:.0f}s est={te_:.1f}s", flush=True)
