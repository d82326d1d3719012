"""Transfer-entropy estimation with a single amortized denoising network.

The package trains one mask-conditioned noise predictor under a
variance-preserving diffusion and turns its scores into conditional
information estimates, with synthetic benchmark systems, closed-form
ground truths and classical baselines for validation.
"""

from .baselines import GaussianBlocks, gaussian_cmi, knn_cmi
from .estimators import (EstimatorConfig, TeEstimate, cmi_c1, cmi_c2, cmi_j1,
                         cmi_j2, entropy_estimate, evaluate_cmi,
                         kl_estimate_e, transfer_entropy)
from .neural import ScoreNetwork, load_checkpoint, save_checkpoint
from .score_model import NumericError, TrainConfig, TrainResult, train
from .sde import VpSchedule, default_schedule, make_schedule
from .systems import (JointSystemParams, LinearGaussianParams, TeDataset,
                      TimeSeriesPair, build_te_dataset, gen_joint_system,
                      gen_linear_gaussian, read_series, stack_linear,
                      stack_redundant, te_joint_truth,
                      te_linear_gaussian_truth, transform_gauss_cdf,
                      transform_half_cube, write_series)

__version__ = "0.1.0"

__all__ = [
    "EstimatorConfig",
    "GaussianBlocks",
    "JointSystemParams",
    "LinearGaussianParams",
    "NumericError",
    "ScoreNetwork",
    "TeDataset",
    "TeEstimate",
    "TimeSeriesPair",
    "TrainConfig",
    "TrainResult",
    "VpSchedule",
    "build_te_dataset",
    "cmi_c1",
    "cmi_c2",
    "cmi_j1",
    "cmi_j2",
    "default_schedule",
    "entropy_estimate",
    "evaluate_cmi",
    "gaussian_cmi",
    "gen_joint_system",
    "gen_linear_gaussian",
    "kl_estimate_e",
    "knn_cmi",
    "load_checkpoint",
    "make_schedule",
    "read_series",
    "save_checkpoint",
    "stack_linear",
    "stack_redundant",
    "te_joint_truth",
    "te_linear_gaussian_truth",
    "train",
    "transfer_entropy",
    "transform_gauss_cdf",
    "transform_half_cube",
    "write_series",
]
