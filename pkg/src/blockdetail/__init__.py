"""blockdetail: detailed character motion from blocking poses.

Diffusion sampling with inference-time tolerance-weighted constraint
refinement, the competing strategies, a synthetic benchmark, a metric
suite, a batch CLI, and a small job service for the companion UI.
"""
from .skeleton import DEFAULT_SKELETON, SkeletonSpec, desk_skeleton
from .motion import (BlockingPose, BlockingSet, Condition, Motion, Pose,
                     build_condition, pose_distance)
from .synth import synth_dataset, synth_motion
from .motion_io import (MotionFileError, load_blocking, load_motion,
                        save_blocking, save_motion)
from .schedule import NoiseSchedule, forward_noise
from .gaussian import (GaussianDenoiserR, GaussianDenoiserU,
                       GaussianMotionPrior, gaussian_conditional_x0,
                       gaussian_posterior_x0, squared_exponential_kernel)
from .net import (NetConfig, NetDenoiserR, NetDenoiserU, TinyDenoiserNet,
                  load_checkpoint, save_checkpoint)
from .training import TrainConfig, TrainResult, train_denoiser, training_pairs
from .sampler import ancestral_sample
from .detailing import (RefinementConfig, RefinementEvent, RefinementTrace,
                        blend_key, detail_motion, ground_fix, match_pose,
                        refine_condition)
from .baselines import (BlendMask, GuidanceConfig, blended_sample,
                        guided_sample, hard_impute_sample,
                        r_no_tolerance_sample, soft_mask, sparse_mask,
                        unconditioned_sample)
from .strategies import StrategyDescriptor, parse_strategy, run_strategy
from .features import feature_dim, motion_features
from .metrics import fid, footskate, jitter, keyframe_error
from .benchmark import BenchmarkSpec, EvalReport, ablate_n, make_blocking, run_benchmark

__version__ = "0.1.0"
