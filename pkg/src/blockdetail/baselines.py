"""Competing strategies: output blending (sparse and soft masks),
reconstruction guidance on the unconditioned model, hard imputation, and
plain conditioned sampling without refinement.

All strategies run through the one ancestral sampler and one RNG
discipline, so masks of ones/zeros and zero guidance weight reduce
bit-exactly to plain conditioned or unconditioned sampling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .motion import BlockingSet, Motion, build_condition
from .sampler import ancestral_sample


@dataclass(frozen=True)
class BlendMask:
    """[F, J] output-blending weights in [0, 1]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError(f"blend mask must be [F, J], got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("blend mask must be finite")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("blend mask entries must lie in [0, 1]")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class GuidanceConfig:
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.weight < 0.0:
            raise ValueError("guidance weight must be >= 0")


def sparse_mask(blocking: BlockingSet, c: float) -> BlendMask:
    """Value c on the specified joints of each key frame, zero elsewhere."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    values = np.zeros((blocking.timeline_length, blocking.num_joints))
    for key in blocking.poses:
        values[key.frame_index, key.specified] = c
    return BlendMask(values)


def soft_mask(blocking: BlockingSet, c: float, falloff: int = 10) -> BlendMask:
    """Triangular bumps of peak c at each key decaying linearly to zero over
    +-falloff frames; overlaps combine by per-entry maximum."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    if falloff < 1:
        raise ValueError("falloff must be >= 1")
    num_frames = blocking.timeline_length
    values = np.zeros((num_frames, blocking.num_joints))
    frames = np.arange(num_frames, dtype=np.float64)
    for key in blocking.poses:
        bump = c * np.maximum(0.0, 1.0 - np.abs(frames - key.frame_index) / falloff)
        region = np.ix_(np.arange(num_frames), np.flatnonzero(key.specified))
        values[region] = np.maximum(values[region], bump[:, None])
    return BlendMask(values)


def _constraint_targets(blocking: BlockingSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(frame indices, joint indices, target features) for all specified
    joints across keys, ready for fancy indexing on an [F, J, 3] array."""
    f_idx, j_idx, targets = [], [], []
    for key in blocking.poses:
        joints = np.flatnonzero(key.specified)
        f_idx.extend([key.frame_index] * joints.size)
        j_idx.extend(joints.tolist())
        targets.extend(key.pose.features[joints])
    return (np.asarray(f_idx, dtype=np.intp), np.asarray(j_idx, dtype=np.intp),
            np.asarray(targets, dtype=np.float64))


def r_no_tolerance_sample(denoiser_r, blocking: BlockingSet, seed: int,
                          fps: float = 20.0) -> Motion:
    """Conditioned sampling with the condition fixed for the whole chain."""
    condition = build_condition(blocking).frames

    def denoise_fn(y_t: np.ndarray, t: int) -> np.ndarray:
        return denoiser_r.evaluate(condition, t, y_t)

    shape = (blocking.timeline_length, blocking.num_joints, 3)
    return Motion(ancestral_sample(denoise_fn, denoiser_r.schedule, shape, seed), fps=fps)


def unconditioned_sample(denoiser_u, num_frames: int, num_joints: int, seed: int,
                         fps: float = 20.0) -> Motion:
    shape = (num_frames, num_joints, 3)
    return Motion(ancestral_sample(denoiser_u.evaluate, denoiser_u.schedule, shape, seed),
                  fps=fps)


def blended_sample(denoiser_r, denoiser_u, blocking: BlockingSet, mask: BlendMask,
                   seed: int, fps: float = 20.0) -> Motion:
    """Blend conditioned and unconditioned predictions at every step:
    x0 = M * R(...) + (1 - M) * U(...), both evaluated on the same noisy
    state, then the shared ancestral step proceeds from the blend. The
    condition stays fixed throughout."""
    shape = (blocking.timeline_length, blocking.num_joints, 3)
    if mask.values.shape != shape[:2]:
        raise ValueError(f"mask shape {mask.values.shape} does not match motion {shape[:2]}")
    condition = build_condition(blocking).frames
    m3 = mask.values[:, :, None]

    def denoise_fn(y_t: np.ndarray, t: int) -> np.ndarray:
        pred_r = denoiser_r.evaluate(condition, t, y_t)
        pred_u = denoiser_u.evaluate(y_t, t)
        return m3 * pred_r + (1.0 - m3) * pred_u

    return Motion(ancestral_sample(denoise_fn, denoiser_r.schedule, shape, seed), fps=fps)


def guided_sample(denoiser_u, blocking: BlockingSet, config: GuidanceConfig,
                  seed: int, fps: float = 20.0) -> Motion:
    """Reconstruction guidance on the unconditioned model: the prediction is
    corrected by w * d/dx0 of the squared constraint error, i.e. the
    constrained entries move by -2w (x0 - target)."""
    f_idx, j_idx, targets = _constraint_targets(blocking)
    w = config.weight

    def denoise_fn(y_t: np.ndarray, t: int) -> np.ndarray:
        x0 = np.array(denoiser_u.evaluate(y_t, t), dtype=np.float64, copy=True)
        x0[f_idx, j_idx] -= (2.0 * w) * (x0[f_idx, j_idx] - targets)
        return x0

    shape = (blocking.timeline_length, blocking.num_joints, 3)
    return Motion(ancestral_sample(denoise_fn, denoiser_u.schedule, shape, seed), fps=fps)


def hard_impute_sample(denoiser_u, blocking: BlockingSet, seed: int,
                       fps: float = 20.0) -> Motion:
    """Overwrite the prediction with the blocking features on specified
    joints at every step; the output matches the constraints exactly."""
    f_idx, j_idx, targets = _constraint_targets(blocking)

    def denoise_fn(y_t: np.ndarray, t: int) -> np.ndarray:
        x0 = np.array(denoiser_u.evaluate(y_t, t), dtype=np.float64, copy=True)
        x0[f_idx, j_idx] = targets
        return x0

    shape = (blocking.timeline_length, blocking.num_joints, 3)
    return Motion(ancestral_sample(denoise_fn, denoiser_u.schedule, shape, seed), fps=fps)
