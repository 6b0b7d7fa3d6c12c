"""Per-clip statistics vector used by the Fréchet-distance metric.

Layout (34 entries for the 16-joint desk skeleton):
  [ 0..23]  mean and std of per-frame world speed pooled within 12 joint
            groups: torso{spine,neck,head}, each arm joint individually
            (shoulders/elbows/wrists L+R), hips and knees individually,
            ankles pooled as one group
  [24..25]  mean, std of acceleration magnitude over all joints
  [26..27]  mean, std of root speed
  [28..31]  foot-height histogram fractions, bin edges 0.05 / 0.15 / 0.30 m
  [32..33]  mean, std of pose extent (max root-relative joint distance)
"""
from __future__ import annotations

import numpy as np

from .motion import Motion
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

FOOT_HEIGHT_BIN_EDGES = (0.05, 0.15, 0.30)


def joint_groups(skeleton: SkeletonSpec) -> list[tuple[int, ...]]:
    names = {n: i for i, n in enumerate(skeleton.joint_names)}
    groups: list[tuple[int, ...]] = [
        tuple(names[n] for n in ("spine", "neck", "head") if n in names)
    ]
    for name in ("shoulder_l", "shoulder_r", "elbow_l", "elbow_r",
                 "wrist_l", "wrist_r", "hip_l", "hip_r", "knee_l", "knee_r"):
        if name in names:
            groups.append((names[name],))
    groups.append(tuple(skeleton.foot_joints))
    return [g for g in groups if g]


def feature_dim(skeleton: SkeletonSpec = DEFAULT_SKELETON) -> int:
    return 2 * len(joint_groups(skeleton)) + 2 + 2 + 4 + 2


def motion_features(motion: Motion, skeleton: SkeletonSpec = DEFAULT_SKELETON) -> np.ndarray:
    """Deterministic fixed-length statistics vector of one clip."""
    world = motion.world_positions()
    fps = motion.fps
    vel = np.diff(world, axis=0) * fps                       # [F-1, J, 3] m/s
    speed = np.linalg.norm(vel, axis=2)                      # [F-1, J]
    out: list[float] = []
    for group in joint_groups(skeleton):
        pooled = speed[:, list(group)].ravel()
        out.append(float(pooled.mean()))
        out.append(float(pooled.std()))

    if vel.shape[0] >= 2:
        acc = np.linalg.norm(np.diff(vel, axis=0) * fps, axis=2).ravel()
        out += [float(acc.mean()), float(acc.std())]
    else:
        out += [0.0, 0.0]

    root_speed = speed[:, 0]
    out += [float(root_speed.mean()), float(root_speed.std())]

    heights = world[:, list(skeleton.foot_joints), 1].ravel()
    edges = FOOT_HEIGHT_BIN_EDGES
    total = max(heights.size, 1)
    out += [
        float(np.count_nonzero(heights < edges[0]) / total),
        float(np.count_nonzero((heights >= edges[0]) & (heights < edges[1])) / total),
        float(np.count_nonzero((heights >= edges[1]) & (heights < edges[2])) / total),
        float(np.count_nonzero(heights >= edges[2]) / total),
    ]

    extent = np.linalg.norm(motion.frames[:, 1:], axis=2).max(axis=1)
    out += [float(extent.mean()), float(extent.std())]
    vec = np.asarray(out, dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise ValueError("motion features must be finite")
    return vec


def feature_matrix(motions: list[Motion],
                   skeleton: SkeletonSpec = DEFAULT_SKELETON) -> np.ndarray:
    if not motions:
        raise ValueError("empty motion set")
    return np.stack([motion_features(m, skeleton) for m in motions])
