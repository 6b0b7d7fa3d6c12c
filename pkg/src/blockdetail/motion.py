"""Motion data model: poses, dense motions, blocking poses, and conditions.

Feature convention (D=3): the root joint stores its world position in
metres; every other joint stores its root-relative local position. The
neutral value of an unposed non-root joint is its rest offset from
``SkeletonSpec.rest_local_position``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .skeleton import SkeletonSpec

DEFAULT_FPS = 20.0
FEATURE_DIM = 3


def _frozen_f64(arr, shape: tuple[int, ...] | None, name: str) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if shape is not None and out.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        raise ValueError(f"{name} contains a non-finite entry at index {tuple(int(i) for i in bad)}")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Pose:
    """A single [J, 3] feature frame."""

    features: np.ndarray

    def __post_init__(self) -> None:
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] != FEATURE_DIM:
            raise ValueError(f"pose features must be [J, {FEATURE_DIM}], got {feats.shape}")
        if not np.all(np.isfinite(feats)):
            bad = np.argwhere(~np.isfinite(feats))[0]
            raise ValueError(f"pose has non-finite value at joint {int(bad[0])}, coord {int(bad[1])}")
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)

    @property
    def num_joints(self) -> int:
        return self.features.shape[0]

    def world_positions(self) -> np.ndarray:
        """[J, 3] world positions: root + local offsets (root row is the root itself)."""
        world = self.features.copy()
        world[1:] += self.features[0]
        return world


@dataclass(frozen=True)
class Motion:
    """A dense [F, J, 3] clip at a fixed frame rate."""

    frames: np.ndarray
    fps: float = DEFAULT_FPS

    def __post_init__(self) -> None:
        frames = np.ascontiguousarray(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != FEATURE_DIM:
            raise ValueError(f"motion frames must be [F, J, {FEATURE_DIM}], got {frames.shape}")
        if frames.shape[0] < 2:
            raise ValueError(f"motion requires F >= 2, got F={frames.shape[0]}")
        if not np.all(np.isfinite(frames)):
            bad = np.argwhere(~np.isfinite(frames))[0]
            raise ValueError(
                f"motion has non-finite value at frame {int(bad[0])}, joint {int(bad[1])}, coord {int(bad[2])}"
            )
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_joints(self) -> int:
        return self.frames.shape[1]

    def pose(self, frame: int) -> Pose:
        return Pose(self.frames[frame])

    def world_positions(self) -> np.ndarray:
        """[F, J, 3] world positions for every frame."""
        world = self.frames.copy()
        world[:, 1:] += self.frames[:, :1]
        return world


@dataclass(frozen=True)
class BlockingPose:
    """One animator-authored key: a partially specified pose with tolerances.

    specified marks animator-posed joints (the root is always specified);
    unspecified joints hold the neutral rest value. tolerance is the
    per-joint adherence weight in [0, 1] used by constraint refinement.
    """

    frame_index: int
    pose: Pose
    specified: np.ndarray
    tolerance: np.ndarray

    def __post_init__(self) -> None:
        spec = np.ascontiguousarray(self.specified, dtype=bool)
        tol = np.ascontiguousarray(self.tolerance, dtype=np.float64)
        j = self.pose.num_joints
        if spec.shape != (j,):
            raise ValueError(f"specified mask must have shape ({j},), got {spec.shape}")
        if tol.shape != (j,):
            raise ValueError(f"tolerance must have shape ({j},), got {tol.shape}")
        if not spec[0]:
            raise ValueError("the root joint must always be specified")
        if np.any(tol < 0.0) or np.any(tol > 1.0):
            raise ValueError("tolerance entries must lie in [0, 1]")
        if self.frame_index < 0:
            raise ValueError("frame_index must be non-negative")
        spec.flags.writeable = False
        tol.flags.writeable = False
        object.__setattr__(self, "frame_index", int(self.frame_index))
        object.__setattr__(self, "specified", spec)
        object.__setattr__(self, "tolerance", tol)

    def with_pose(self, pose: Pose) -> "BlockingPose":
        return BlockingPose(self.frame_index, pose, self.specified, self.tolerance)

    def with_tolerance(self, tolerance: np.ndarray) -> "BlockingPose":
        return BlockingPose(self.frame_index, self.pose, self.specified, tolerance)


def neutral_key(skeleton: SkeletonSpec, gt_pose: Pose, frame_index: int,
                specified: np.ndarray, tolerance: np.ndarray | float) -> BlockingPose:
    """Build a blocking pose that copies specified joints from gt_pose and
    leaves the rest at their neutral rest values."""
    spec = np.asarray(specified, dtype=bool)
    feats = skeleton.rest_local_position.copy()
    feats[spec] = gt_pose.features[spec]
    if np.isscalar(tolerance):
        tolerance = np.full(skeleton.num_joints, float(tolerance))
    return BlockingPose(frame_index, Pose(feats), spec, np.asarray(tolerance, dtype=np.float64))


@dataclass(frozen=True)
class BlockingSet:
    """K blocking poses with strictly increasing frame indices on a timeline."""

    poses: tuple[BlockingPose, ...]
    timeline_length: int

    def __post_init__(self) -> None:
        poses = tuple(self.poses)
        if len(poses) < 1:
            raise ValueError("no blocking poses")
        if len(poses) > self.timeline_length:
            raise ValueError("more blocking poses than timeline frames")
        frames = [p.frame_index for p in poses]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError(f"blocking pose frames must be strictly increasing, got {frames}")
        if frames[-1] >= self.timeline_length or frames[0] < 0:
            raise ValueError(
                f"blocking pose frames must lie in [0, {self.timeline_length}), got {frames}"
            )
        num_joints = {p.pose.num_joints for p in poses}
        if len(num_joints) != 1:
            raise ValueError("all blocking poses must share one skeleton size")
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "timeline_length", int(self.timeline_length))

    @property
    def num_keys(self) -> int:
        return len(self.poses)

    @property
    def num_joints(self) -> int:
        return self.poses[0].pose.num_joints

    def frame_indices(self) -> list[int]:
        return [p.frame_index for p in self.poses]

    def replace_pose(self, key_index: int, pose: Pose) -> "BlockingSet":
        poses = list(self.poses)
        poses[key_index] = poses[key_index].with_pose(pose)
        return BlockingSet(tuple(poses), self.timeline_length)

    def with_uniform_tolerance(self, c: float) -> "BlockingSet":
        tol = np.full(self.num_joints, float(c))
        return BlockingSet(tuple(p.with_tolerance(tol) for p in self.poses), self.timeline_length)


@dataclass(frozen=True)
class Condition:
    """Dense [F, J, 3] conditioning timeline built from blocking poses."""

    frames: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "frames", _frozen_f64(self.frames, None, "condition frames")
        )
        if self.frames.ndim != 3 or self.frames.shape[2] != FEATURE_DIM:
            raise ValueError(f"condition frames must be [F, J, {FEATURE_DIM}], got {self.frames.shape}")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


def build_condition(blocking: BlockingSet) -> Condition:
    """Densify a blocking set by per-channel linear interpolation.

    Frames before the first key hold the first key's pose, frames after the
    last hold the last key's pose.
    """
    if blocking.num_keys == 0:
        raise ValueError("no blocking poses")
    f_total = blocking.timeline_length
    j = blocking.num_joints
    key_frames = np.asarray(blocking.frame_indices(), dtype=np.float64)
    key_values = np.stack([p.pose.features for p in blocking.poses])  # [K, J, 3]

    out = np.empty((f_total, j, FEATURE_DIM))
    query = np.arange(f_total, dtype=np.float64)
    for joint in range(j):
        for coord in range(FEATURE_DIM):
            out[:, joint, coord] = np.interp(query, key_frames, key_values[:, joint, coord])
    return Condition(out)


def pose_distance(a: Pose, b: Pose, mask: np.ndarray) -> float:
    """RMS feature distance over masked joints.

    The root is compared root-relative, i.e. its world translation never
    contributes, so a retimed/shifted match is not penalized for global
    displacement. The root's coordinates still count toward the RMS
    denominator when the root is masked.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (a.num_joints,):
        raise ValueError(f"mask must have shape ({a.num_joints},), got {mask.shape}")
    if not mask.any():
        raise ValueError("pose_distance requires at least one masked joint")
    diff = a.features - b.features
    diff = diff.copy()
    diff[0] = 0.0  # root compared root-relative
    sel = diff[mask]
    return float(np.sqrt(np.mean(sel * sel)))
