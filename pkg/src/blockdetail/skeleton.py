"""Skeleton description for the desk-scale 16-joint character."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SkeletonSpec:
    """Fixed per-character structure.

    joint_names: ordered list of J identifiers (joint 0 is the root).
    parent: per-joint parent index, -1 for the root.
    rest_local_position: [J, 3] metres. For the root this is its default
        world position; for every other joint it is the neutral
        root-relative offset (the value an unposed joint holds).
    important_joints: joints an animator typically poses in a blocking pass.
    foot_joints: ankle joints used for ground contact handling.
    """

    joint_names: tuple[str, ...]
    parent: tuple[int, ...]
    rest_local_position: np.ndarray
    important_joints: tuple[int, ...]
    foot_joints: tuple[int, ...]

    def __post_init__(self) -> None:
        rest = np.ascontiguousarray(self.rest_local_position, dtype=np.float64)
        if rest.shape != (len(self.joint_names), 3):
            raise ValueError(
                f"rest_local_position must be [J, 3], got {rest.shape} for J={len(self.joint_names)}"
            )
        rest.flags.writeable = False
        object.__setattr__(self, "rest_local_position", rest)
        object.__setattr__(self, "joint_names", tuple(self.joint_names))
        object.__setattr__(self, "parent", tuple(self.parent))
        object.__setattr__(self, "important_joints", tuple(self.important_joints))
        object.__setattr__(self, "foot_joints", tuple(self.foot_joints))
        self._validate()

    def _validate(self) -> None:
        j = self.num_joints
        if len(self.parent) != j:
            raise ValueError("parent list length must equal number of joints")
        if self.parent[0] != -1:
            raise ValueError("joint 0 must be the root (parent == -1)")
        # Every non-root joint must reach the root by following parents.
        for joint in range(1, j):
            seen = set()
            cur = joint
            while cur != 0:
                if cur in seen or not (0 <= cur < j):
                    raise ValueError(f"parent indices do not form a tree rooted at 0 (joint {joint})")
                seen.add(cur)
                cur = self.parent[cur]
                if cur == -1:
                    raise ValueError("only the root may have parent -1")
        if 0 not in self.important_joints:
            raise ValueError("important_joints must contain the root")
        for idx in (*self.important_joints, *self.foot_joints):
            if not 0 <= idx < j:
                raise ValueError(f"joint index {idx} out of range")

    @property
    def num_joints(self) -> int:
        return len(self.joint_names)

    @property
    def root_rest_height(self) -> float:
        return float(self.rest_local_position[0, 1])


_DESK_JOINTS = (
    "root",
    "spine",
    "neck",
    "head",
    "shoulder_l",
    "elbow_l",
    "wrist_l",
    "shoulder_r",
    "elbow_r",
    "wrist_r",
    "hip_l",
    "knee_l",
    "ankle_l",
    "hip_r",
    "knee_r",
    "ankle_r",
)

_DESK_PARENTS = (-1, 0, 1, 2, 1, 4, 5, 1, 7, 8, 0, 10, 11, 0, 13, 14)

# Root rest world position plus root-relative neutral offsets, metres, y-up.
_DESK_REST = np.array(
    [
        [0.00, 0.95, 0.00],   # root (world)
        [0.00, 0.25, 0.00],   # spine
        [0.00, 0.45, 0.00],   # neck
        [0.00, 0.58, 0.00],   # head
        [0.18, 0.42, 0.00],   # shoulder_l
        [0.24, 0.14, 0.00],   # elbow_l
        [0.26, -0.12, 0.00],  # wrist_l
        [-0.18, 0.42, 0.00],  # shoulder_r
        [-0.24, 0.14, 0.00],  # elbow_r
        [-0.26, -0.12, 0.00], # wrist_r
        [0.10, -0.05, 0.00],  # hip_l
        [0.10, -0.50, 0.00],  # knee_l
        [0.10, -0.95, 0.00],  # ankle_l
        [-0.10, -0.05, 0.00], # hip_r
        [-0.10, -0.50, 0.00], # knee_r
        [-0.10, -0.95, 0.00], # ankle_r
    ]
)

_DESK_IMPORTANT = (0, 4, 7, 5, 8, 10, 13, 11, 14)  # root, shoulders, elbows, hips, knees
_DESK_FEET = (12, 15)


def desk_skeleton() -> SkeletonSpec:
    """The default 16-joint skeleton used throughout the toolkit."""
    return SkeletonSpec(
        joint_names=_DESK_JOINTS,
        parent=_DESK_PARENTS,
        rest_local_position=_DESK_REST,
        important_joints=_DESK_IMPORTANT,
        foot_joints=_DESK_FEET,
    )


DEFAULT_SKELETON = desk_skeleton()
