"""Versioned JSON file formats for motions, blocking sets, and traces.

All writers produce deterministic bytes (sorted keys, fixed separators) so
that a result generated through the HTTP service is byte-identical to the
same generation run through the CLI.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .motion import BlockingPose, BlockingSet, Motion, Pose
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

FORMAT_VERSION = 1


class MotionFileError(ValueError):
    """Raised for malformed or inconsistent motion/blocking files."""


def dumps_canonical(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _load_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MotionFileError(f"parse error at byte offset {exc.pos}: {exc.msg}") from exc


def _check_version(doc: Any, what: str) -> None:
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise MotionFileError(
            f"{what} file must carry format_version {FORMAT_VERSION}, got "
            f"{doc.get('format_version') if isinstance(doc, dict) else type(doc).__name__}"
        )


def skeleton_to_doc(skeleton: SkeletonSpec) -> dict:
    return {
        "joint_names": list(skeleton.joint_names),
        "parents": list(skeleton.parent),
        "rest": skeleton.rest_local_position.tolist(),
        "important_joints": list(skeleton.important_joints),
        "foot_joints": list(skeleton.foot_joints),
    }


def skeleton_from_doc(doc: dict) -> SkeletonSpec:
    try:
        return SkeletonSpec(
            joint_names=tuple(doc["joint_names"]),
            parent=tuple(int(p) for p in doc["parents"]),
            rest_local_position=np.asarray(doc["rest"], dtype=np.float64),
            important_joints=tuple(int(i) for i in doc.get("important_joints", (0,))),
            foot_joints=tuple(int(i) for i in doc.get("foot_joints", ())),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MotionFileError(f"invalid skeleton block: {exc}") from exc


def motion_to_doc(motion: Motion, skeleton: SkeletonSpec = DEFAULT_SKELETON) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "skeleton": skeleton_to_doc(skeleton),
        "fps": motion.fps,
        "frames": motion.frames.tolist(),
    }


def motion_from_doc(doc: Any, skeleton: SkeletonSpec | None = None) -> Motion:
    _check_version(doc, "motion")
    file_skel = skeleton_from_doc(doc["skeleton"]) if "skeleton" in doc else None
    expect = skeleton or file_skel or DEFAULT_SKELETON
    raw = doc.get("frames")
    if raw is None:
        raise MotionFileError("motion file is missing 'frames'")
    frames = np.asarray(raw, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[2] != 3:
        raise MotionFileError(f"frames must be F x J x 3 nested arrays, got shape {frames.shape}")
    if frames.shape[0] < 2:
        raise MotionFileError(f"motion requires F >= 2, got F={frames.shape[0]}")
    if frames.shape[1] != expect.num_joints:
        raise MotionFileError(
            f"skeleton mismatch: expected J={expect.num_joints}, D=3, got J={frames.shape[1]}"
        )
    bad = np.argwhere(~np.isfinite(frames))
    if bad.size:
        f, j, d = (int(v) for v in bad[0])
        raise MotionFileError(f"non-finite value at frame {f}, joint {j}, coord {d}")
    return Motion(frames, fps=float(doc.get("fps", 20.0)))


def save_motion(motion: Motion, path: str | Path,
                skeleton: SkeletonSpec = DEFAULT_SKELETON) -> None:
    Path(path).write_text(dumps_canonical(motion_to_doc(motion, skeleton)))


def load_motion(path: str | Path, skeleton: SkeletonSpec | None = None) -> Motion:
    return motion_from_doc(_load_json(path), skeleton)


def blocking_to_doc(blocking: BlockingSet) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "timeline_length": blocking.timeline_length,
        "poses": [
            {
                "frame": p.frame_index,
                "features": p.pose.features.tolist(),
                "specified": [bool(v) for v in p.specified],
                "tolerance": p.tolerance.tolist(),
            }
            for p in blocking.poses
        ],
    }


def blocking_from_doc(doc: Any) -> BlockingSet:
    _check_version(doc, "blocking")
    try:
        poses = []
        for entry in doc["poses"]:
            poses.append(
                BlockingPose(
                    frame_index=int(entry["frame"]),
                    pose=Pose(np.asarray(entry["features"], dtype=np.float64)),
                    specified=np.asarray(entry["specified"], dtype=bool),
                    tolerance=np.asarray(entry["tolerance"], dtype=np.float64),
                )
            )
        return BlockingSet(tuple(poses), int(doc["timeline_length"]))
    except MotionFileError:
        raise
    except (KeyError, TypeError) as exc:
        raise MotionFileError(f"invalid blocking file: missing or malformed field {exc}") from exc
    except ValueError as exc:
        raise MotionFileError(f"invalid blocking file: {exc}") from exc


def save_blocking(blocking: BlockingSet, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(blocking_to_doc(blocking)))


def load_blocking(path: str | Path) -> BlockingSet:
    return blocking_from_doc(_load_json(path))
