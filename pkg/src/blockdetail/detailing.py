"""Tolerance-weighted constraint refinement interleaved with sampling.

Every N denoising steps an unconditioned proposal is generated from the
same noisy state the conditioned model sees; each blocking pose is matched
against the proposal within a temporal search window, blended toward the
matched pose under its per-joint tolerance vector, optionally ground-fixed,
and the dense condition is rebuilt from the updated keys. The key frame
indices themselves never move: retiming is the conditioned model's job,
refinement edits pose content only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motion import (BlockingPose, BlockingSet, Condition, Motion, Pose,
                     build_condition, pose_distance)
from .sampler import ancestral_sample
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

DEFAULT_CADENCE = 100
DEFAULT_SEARCH_RADIUS = 10
DEFAULT_TOLERANCE = 0.85

# Per-joint tolerance presets surfaced by the CLI and UI.
TOLERANCE_PRESETS = {"preserve": 0.95, "default": DEFAULT_TOLERANCE, "free": 0.3}


@dataclass(frozen=True)
class RefinementConfig:
    cadence: int = DEFAULT_CADENCE          # refine every N denoising steps
    search_radius: int = DEFAULT_SEARCH_RADIUS
    apply_ground_fix: bool = True
    default_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        if self.search_radius < 0:
            raise ValueError("search_radius must be >= 0")
        if not 0.0 <= self.default_tolerance <= 1.0:
            raise ValueError("default_tolerance must lie in [0, 1]")


@dataclass(frozen=True)
class RefinementEvent:
    t: int
    matched_frames: tuple[int, ...]      # f_k* per key
    pre_blend: np.ndarray                # [K, J, 3] key features before blending
    post_blend: np.ndarray               # [K, J, 3] key features after blend (+ ground fix)
    condition: np.ndarray                # [F, J, 3] snapshot installed after this event


@dataclass
class RefinementTrace:
    events: list[RefinementEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def event_steps(self) -> list[int]:
        return [e.t for e in self.events]


def match_pose(proposal: np.ndarray, key: BlockingPose, radius: int) -> int:
    """argmin over frames within +-radius of the key's frame of the masked
    pose distance; ties break toward the smaller |f - f_k|, then smaller f."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    proposal = np.asarray(proposal, dtype=np.float64)
    num_frames = proposal.shape[0]
    f_k = key.frame_index
    lo = max(0, f_k - radius)
    hi = min(num_frames - 1, f_k + radius)
    best = None
    for f in range(lo, hi + 1):
        d = pose_distance(Pose(proposal[f]), key.pose, key.specified)
        rank = (d, abs(f - f_k), f)
        if best is None or rank < best:
            best = rank
    assert best is not None
    return best[2]


def blend_key(key: BlockingPose, proposal_pose: Pose) -> Pose:
    """C_k * key + (1 - C_k) * proposal, tolerance broadcast over coordinates."""
    if proposal_pose.num_joints != key.pose.num_joints:
        raise ValueError("proposal pose has a different joint count")
    c = key.tolerance[:, None]
    return Pose(c * key.pose.features + (1.0 - c) * proposal_pose.features)


def ground_fix(key: BlockingPose, skeleton: SkeletonSpec = DEFAULT_SKELETON) -> BlockingPose:
    """Project penetrating feet back to the ground plane (y = 0).

    If every foot penetrates, the root is first raised by the deepest
    penetration; any residual penetration is then clamped per foot. Joints
    other than the feet keep their root-relative values.
    """
    feet = skeleton.foot_joints
    if not feet:
        return key
    feats = key.pose.features
    root_y = feats[0, 1]
    heights = np.array([root_y + feats[j, 1] for j in feet])
    if np.all(heights >= 0.0):
        return key
    out = feats.copy()
    if np.all(heights < 0.0):
        out[0, 1] += float(-heights.min())
    root_y = out[0, 1]
    for j in feet:
        if root_y + out[j, 1] < 0.0:
            out[j, 1] = -root_y
    return key.with_pose(Pose(out))


def refine_condition(blocking: BlockingSet, proposal: np.ndarray,
                     config: RefinementConfig,
                     skeleton: SkeletonSpec = DEFAULT_SKELETON,
                     t: int = 0) -> tuple[BlockingSet, Condition, RefinementEvent]:
    """One refinement pass: match, blend, optionally ground-fix every key,
    then rebuild the dense condition from the updated blocking set."""
    proposal = np.asarray(proposal, dtype=np.float64)
    matched: list[int] = []
    new_poses: list[BlockingPose] = []
    pre = np.stack([p.pose.features for p in blocking.poses])
    for key in blocking.poses:
        f_star = match_pose(proposal, key, config.search_radius)
        matched.append(f_star)
        refined = key.with_pose(blend_key(key, Pose(proposal[f_star])))
        if config.apply_ground_fix:
            refined = ground_fix(refined, skeleton)
        new_poses.append(refined)
    new_blocking = BlockingSet(tuple(new_poses), blocking.timeline_length)
    condition = build_condition(new_blocking)
    event = RefinementEvent(
        t=t,
        matched_frames=tuple(matched),
        pre_blend=pre,
        post_blend=np.stack([p.pose.features for p in new_poses]),
        condition=condition.frames,
    )
    return new_blocking, condition, event


def detail_motion(blocking: BlockingSet, denoiser_r, denoiser_u,
                  config: RefinementConfig = RefinementConfig(),
                  seed: int = 0,
                  skeleton: SkeletonSpec = DEFAULT_SKELETON,
                  fps: float = 20.0,
                  on_event=None) -> tuple[Motion, RefinementTrace]:
    """Sample the conditioned model while refining its condition.

    Refinement fires at steps with t % cadence == 0 (counts to T // N events
    for divisible settings). The unconditioned proposal is evaluated on the
    same noisy state the conditioned model saw at that step and consumes no
    randomness, so with all tolerances at 1.0 the run is bit-identical to
    plain conditioned sampling under the same seed.
    """
    schedule = denoiser_r.schedule
    if denoiser_u.schedule is not schedule and not np.array_equal(
            denoiser_u.schedule.alpha_bar, schedule.alpha_bar):
        raise ValueError("conditioned and unconditioned models must share one noise schedule")

    state = {
        "blocking": blocking,
        "condition": build_condition(blocking),
    }
    trace = RefinementTrace()

    def denoise_fn(y_t: np.ndarray, t: int) -> np.ndarray:
        return denoiser_r.evaluate(state["condition"].frames, t, y_t)

    def hook(t: int, y_t: np.ndarray, _x0: np.ndarray) -> None:
        if t % config.cadence != 0:
            return
        proposal = denoiser_u.evaluate(y_t, t)
        new_blocking, condition, event = refine_condition(
            state["blocking"], proposal, config, skeleton, t=t)
        state["blocking"] = new_blocking
        state["condition"] = condition
        trace.events.append(event)
        if on_event is not None:
            on_event(event)

    shape = (blocking.timeline_length, blocking.num_joints, 3)
    y0 = ancestral_sample(denoise_fn, schedule, shape, seed, step_hook=hook)
    return Motion(y0, fps=fps), trace


def trace_to_doc(trace: RefinementTrace) -> dict:
    return {
        "format_version": 1,
        "events": [
            {
                "t": e.t,
                "matched_frames": list(e.matched_frames),
                "pre_blend": e.pre_blend.tolist(),
                "post_blend": e.post_blend.tolist(),
                "condition": e.condition.tolist(),
            }
            for e in trace.events
        ],
    }


def trace_from_doc(doc: dict) -> RefinementTrace:
    if doc.get("format_version") != 1:
        raise ValueError("unsupported trace format version")
    events = [
        RefinementEvent(
            t=int(e["t"]),
            matched_frames=tuple(int(f) for f in e["matched_frames"]),
            pre_blend=np.asarray(e["pre_blend"], dtype=np.float64),
            post_blend=np.asarray(e["post_blend"], dtype=np.float64),
            condition=np.asarray(e["condition"], dtype=np.float64),
        )
        for e in doc["events"]
    ]
    return RefinementTrace(events)
