"""Procedural clip synthesis: walk, kick, jump, idle.

All generators are deterministic for (kind, frame count, seed) and emit
C1-smooth trajectories. Feet are placed by assigning world positions
directly; during ground contact those positions are held constant, so the
clips are zero-slip by construction. Swing feet lift vertically above the
contact threshold before travelling horizontally, keeping foot-skate at
floating-point noise.
"""
from __future__ import annotations

import numpy as np

from .motion import DEFAULT_FPS, Motion
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

KINDS = ("walk", "kick", "jump", "idle")

# Swing feet travel at this clearance; comfortably above the 0.05 m
# contact threshold used by the foot-skate metric.
_MIN_SWING_CLEARANCE = 0.07

_ROOT, _SPINE, _NECK, _HEAD = 0, 1, 2, 3
_SH_L, _EL_L, _WR_L = 4, 5, 6
_SH_R, _EL_R, _WR_R = 7, 8, 9
_HIP_L, _KNEE_L, _ANK_L = 10, 11, 12
_HIP_R, _KNEE_R, _ANK_R = 13, 14, 15


def _smoothstep(u: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: zero first and second derivative at both ends."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def _bump(u: np.ndarray) -> np.ndarray:
    """sin^2 window: 0 with zero slope at u=0 and u=1, peak 1 at u=0.5."""
    u = np.clip(u, 0.0, 1.0)
    s = np.sin(np.pi * u)
    return s * s


def _hermite(u: np.ndarray, p0: float, m0: float, p1: float, m1: float) -> np.ndarray:
    """Cubic Hermite on [0,1]; m0/m1 are endpoint derivatives in u-units."""
    u = np.clip(u, 0.0, 1.0)
    u2 = u * u
    u3 = u2 * u
    return (
        (2 * u3 - 3 * u2 + 1) * p0
        + (u3 - 2 * u2 + u) * m0
        + (-2 * u3 + 3 * u2) * p1
        + (u3 - u2) * m1
    )


def _foot_swing(u: float, z_from: float, z_to: float, clearance: float) -> tuple[float, float]:
    """Vertical-lift / horizontal-travel / vertical-drop swing profile.

    Returns (height, z). The foot only moves horizontally while at full
    clearance, so no horizontal displacement ever happens near the ground.
    """
    lift_frac = 0.25
    if u < lift_frac:
        h = clearance * _smoothstep(np.asarray(u / lift_frac))
        return float(h), z_from
    if u > 1.0 - lift_frac:
        h = clearance * _smoothstep(np.asarray((1.0 - u) / lift_frac))
        return float(h), z_to
    travel = (u - lift_frac) / (1.0 - 2.0 * lift_frac)
    z = z_from + (z_to - z_from) * float(_smoothstep(np.asarray(travel)))
    return clearance, z


def _base_frames(skeleton: SkeletonSpec, num_frames: int) -> np.ndarray:
    frames = np.tile(skeleton.rest_local_position, (num_frames, 1, 1))
    return frames


def _finish(frames: np.ndarray, fps: float) -> Motion:
    return Motion(frames, fps=fps)


def _set_world_foot(frames: np.ndarray, i: int, joint: int, world: np.ndarray) -> None:
    frames[i, joint] = world - frames[i, _ROOT]


def _leg_chain(frames: np.ndarray, i: int, hip: int, knee: int, ankle: int) -> None:
    """Place the knee smoothly between hip and ankle with a forward bend
    proportional to how compressed the leg is."""
    hip_p = frames[i, hip]
    ank_p = frames[i, ankle]
    mid = 0.5 * (hip_p + ank_p)
    stretch = np.linalg.norm(ank_p - hip_p)
    rest_len = 0.90
    compression = max(0.0, rest_len - stretch)
    frames[i, knee] = mid + np.array([0.0, 0.0, 0.35 * compression + 0.02])


def _arms(frames: np.ndarray, i: int, swing: float, raise_amt: float = 0.0) -> None:
    """Counter-swing arms along z; optionally raise them (kick/jump accents)."""
    for side, sh, el, wr in ((1.0, _SH_L, _EL_L, _WR_L), (-1.0, _SH_R, _EL_R, _WR_R)):
        s = swing * side
        frames[i, el, 2] += 0.55 * s
        frames[i, wr, 2] += 1.0 * s
        frames[i, el, 1] += 0.30 * raise_amt
        frames[i, wr, 1] += 0.75 * raise_amt
        frames[i, wr, 2] += 0.10 * raise_amt


def _torso(frames: np.ndarray, i: int, lean: float, nod: float) -> None:
    frames[i, _SPINE, 2] += 0.3 * lean
    frames[i, _NECK, 2] += 0.7 * lean
    frames[i, _HEAD, 2] += 1.0 * lean + 0.05 * nod
    frames[i, _HEAD, 1] -= 0.02 * abs(nod)


def _synth_walk(skeleton: SkeletonSpec, num_frames: int, rng: np.random.Generator,
                fps: float) -> np.ndarray:
    speed = rng.uniform(0.55, 1.05)
    cycle = rng.uniform(0.9, 1.3)              # seconds per full gait cycle
    sway = rng.uniform(0.015, 0.035)
    bob = rng.uniform(0.01, 0.03)
    clearance = rng.uniform(_MIN_SWING_CLEARANCE, 0.12)
    arm_amp = rng.uniform(0.05, 0.12)
    lean = rng.uniform(0.01, 0.04)
    phase0 = rng.uniform(0.0, 1.0)

    base_h = skeleton.root_rest_height - rng.uniform(0.0, 0.03)
    stride = speed * cycle
    frames = _base_frames(skeleton, num_frames)
    hip_x = {(_ANK_L): skeleton.rest_local_position[_HIP_L, 0],
             (_ANK_R): skeleton.rest_local_position[_HIP_R, 0]}

    for i in range(num_frames):
        t = i / fps
        phase = t / cycle + phase0
        root = np.array([
            sway * np.sin(2.0 * np.pi * phase),
            base_h + bob * 0.5 * (np.cos(4.0 * np.pi * phase) - 1.0),
            speed * t,
        ])
        frames[i, _ROOT] = root

        for ankle, foot_phase in ((_ANK_L, phase), (_ANK_R, phase + 0.5)):
            k = int(np.floor(foot_phase))
            u = foot_phase - k
            plant_prev = stride * (k + 0.25) - phase0 * stride
            plant_next = plant_prev + stride
            if u < 0.5:  # stance: world position held fixed
                world = np.array([hip_x[ankle], 0.0, plant_prev])
            else:
                h, z = _foot_swing((u - 0.5) * 2.0, plant_prev, plant_next, clearance)
                world = np.array([hip_x[ankle], h, z])
            _set_world_foot(frames, i, ankle, world)

        _leg_chain(frames, i, _HIP_L, _KNEE_L, _ANK_L)
        _leg_chain(frames, i, _HIP_R, _KNEE_R, _ANK_R)
        _arms(frames, i, arm_amp * np.sin(2.0 * np.pi * phase))
        _torso(frames, i, lean, 0.3 * np.sin(2.0 * np.pi * phase))
    return frames


def _synth_idle(skeleton: SkeletonSpec, num_frames: int, rng: np.random.Generator,
                fps: float) -> np.ndarray:
    breathe_hz = rng.uniform(0.2, 0.35)
    amp = rng.uniform(0.002, 0.005)
    side_x = rng.uniform(-0.2, 0.2)
    base_h = skeleton.root_rest_height - rng.uniform(0.0, 0.02)

    frames = _base_frames(skeleton, num_frames)
    foot_l = np.array([side_x + skeleton.rest_local_position[_HIP_L, 0], 0.0, 0.0])
    foot_r = np.array([side_x + skeleton.rest_local_position[_HIP_R, 0], 0.0, 0.0])
    for i in range(num_frames):
        t = i / fps
        b = np.sin(2.0 * np.pi * breathe_hz * t)
        frames[i, _ROOT] = np.array([side_x, base_h + amp * b, 0.0])
        _set_world_foot(frames, i, _ANK_L, foot_l)
        _set_world_foot(frames, i, _ANK_R, foot_r)
        _leg_chain(frames, i, _HIP_L, _KNEE_L, _ANK_L)
        _leg_chain(frames, i, _HIP_R, _KNEE_R, _ANK_R)
        frames[i, _SPINE, 1] += 0.5 * amp * b
        frames[i, _NECK, 1] += amp * b
        frames[i, _HEAD, 1] += amp * b
        _arms(frames, i, 0.4 * amp * b)
    return frames


def _synth_kick(skeleton: SkeletonSpec, num_frames: int, rng: np.random.Generator,
                fps: float) -> np.ndarray:
    duration = num_frames / fps
    wind_start = rng.uniform(0.18, 0.28)
    strike = rng.uniform(0.45, 0.55)
    recover_end = rng.uniform(0.72, 0.85)
    kick_height = rng.uniform(0.55, 0.85)
    kick_reach = rng.uniform(0.45, 0.7)
    crouch = rng.uniform(0.03, 0.08)
    base_h = skeleton.root_rest_height - rng.uniform(0.0, 0.02)

    frames = _base_frames(skeleton, num_frames)
    plant_l = np.array([skeleton.rest_local_position[_HIP_L, 0], 0.0, 0.0])
    plant_r = np.array([skeleton.rest_local_position[_HIP_R, 0], 0.0, 0.0])

    for i in range(num_frames):
        t = (i / fps) / max(duration, 1e-9)  # normalized clip time
        # One smooth activation bump spanning wind-up -> strike -> recovery.
        if t <= wind_start or t >= recover_end:
            act = 0.0
        elif t <= strike:
            act = float(_bump(np.asarray(0.5 * (t - wind_start) / (strike - wind_start))))
        else:
            act = float(_bump(np.asarray(0.5 + 0.5 * (t - strike) / (recover_end - strike))))

        root = np.array([0.0, base_h - crouch * act, -0.08 * act])
        frames[i, _ROOT] = root
        _set_world_foot(frames, i, _ANK_L, plant_l)
        if act == 0.0:
            _set_world_foot(frames, i, _ANK_R, plant_r)
        else:
            # Cubing the reach term keeps the foot nearly vertical while it
            # is still close to the ground.
            world = plant_r + np.array([0.0, kick_height * act, kick_reach * act ** 3])
            _set_world_foot(frames, i, _ANK_R, world)
        _leg_chain(frames, i, _HIP_L, _KNEE_L, _ANK_L)
        _leg_chain(frames, i, _HIP_R, _KNEE_R, _ANK_R)
        _arms(frames, i, -0.06 * act, raise_amt=0.25 * act)
        _torso(frames, i, -0.05 * act, 0.0)
    return frames


def _synth_jump(skeleton: SkeletonSpec, num_frames: int, rng: np.random.Generator,
                fps: float) -> np.ndarray:
    duration = num_frames / fps
    crouch_depth = rng.uniform(0.10, 0.18)
    flight_frac = rng.uniform(0.16, 0.22)
    tuck = rng.uniform(0.12, 0.25)
    base_h = skeleton.root_rest_height - rng.uniform(0.0, 0.02)

    # Phase boundaries as fractions of the clip.
    t_crouch0, t_crouch1 = 0.10, 0.30
    t_takeoff = 0.42
    t_land = t_takeoff + flight_frac
    t_absorb = min(t_land + 0.14, 0.92)
    t_rise = min(t_absorb + 0.12, 0.98)

    flight_time = flight_frac * duration
    g = 9.81
    v0 = 0.5 * g * flight_time  # symmetric ballistic arc
    push_time = (t_takeoff - t_crouch1) * duration

    frames = _base_frames(skeleton, num_frames)
    plant_l = np.array([skeleton.rest_local_position[_HIP_L, 0], 0.0, 0.0])
    plant_r = np.array([skeleton.rest_local_position[_HIP_R, 0], 0.0, 0.0])

    def root_height(tn: float) -> float:
        if tn < t_crouch0:
            return base_h
        if tn < t_crouch1:
            u = (tn - t_crouch0) / (t_crouch1 - t_crouch0)
            return base_h - crouch_depth * float(_smoothstep(np.asarray(u)))
        if tn < t_takeoff:
            u = (tn - t_crouch1) / (t_takeoff - t_crouch1)
            return float(_hermite(np.asarray(u), base_h - crouch_depth, 0.0,
                                  base_h - 0.4 * crouch_depth, v0 * push_time))
        if tn < t_land:
            tau = (tn - t_takeoff) * duration
            return base_h - 0.4 * crouch_depth + v0 * tau - 0.5 * g * tau * tau
        if tn < t_absorb:
            u = (tn - t_land) / (t_absorb - t_land)
            absorb_time = (t_absorb - t_land) * duration
            return float(_hermite(np.asarray(u), base_h - 0.4 * crouch_depth,
                                  -v0 * absorb_time, base_h - 0.7 * crouch_depth, 0.0))
        if tn < t_rise:
            u = (tn - t_absorb) / (t_rise - t_absorb)
            return base_h - 0.7 * crouch_depth + 0.7 * crouch_depth * float(_smoothstep(np.asarray(u)))
        return base_h

    takeoff_root = root_height(t_takeoff)
    for i in range(num_frames):
        tn = (i / fps) / max(duration, 1e-9)
        h = root_height(tn)
        frames[i, _ROOT] = np.array([0.0, h, 0.0])
        if t_takeoff <= tn < t_land:
            u = (tn - t_takeoff) / (t_land - t_takeoff)
            w = float(_bump(np.asarray(u)))
            lift = w * (h - takeoff_root) + tuck * w
            foot_l = plant_l + np.array([0.0, max(lift, 0.0), 0.0])
            foot_r = plant_r + np.array([0.0, max(lift, 0.0), 0.0])
        else:
            foot_l, foot_r = plant_l, plant_r
        _set_world_foot(frames, i, _ANK_L, foot_l)
        _set_world_foot(frames, i, _ANK_R, foot_r)
        _leg_chain(frames, i, _HIP_L, _KNEE_L, _ANK_L)
        _leg_chain(frames, i, _HIP_R, _KNEE_R, _ANK_R)
        arm_phase = float(_bump(np.asarray((tn - t_crouch0) / max(t_rise - t_crouch0, 1e-9))))
        _arms(frames, i, 0.0, raise_amt=0.35 * arm_phase)
        _torso(frames, i, 0.04 * arm_phase, 0.0)
    return frames


_GENERATORS = {
    "walk": _synth_walk,
    "idle": _synth_idle,
    "kick": _synth_kick,
    "jump": _synth_jump,
}


def synth_motion(kind: str, num_frames: int, seed: int,
                 skeleton: SkeletonSpec = DEFAULT_SKELETON,
                 fps: float = DEFAULT_FPS) -> Motion:
    """Generate a deterministic procedural clip of the given kind."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown motion kind {kind!r}; expected one of {KINDS}")
    if num_frames < 2:
        raise ValueError("num_frames must be >= 2")
    rng = np.random.default_rng(seed)
    frames = _GENERATORS[kind](skeleton, num_frames, rng, fps)
    return _finish(frames, fps)


def synth_dataset(count: int, num_frames: int, seed: int,
                  kinds: tuple[str, ...] = KINDS,
                  skeleton: SkeletonSpec = DEFAULT_SKELETON,
                  fps: float = DEFAULT_FPS) -> list[Motion]:
    """A deterministic mixed-kind dataset; clip i uses kind kinds[i % len] and seed seed+i."""
    return [
        synth_motion(kinds[i % len(kinds)], num_frames, seed + i, skeleton, fps)
        for i in range(count)
    ]
