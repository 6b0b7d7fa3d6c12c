import numpy as np
import pytest

from blockdetail import synth_motion
from blockdetail.metrics import footskate
from blockdetail.skeleton import DEFAULT_SKELETON
from blockdetail.synth import KINDS


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_for_seed(kind):
    a = synth_motion(kind, 60, 123)
    b = synth_motion(kind, 60, 123)
    assert np.array_equal(a.frames, b.frames)
    c = synth_motion(kind, 60, 124)
    assert not np.array_equal(a.frames, c.frames)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("frames", [2, 7, 60, 121])
def test_valid_motion_any_length(kind, frames):
    m = synth_motion(kind, frames, 5)
    assert m.num_frames == frames
    assert np.isfinite(m.frames).all()


def test_idle_is_near_static():
    m = synth_motion("idle", 60, 3)
    world = m.world_positions()
    speed = np.linalg.norm(np.diff(world, axis=0), axis=2) * m.fps
    assert speed.max() < 0.05


def test_walk_zero_slip_footskate():
    for seed in range(5):
        m = synth_motion("walk", 60, seed)
        assert footskate(m, DEFAULT_SKELETON) < 1e-6


@pytest.mark.parametrize("kind", KINDS)
def test_ankles_never_penetrate(kind):
    for seed in range(4):
        m = synth_motion(kind, 60, seed)
        heights = m.world_positions()[:, list(DEFAULT_SKELETON.foot_joints), 1]
        assert heights.min() >= -1e-6


def test_walk_travels_forward():
    m = synth_motion("walk", 60, 8)
    assert m.frames[-1, 0, 2] - m.frames[0, 0, 2] > 0.5


def test_jump_leaves_ground():
    m = synth_motion("jump", 60, 2)
    heights = m.world_positions()[:, list(DEFAULT_SKELETON.foot_joints), 1]
    assert heights.max() > 0.05


def test_kick_foot_raises():
    m = synth_motion("kick", 60, 2)
    right_ankle = m.world_positions()[:, 15, 1]
    assert right_ankle.max() > 0.3


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown motion kind"):
        synth_motion("cartwheel", 60, 0)


def test_too_short_rejected():
    with pytest.raises(ValueError, match=">= 2"):
        synth_motion("walk", 1, 0)
