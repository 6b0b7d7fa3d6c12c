import numpy as np
import pytest

from blockdetail import (BlockingPose, BlockingSet, GaussianDenoiserR,
                         GaussianDenoiserU, GaussianMotionPrior, Motion,
                         NoiseSchedule, Pose, build_condition, pose_distance)
from blockdetail.baselines import r_no_tolerance_sample
from blockdetail.benchmark import BenchmarkSpec, make_blocking
from blockdetail.detailing import (RefinementConfig, blend_key, detail_motion,
                                   ground_fix, match_pose, refine_condition,
                                   trace_from_doc, trace_to_doc)
from blockdetail.skeleton import DEFAULT_SKELETON
from blockdetail.synth import synth_motion

J = DEFAULT_SKELETON.num_joints


def make_key(frame, features, specified=None, tol=0.85):
    spec = np.ones(J, dtype=bool) if specified is None else specified
    return BlockingPose(frame, Pose(features), spec, np.full(J, tol))


@pytest.fixture(scope="module")
def gauss_models():
    sched = NoiseSchedule.cosine(1000)
    mean = np.tile(DEFAULT_SKELETON.rest_local_position, (60, 1, 1))
    prior = GaussianMotionPrior.from_kernel(mean, variance=0.02)
    return GaussianDenoiserR(prior, sched), GaussianDenoiserU(prior, sched), sched


def grounded_blocking(seed=3, tol=0.85):
    """Benchmark blocking with penetration-free keys (unposed ankles lifted
    to the ground plane), so the ground fix is a no-op on the inputs."""
    gt = synth_motion("walk", 60, seed)
    blocking = make_blocking(gt, BenchmarkSpec(clip_length=60), seed, tolerance=tol)
    fixed = tuple(ground_fix(k, DEFAULT_SKELETON) for k in blocking.poses)
    return BlockingSet(fixed, blocking.timeline_length)


class TestMatchPose:
    def test_exact_match_found_at_offset(self):
        rng = np.random.default_rng(0)
        proposal = rng.standard_normal((60, J, 3))
        key = make_key(20, proposal[23].copy())
        assert match_pose(proposal, key, 10) == 23

    def test_radius_zero_returns_key_frame(self):
        rng = np.random.default_rng(1)
        proposal = rng.standard_normal((60, J, 3))
        for f in (0, 13, 59):
            key = make_key(f, rng.standard_normal((J, 3)))
            assert match_pose(proposal, key, 0) == f

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(2)
        for trial in range(300):
            num_frames = int(rng.integers(4, 40))
            proposal = rng.standard_normal((num_frames, J, 3))
            f_k = int(rng.integers(0, num_frames))
            radius = int(rng.integers(0, 14))
            spec = rng.random(J) < 0.5
            spec[0] = True
            key = make_key(f_k, rng.standard_normal((J, 3)), spec)
            got = match_pose(proposal, key, radius)
            # oracle: exhaustive scan with the documented tie-break
            best = None
            for f in range(max(0, f_k - radius), min(num_frames - 1, f_k + radius) + 1):
                d = pose_distance(Pose(proposal[f]), key.pose, key.specified)
                cand = (d, abs(f - f_k), f)
                if best is None or cand < best:
                    best = cand
            assert got == best[2]

    def test_tie_break_prefers_nearer_then_smaller(self):
        proposal = np.zeros((9, J, 3))
        key = make_key(4, np.ones((J, 3)))  # every window frame ties
        assert match_pose(proposal, key, 3) == 4
        key_edge = make_key(1, np.ones((J, 3)))
        # frames 0..4 all tie; nearest is 1 itself
        assert match_pose(proposal, key_edge, 3) == 1
        # equidistant tie: |0-1| == |2-1| -> smaller frame wins
        proposal2 = np.zeros((3, J, 3))
        proposal2[1] = 5.0
        key_mid = make_key(1, np.zeros((J, 3)))
        assert match_pose(proposal2, key_mid, 1) == 0


class TestBlendKey:
    def test_full_adherence_returns_key(self):
        rng = np.random.default_rng(3)
        key = make_key(0, rng.standard_normal((J, 3)), tol=1.0)
        prop = Pose(rng.standard_normal((J, 3)))
        assert np.array_equal(blend_key(key, prop).features, key.pose.features)

    def test_full_replacement_returns_proposal(self):
        rng = np.random.default_rng(4)
        key = make_key(0, rng.standard_normal((J, 3)), tol=0.0)
        prop = Pose(rng.standard_normal((J, 3)))
        assert np.array_equal(blend_key(key, prop).features, prop.features)

    def test_scalar_blend_value(self):
        feats = np.zeros((J, 3))
        feats[2, 0] = 1.0
        key = make_key(0, feats, tol=0.85)
        blended = blend_key(key, Pose(np.zeros((J, 3))))
        assert blended.features[2, 0] == pytest.approx(0.85, abs=1e-15)

    def test_blend_equation_randomized(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            c = rng.random(J)
            key = BlockingPose(0, Pose(rng.standard_normal((J, 3))),
                               np.ones(J, dtype=bool), c)
            prop = Pose(rng.standard_normal((J, 3)))
            got = blend_key(key, prop).features
            want = c[:, None] * key.pose.features + (1 - c[:, None]) * prop.features
            assert np.abs(got - want).max() < 1e-12

    def test_tolerance_monotonicity_of_displacement(self):
        """Displacement from the original key is non-increasing in each
        tolerance entry (exact, affine blend)."""
        rng = np.random.default_rng(6)
        base = rng.standard_normal((J, 3))
        prop = Pose(rng.standard_normal((J, 3)))
        for joint in (0, 5, 11):
            last = None
            for c in (0.0, 0.25, 0.5, 0.75, 1.0):
                tol = np.full(J, 0.5)
                tol[joint] = c
                key = BlockingPose(0, Pose(base), np.ones(J, dtype=bool), tol)
                blended = blend_key(key, prop)
                disp = np.linalg.norm(blended.features[joint] - base[joint])
                if last is not None:
                    assert disp <= last + 1e-12
                last = disp


class TestGroundFix:
    def test_no_penetration_is_identity(self):
        gt = synth_motion("walk", 60, 1)
        key = ground_fix(make_key(0, gt.frames[10]), DEFAULT_SKELETON)
        again = ground_fix(key, DEFAULT_SKELETON)
        assert again is key

    def test_single_ankle_projected(self):
        feats = DEFAULT_SKELETON.rest_local_position.copy()
        root_y = feats[0, 1]
        feats[12, 1] = -root_y - 0.03  # left ankle 3 cm below ground
        fixed = ground_fix(make_key(0, feats), DEFAULT_SKELETON)
        world = fixed.pose.world_positions()
        assert world[12, 1] == pytest.approx(0.0, abs=1e-12)
        assert np.array_equal(fixed.pose.features[15], feats[15])
        assert fixed.pose.features[0, 1] == root_y

    def test_both_ankles_raise_root_then_clamp(self):
        feats = DEFAULT_SKELETON.rest_local_position.copy()
        root_y = feats[0, 1]
        feats[12, 1] = -root_y - 0.02
        feats[15, 1] = -root_y - 0.05
        fixed = ground_fix(make_key(0, feats), DEFAULT_SKELETON)
        assert fixed.pose.features[0, 1] == pytest.approx(root_y + 0.05, abs=1e-12)
        world = fixed.pose.world_positions()
        assert np.all(world[[12, 15], 1] >= 0.0)
        # non-foot joints unchanged in root-relative terms
        others = [j for j in range(J) if j not in (0, 12, 15)]
        assert np.array_equal(fixed.pose.features[others], feats[others])

    def test_all_heights_non_negative_fuzz(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            feats = rng.standard_normal((J, 3))
            fixed = ground_fix(make_key(0, feats), DEFAULT_SKELETON)
            world = fixed.pose.world_positions()
            assert np.all(world[list(DEFAULT_SKELETON.foot_joints), 1] >= -1e-9)


class TestRefineCondition:
    def test_tolerance_one_reproduces_original_condition(self):
        blocking = grounded_blocking(seed=4, tol=1.0)
        rng = np.random.default_rng(0)
        proposal = rng.standard_normal((60, J, 3))
        _, cond, _ = refine_condition(blocking, proposal, RefinementConfig())
        assert np.array_equal(cond.frames, build_condition(blocking).frames)

    def test_full_replacement_condition(self):
        blocking = grounded_blocking(seed=5, tol=0.0)
        rng = np.random.default_rng(1)
        proposal = rng.standard_normal((60, J, 3))
        config = RefinementConfig(search_radius=0, apply_ground_fix=False)
        new_blocking, cond, event = refine_condition(blocking, proposal, config)
        for key, new_key in zip(blocking.poses, new_blocking.poses):
            assert np.array_equal(new_key.pose.features, proposal[key.frame_index])
        # condition interpolates the proposal's key frames
        assert np.array_equal(cond.frames, build_condition(new_blocking).frames)

    def test_half_blend_is_elementwise_mean(self):
        gt = synth_motion("kick", 60, 6)
        key = make_key(30, gt.frames[30], tol=0.5)
        blocking = BlockingSet((key,), 60)
        rng = np.random.default_rng(2)
        proposal = rng.standard_normal((60, J, 3))
        config = RefinementConfig(search_radius=0, apply_ground_fix=False)
        _, cond, event = refine_condition(blocking, proposal, config)
        want = 0.5 * key.pose.features + 0.5 * proposal[30]
        assert np.abs(cond.frames[30] - want).max() < 1e-12

    def test_key_frames_do_not_move(self):
        blocking = grounded_blocking(seed=7)
        rng = np.random.default_rng(3)
        proposal = rng.standard_normal((60, J, 3))
        new_blocking, _, _ = refine_condition(blocking, proposal, RefinementConfig())
        assert new_blocking.frame_indices() == blocking.frame_indices()

    def test_event_records_window_and_piecewise_linear_snapshot(self):
        blocking = grounded_blocking(seed=8)
        rng = np.random.default_rng(4)
        proposal = rng.standard_normal((60, J, 3))
        config = RefinementConfig(search_radius=10)
        new_blocking, cond, event = refine_condition(blocking, proposal, config, t=300)
        for f_star, key in zip(event.matched_frames, blocking.poses):
            assert abs(f_star - key.frame_index) <= 10
            assert 0 <= f_star < 60
        assert np.array_equal(event.condition, build_condition(new_blocking).frames)


class TestDetailMotion:
    def test_identity_reduction_tolerance_one(self, gauss_models):
        denoiser_r, denoiser_u, _ = gauss_models
        blocking = grounded_blocking(seed=9, tol=1.0)
        base = r_no_tolerance_sample(denoiser_r, blocking, 555)
        detailed, trace = detail_motion(blocking, denoiser_r, denoiser_u,
                                        RefinementConfig(), 555)
        assert np.array_equal(base.frames, detailed.frames)
        assert len(trace) == 10

    def test_identity_reduction_without_ground_fix(self, gauss_models):
        """Raw benchmark keys (penetrating ankles allowed) with the fix off."""
        denoiser_r, denoiser_u, _ = gauss_models
        gt = synth_motion("walk", 60, 10)
        blocking = make_blocking(gt, BenchmarkSpec(clip_length=60), 10, tolerance=1.0)
        base = r_no_tolerance_sample(denoiser_r, blocking, 556)
        detailed, _ = detail_motion(blocking, denoiser_r, denoiser_u,
                                    RefinementConfig(apply_ground_fix=False), 556)
        assert np.array_equal(base.frames, detailed.frames)

    def test_cadence_counts(self, gauss_models):
        denoiser_r, denoiser_u, sched = gauss_models
        blocking = grounded_blocking(seed=11)
        _, trace = detail_motion(blocking, denoiser_r, denoiser_u,
                                 RefinementConfig(cadence=100), 1)
        assert trace.event_steps() == list(range(1000, 0, -100))
        _, trace_none = detail_motion(blocking, denoiser_r, denoiser_u,
                                      RefinementConfig(cadence=1001), 1)
        assert len(trace_none) == 0

    def test_full_replacement_posts_equal_proposal(self, gauss_models):
        denoiser_r, denoiser_u, _ = gauss_models
        blocking = grounded_blocking(seed=12, tol=0.0)
        config = RefinementConfig(search_radius=0, apply_ground_fix=False, cadence=250)
        _, trace = detail_motion(blocking, denoiser_r, denoiser_u, config, 2)
        assert len(trace) == 4
        frames = blocking.frame_indices()
        for event in trace.events:
            assert list(event.matched_frames) == frames

    def test_trace_round_trip(self, gauss_models):
        denoiser_r, denoiser_u, _ = gauss_models
        blocking = grounded_blocking(seed=13)
        _, trace = detail_motion(blocking, denoiser_r, denoiser_u,
                                 RefinementConfig(cadence=500), 3)
        doc = trace_to_doc(trace)
        back = trace_from_doc(doc)
        assert back.event_steps() == trace.event_steps()
        for a, b in zip(trace.events, back.events):
            assert np.array_equal(a.condition, b.condition)
            assert a.matched_frames == b.matched_frames

    def test_schedule_mismatch_rejected(self, gauss_models):
        denoiser_r, _, _ = gauss_models
        other_sched = NoiseSchedule.cosine(500)
        mean = np.tile(DEFAULT_SKELETON.rest_local_position, (60, 1, 1))
        other_u = GaussianDenoiserU(GaussianMotionPrior.from_kernel(mean), other_sched)
        with pytest.raises(ValueError, match="share one noise schedule"):
            detail_motion(grounded_blocking(), denoiser_r, other_u)
