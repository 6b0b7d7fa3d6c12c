"""Motion quality metrics: foot skate, jitter, Fréchet distance on clip
features, and keyframe error ("blockdetail-metric-v1" definitions)."""
from __future__ import annotations

import numpy as np

from .detailing import match_pose
from .features import feature_matrix
from .motion import BlockingSet, Motion, Pose, pose_distance
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

FOOT_CONTACT_HEIGHT = 0.05  # metres
COVARIANCE_REGULARIZATION = 1e-6


def footskate(motion: Motion, skeleton: SkeletonSpec = DEFAULT_SKELETON,
              height_thresh: float = FOOT_CONTACT_HEIGHT) -> float:
    """Mean horizontal foot displacement per frame step, counted only when
    the foot is below height_thresh in both adjacent frames."""
    world = motion.world_positions()
    feet = list(skeleton.foot_joints)
    if not feet or motion.num_frames < 2:
        return 0.0
    pos = world[:, feet]                      # [F, nf, 3]
    heights = pos[:, :, 1]
    contact = (heights[:-1] < height_thresh) & (heights[1:] < height_thresh)
    delta = pos[1:] - pos[:-1]
    horiz = np.hypot(delta[:, :, 0], delta[:, :, 2])
    return float((horiz * contact).sum() / contact.size)


def jitter(motion: Motion) -> float:
    """Mean L2 norm of the third-order finite difference of world joint
    positions, in metres per cubed frame."""
    if motion.num_frames < 4:
        raise ValueError("jitter requires F >= 4")
    p = motion.world_positions()
    third = p[3:] - 3.0 * p[2:-1] + 3.0 * p[1:-2] - p[:-3]
    return float(np.linalg.norm(third, axis=2).mean())


def _shrink_covariance(cov: np.ndarray, n_samples: int) -> np.ndarray:
    dim = cov.shape[0]
    if n_samples < dim + 1:
        # Not enough samples for a stable estimate: shrink toward a scaled identity.
        gamma = 0.1
        cov = (1.0 - gamma) * cov + gamma * (np.trace(cov) / dim) * np.eye(dim)
    return cov + COVARIANCE_REGULARIZATION * np.eye(dim)


def frechet_distance(mu_a: np.ndarray, cov_a: np.ndarray,
                     mu_b: np.ndarray, cov_b: np.ndarray) -> float:
    """||mu_a - mu_b||^2 + Tr(cov_a + cov_b - 2 (cov_a cov_b)^{1/2}) with the
    matrix square root taken from the symmetrized product's eigensystem,
    negative eigenvalues clamped at zero."""
    diff = mu_a - mu_b
    prod = cov_a @ cov_b
    sym = 0.5 * (prod + prod.T)
    eigvals = np.linalg.eigvalsh(sym)
    cross = np.sqrt(np.clip(eigvals, 0.0, None)).sum()
    return float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * cross)


def fid(set_a: list[Motion], set_b: list[Motion],
        skeleton: SkeletonSpec = DEFAULT_SKELETON) -> float:
    """Fréchet distance between Gaussian fits of the two sets' clip features."""
    if not set_a or not set_b:
        raise ValueError("fid requires non-empty motion sets")
    feats_a = feature_matrix(set_a, skeleton)
    feats_b = feature_matrix(set_b, skeleton)
    return fid_from_features(feats_a, feats_b)


def fid_from_features(feats_a: np.ndarray, feats_b: np.ndarray) -> float:
    if feats_a.ndim != 2 or feats_b.ndim != 2 or feats_a.shape[1] != feats_b.shape[1]:
        raise ValueError("feature matrices must be [N, D] with a shared D")
    mu_a = feats_a.mean(axis=0)
    mu_b = feats_b.mean(axis=0)
    cov_a = _shrink_covariance(_sample_cov(feats_a), feats_a.shape[0])
    cov_b = _shrink_covariance(_sample_cov(feats_b), feats_b.shape[0])
    return frechet_distance(mu_a, cov_a, mu_b, cov_b)


def _sample_cov(feats: np.ndarray) -> np.ndarray:
    if feats.shape[0] < 2:
        return np.zeros((feats.shape[1], feats.shape[1]))
    return np.cov(feats, rowvar=False)


def keyframe_error(blocking: BlockingSet, generated: Motion, radius: int = 10) -> float:
    """Mean over keys of the RMS local-space error between each blocking
    pose and its best-matching generated frame within +-radius (the root is
    compared root-relative, matching the detailing matcher)."""
    frames = generated.frames
    errors = []
    for key in blocking.poses:
        f_star = match_pose(frames, key, radius)
        errors.append(pose_distance(Pose(frames[f_star]), key.pose, key.specified))
    return float(np.mean(errors))
