"""Denoiser training on (motion, blocking) pairs.

The unconditioned mode ignores the blocking sets; the conditioned mode
densifies each sample's blocking set into its condition. Conditioned
training uses precisely posed keys whose placement is time-perturbed (see
training_pairs): the model learns to retime and preserve posing, so coarse
blocking input remains its failure mode, which inference-time refinement
then repairs. Training minimizes mean squared x0-prediction error with
Adam and is deterministic given the seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .motion import BlockingPose, BlockingSet, Motion, Pose, build_condition
from .net import Adam, NetConfig, TinyDenoiserNet
from .schedule import NoiseSchedule


@dataclass(frozen=True)
class TrainConfig:
    mode: str = "U"                    # "U" or "R"
    hidden: int = 256
    depth: int = 4
    t_embed_dim: int = 32
    steps: int = 2000
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    val_fraction: float = 0.1
    diffusion_steps: int = 1000
    # Observation noise the conditioned model's analytic baseline assigns to
    # the dense condition; small values make the model preserve the authored
    # posing tightly.
    cond_obs_var: float = 1e-3

    def __post_init__(self) -> None:
        if self.mode not in ("U", "R"):
            raise ValueError(f"mode must be 'U' or 'R', got {self.mode!r}")
        if self.cond_obs_var <= 0.0:
            raise ValueError("cond_obs_var must be positive")


@dataclass
class TrainResult:
    net: TinyDenoiserNet
    final_loss: float
    val_mse: float
    config: TrainConfig
    loss_history: list[float] = field(repr=False, default_factory=list)

    def training_echo(self) -> dict:
        echo = asdict(self.config)
        echo["final_loss"] = self.final_loss
        echo["val_mse"] = self.val_mse
        return echo


def training_blocking(clip: Motion, seed: int, max_keys: int = 10,
                      time_jitter: int = 5) -> BlockingSet:
    """A supervision blocking set: fully specified key poses taken from the
    clean clip, placed at frames perturbed by up to +-time_jitter."""
    num_frames = clip.num_frames
    rng = np.random.default_rng(seed)
    k_hi = min(max_keys, max(2, num_frames // 2), num_frames)
    k = int(rng.integers(2, k_hi + 1)) if k_hi > 2 else k_hi
    sources = np.sort(rng.choice(num_frames, size=k, replace=False))
    placed: dict[int, int] = {}
    for f in sources:
        target = None
        for _ in range(100):
            offset = int(rng.integers(-time_jitter, time_jitter + 1))
            candidate = int(np.clip(int(f) + offset, 0, num_frames - 1))
            if candidate not in placed:
                target = candidate
                break
        if target is None:
            for delta in range(num_frames):
                for candidate in (int(f) - delta, int(f) + delta):
                    if 0 <= candidate < num_frames and candidate not in placed:
                        target = candidate
                        break
                if target is not None:
                    break
        assert target is not None
        placed[target] = int(f)
    num_joints = clip.num_joints
    poses = tuple(
        BlockingPose(frame, Pose(clip.frames[placed[frame]]),
                     np.ones(num_joints, dtype=bool), np.full(num_joints, 0.85))
        for frame in sorted(placed)
    )
    return BlockingSet(poses, num_frames)


def training_pairs(clips: list[Motion], seed: int, max_keys: int = 10,
                   time_jitter: int = 5) -> list[tuple[Motion, BlockingSet]]:
    return [(clip, training_blocking(clip, seed + i, max_keys, time_jitter))
            for i, clip in enumerate(clips)]


def _flatten_dataset(dataset: list[tuple[Motion, BlockingSet]], mode: str
                     ) -> tuple[np.ndarray, np.ndarray | None, tuple[int, int, int]]:
    if not dataset:
        raise ValueError("empty training dataset")
    frame_counts = {m.num_frames for m, _ in dataset}
    if len(frame_counts) != 1:
        raise ValueError(f"inconsistent F across dataset: {sorted(frame_counts)}")
    shape = dataset[0][0].frames.shape
    clips = np.stack([m.frames.reshape(-1) for m, _ in dataset])
    conds = None
    if mode == "R":
        for _, blocking in dataset:
            if blocking.timeline_length != shape[0]:
                raise ValueError("blocking timeline length must equal the clip frame count")
        conds = np.stack([build_condition(b).frames.reshape(-1) for _, b in dataset])
    return clips, conds, shape  # type: ignore[return-value]


def validation_mse(net: TinyDenoiserNet, clips: np.ndarray,
                   conds: np.ndarray | None, seed: int) -> float:
    """Mean squared x0 error over held-out clips on a fixed t grid."""
    if clips.shape[0] == 0:
        return float("nan")
    rng = np.random.default_rng(seed)
    t_grid = sorted({1, net.schedule.num_steps // 4, net.schedule.num_steps // 2,
                     (3 * net.schedule.num_steps) // 4, net.schedule.num_steps})
    total = 0.0
    for t in t_grid:
        noise = rng.standard_normal(clips.shape)
        s = net.schedule.signal_scale(t)
        n = net.schedule.noise_scale(t)
        y_t = s * clips + n * noise
        x0 = net.forward(y_t, np.full(clips.shape[0], t), conds)
        total += float(np.mean((x0 - clips) ** 2))
    return total / len(t_grid)


def train_denoiser(dataset: list[tuple[Motion, BlockingSet]],
                   config: TrainConfig) -> TrainResult:
    clips, conds, shape = _flatten_dataset(dataset, config.mode)
    num_frames, num_joints, feature_dim = shape
    schedule = NoiseSchedule.cosine(config.diffusion_steps)

    seq = np.random.SeedSequence(config.seed)
    init_seed, batch_seed, val_seed = (int(s.generate_state(1)[0]) for s in seq.spawn(3))

    # train/validation split
    n = clips.shape[0]
    n_val = int(round(config.val_fraction * n)) if config.val_fraction > 0 else 0
    n_val = min(max(n_val, 1 if config.val_fraction > 0 else 0), n - 1)
    perm = np.random.default_rng(batch_seed).permutation(n)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    train_clips = clips[train_idx]
    train_conds = conds[train_idx] if conds is not None else None

    stats_mean = train_clips.mean(axis=0)
    stats_var = train_clips.var(axis=0)
    cond_var = None
    if train_conds is not None:
        cond_var = np.full(train_clips.shape[1], config.cond_obs_var)

    net_config = NetConfig(
        num_frames=num_frames, num_joints=num_joints, feature_dim=feature_dim,
        hidden=config.hidden, depth=config.depth, t_embed_dim=config.t_embed_dim,
        conditional=(config.mode == "R"),
    )
    net = TinyDenoiserNet.create(net_config, stats_mean, stats_var, schedule,
                                 init_seed, cond_var=cond_var)
    if net.num_parameters >= 5e6:
        raise ValueError(f"network too large: {net.num_parameters} parameters")
    opt = Adam(net.params, learning_rate=config.learning_rate)
    rng = np.random.default_rng(batch_seed + 1)

    losses: list[float] = []
    n_train = train_clips.shape[0]
    flat = train_clips.shape[1]
    for _ in range(config.steps):
        idx = rng.integers(0, n_train, size=config.batch_size)
        t = rng.integers(1, schedule.num_steps + 1, size=config.batch_size)
        noise = rng.standard_normal((config.batch_size, flat))
        y = train_clips[idx]
        s1 = np.sqrt(schedule.alpha_bar[t])[:, None]
        s2 = np.sqrt(1.0 - schedule.alpha_bar[t])[:, None]
        y_t = s1 * y + s2 * noise
        batch_cond = train_conds[idx] if train_conds is not None else None

        x0, cache = net.forward(y_t, t, batch_cond, want_cache=True)
        resid = x0 - y
        loss = float(np.mean(resid * resid))
        losses.append(loss)
        d_x0 = (2.0 / resid.size) * resid
        grads = net.backward(cache, d_x0)
        opt.step(grads)

    tail = losses[-min(100, len(losses)):] if losses else [float("nan")]
    val_conds = conds[val_idx] if conds is not None else None
    val = validation_mse(net, clips[val_idx], val_conds, val_seed)
    return TrainResult(net=net, final_loss=float(np.mean(tail)), val_mse=val,
                       config=config, loss_history=losses)
