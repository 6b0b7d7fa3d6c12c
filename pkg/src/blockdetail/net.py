"""Small fully connected residual x0-predictor with hand-derived backprop.

The prediction is an analytic baseline plus a learned correction. The
baseline is the exact Gaussian posterior mean of a per-channel temporal
prior fitted to the dataset (per-frame variances scaled by a shared
squared-exponential correlation); the condition-taking variant also
conditions the baseline on the dense condition under a per-channel
observation noise fitted from the data. The correction network sees the
whitened noisy motion, a sinusoidal timestep embedding, and (when
conditional) the normalized condition, and its output passes through a
temporal smoother so a small model cannot inject frame-rate noise.
Gradients are implemented directly over the dense layers and are checked
against finite differences in the test suite.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any

import numpy as np

from .schedule import NoiseSchedule

CHECKPOINT_MAGIC = b"BDNET1\n"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetConfig:
    num_frames: int
    num_joints: int
    feature_dim: int = 3
    hidden: int = 256
    depth: int = 4
    t_embed_dim: int = 32
    conditional: bool = False
    # Corrections are passed through a temporal Gaussian smoother of this
    # length (frames); motion corrections live in a smooth subspace, which
    # keeps a small model from injecting frame-rate noise. 0 disables it.
    smooth_length: float = 1.5
    # Temporal correlation length (frames) of the analytic Gaussian baseline
    # the network corrects. 0 falls back to a per-element baseline.
    skip_length: float = 3.0

    @property
    def flat_dim(self) -> int:
        return self.num_frames * self.num_joints * self.feature_dim

    @property
    def input_dim(self) -> int:
        extra = self.flat_dim if self.conditional else 0
        return self.flat_dim + self.t_embed_dim + extra


def time_embedding(t: np.ndarray, dim: int) -> np.ndarray:
    """Classic sinusoidal embedding of the raw timestep index."""
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / max(half - 1, 1))
    ang = np.asarray(t, dtype=np.float64)[:, None] * freqs[None, :]
    return np.concatenate([np.sin(ang), np.cos(ang)], axis=1)


def _param_names(config: NetConfig) -> list[str]:
    names = ["w_in", "b_in"]
    for i in range(config.depth):
        names += [f"w1_{i}", f"b1_{i}", f"w2_{i}", f"b2_{i}"]
    names += ["w_out", "b_out"]
    return names


def init_params(config: NetConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """He-style init; the final projection starts at zero so the untrained
    network falls back to the analytic per-element estimate."""
    h = config.hidden
    params: dict[str, np.ndarray] = {
        "w_in": rng.standard_normal((config.input_dim, h)) * np.sqrt(2.0 / config.input_dim),
        "b_in": np.zeros(h),
    }
    for i in range(config.depth):
        params[f"w1_{i}"] = rng.standard_normal((h, h)) * np.sqrt(2.0 / h)
        params[f"b1_{i}"] = np.zeros(h)
        params[f"w2_{i}"] = rng.standard_normal((h, h)) * (0.5 * np.sqrt(2.0 / h))
        params[f"b2_{i}"] = np.zeros(h)
    params["w_out"] = np.zeros((h, config.flat_dim))
    params["b_out"] = np.zeros(config.flat_dim)
    return params


class TinyDenoiserNet:
    """x0-predictor: x0 = gaussian_baseline(y_t, t[, X]) + scaled correction."""

    def __init__(self, config: NetConfig, params: dict[str, np.ndarray],
                 stats_mean: np.ndarray, stats_var: np.ndarray,
                 schedule: NoiseSchedule,
                 cond_var: np.ndarray | None = None):
        self.config = config
        self.params = params
        self.stats_mean = np.asarray(stats_mean, dtype=np.float64).reshape(-1)
        self.stats_var = np.asarray(stats_var, dtype=np.float64).reshape(-1)
        if self.stats_mean.shape[0] != config.flat_dim or self.stats_var.shape[0] != config.flat_dim:
            raise ValueError("dataset statistics must match the flattened motion size")
        if np.any(self.stats_var < 0.0):
            raise ValueError("variance statistics must be non-negative")
        if config.conditional:
            if cond_var is None:
                cond_var = np.full(config.flat_dim, 0.01)
            self.cond_var = np.maximum(
                np.asarray(cond_var, dtype=np.float64).reshape(-1), 1e-6)
            if self.cond_var.shape[0] != config.flat_dim:
                raise ValueError("condition-noise statistics must match the motion size")
        else:
            self.cond_var = None
        self.schedule = schedule
        self._scale = np.sqrt(self.stats_var)
        self._cond_scale = np.sqrt(self.stats_var + 1e-6)
        self._smoother = None
        if config.smooth_length > 0.0:
            idx = np.arange(config.num_frames, dtype=np.float64)
            k = np.exp(-((idx[:, None] - idx[None, :]) ** 2)
                       / (2.0 * config.smooth_length ** 2))
            self._smoother = k / k.sum(axis=1, keepdims=True)
        self._init_baseline()

    def _init_baseline(self) -> None:
        """Eigendecompose each channel's prior covariance D R D + jitter I,
        where D holds the channel's per-frame standard deviations and R is a
        shared squared-exponential temporal correlation."""
        cfg = self.config
        f = cfg.num_frames
        channels = cfg.num_joints * cfg.feature_dim
        std = np.sqrt(self.stats_var).reshape(f, channels)
        if cfg.skip_length > 0.0:
            idx = np.arange(f, dtype=np.float64)
            corr = np.exp(-((idx[:, None] - idx[None, :]) ** 2)
                          / (2.0 * cfg.skip_length ** 2))
        else:
            corr = np.eye(f)
        cov = std[:, None, :] * corr[:, :, None] * std[None, :, :]  # [F, F, C]
        # 5 mm per-frame variance floor: modes outside the smooth prior stay
        # open, so near-noiseless observations pass through at small t while
        # mid-chain states are still projected onto smooth motion.
        cov += 2.5e-5 * np.eye(f)[:, :, None]
        vals = np.empty((f, channels))
        vecs = np.empty((f, f, channels))
        for c in range(channels):
            vals[:, c], vecs[:, :, c] = np.linalg.eigh(cov[:, :, c])
        self._skip_eigvals = np.maximum(vals, 0.0)      # [K, C]
        self._skip_eigvecs = vecs                        # [F, K, C]
        mean_fc = self.stats_mean.reshape(f, channels)
        self._skip_mean_coef = np.einsum("fkc,fc->kc", vecs, mean_fc)
        if self.cond_var is not None:
            # scalar observation noise per channel keeps the shared eigenbasis
            self._cond_channel_var = np.maximum(
                self.cond_var.reshape(f, channels).mean(axis=0), 1e-6)
        else:
            self._cond_channel_var = None

    def _baseline(self, y_t: np.ndarray, ab: np.ndarray,
                  condition: np.ndarray | None) -> np.ndarray:
        """Exact per-channel Gaussian posterior mean of Y given Y_t (and the
        condition, when present), via the cached eigenbasis."""
        cfg = self.config
        f = cfg.num_frames
        channels = cfg.num_joints * cfg.feature_dim
        batch = y_t.shape[0]
        lam = self._skip_eigvals[None]                   # [1, K, C]
        ab_b = ab.reshape(batch, 1, 1)
        y3 = y_t.reshape(batch, f, channels)
        # observation stack: b = sqrt(ab)/(1-ab) y (+ x / s2), precision
        # c_tot = ab/(1-ab) (+ 1/s2); posterior mean solves (I + c S) m = mu + S b
        b_vec = (np.sqrt(ab_b) / (1.0 - ab_b)) * y3
        c_tot = ab_b / (1.0 - ab_b) * np.ones((batch, 1, channels))
        if condition is not None:
            s2 = self._cond_channel_var[None, None, :]
            b_vec = b_vec + condition.reshape(batch, f, channels) / s2
            c_tot = c_tot + 1.0 / s2
        b_coef = np.einsum("fkc,bfc->bkc", self._skip_eigvecs, b_vec)
        m_coef = (self._skip_mean_coef[None] + lam * b_coef) / (1.0 + c_tot * lam)
        return np.einsum("fkc,bkc->bfc", self._skip_eigvecs, m_coef).reshape(batch, -1)

    @classmethod
    def create(cls, config: NetConfig, stats_mean: np.ndarray, stats_var: np.ndarray,
               schedule: NoiseSchedule, seed: int,
               cond_var: np.ndarray | None = None) -> "TinyDenoiserNet":
        params = init_params(config, np.random.default_rng(seed))
        return cls(config, params, stats_mean, stats_var, schedule, cond_var=cond_var)

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    # ---- forward / backward -------------------------------------------------

    def _skip_and_inputs(self, y_t: np.ndarray, t: np.ndarray,
                         condition: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        ab = self.schedule.alpha_bar[t]                   # [B]
        sqrt_ab = np.sqrt(ab)[:, None]
        var = self.stats_var[None, :]
        mean = self.stats_mean[None, :]
        white = (y_t - sqrt_ab * mean) / np.sqrt(ab[:, None] * var + (1.0 - ab[:, None]))
        parts = [white, time_embedding(t, self.config.t_embed_dim)]
        if self.config.conditional:
            if condition is None:
                raise ValueError("conditional network requires a condition input")
            parts.append((condition - mean) / self._cond_scale[None, :])
        elif condition is not None:
            raise ValueError("unconditioned network does not accept a condition")
        skip = self._baseline(y_t, ab, condition if self.config.conditional else None)
        return skip, np.concatenate(parts, axis=1)

    def _forward_core(self, x: np.ndarray) -> tuple[np.ndarray, dict[str, Any]]:
        p = self.params
        cache: dict[str, Any] = {"x": x}
        pre_in = x @ p["w_in"] + p["b_in"]
        h = np.maximum(pre_in, 0.0)
        cache["mask_in"] = pre_in > 0.0
        cache["h"] = [h]
        cache["u"] = []
        cache["mask"] = []
        for i in range(self.config.depth):
            pre = h @ p[f"w1_{i}"] + p[f"b1_{i}"]
            u = np.maximum(pre, 0.0)
            h = h + u @ p[f"w2_{i}"] + p[f"b2_{i}"]
            cache["u"].append(u)
            cache["mask"].append(pre > 0.0)
            cache["h"].append(h)
        z = h @ p["w_out"] + p["b_out"]
        return z, cache

    def _smooth(self, z: np.ndarray, transpose: bool = False) -> np.ndarray:
        if self._smoother is None:
            return z
        cfg = self.config
        op = self._smoother.T if transpose else self._smoother
        stacked = z.reshape(-1, cfg.num_frames, cfg.num_joints * cfg.feature_dim)
        return np.matmul(op[None], stacked).reshape(z.shape)

    def forward(self, y_t: np.ndarray, t: np.ndarray,
                condition: np.ndarray | None = None,
                want_cache: bool = False):
        """Batched flat forward: y_t [B, n], t [B] -> x0 [B, n]."""
        t = np.asarray(t, dtype=np.int64)
        skip, x = self._skip_and_inputs(y_t, t, condition)
        z, cache = self._forward_core(x)
        x0 = skip + self._scale[None, :] * self._smooth(z)
        if want_cache:
            return x0, cache
        return x0

    def backward(self, cache: dict[str, Any], d_x0: np.ndarray) -> dict[str, np.ndarray]:
        """Gradient of a scalar loss wrt parameters, given dL/dx0."""
        p = self.params
        grads: dict[str, np.ndarray] = {}
        dz = self._smooth(d_x0 * self._scale[None, :], transpose=True)
        h_last = cache["h"][-1]
        grads["w_out"] = h_last.T @ dz
        grads["b_out"] = dz.sum(axis=0)
        dh = dz @ p["w_out"].T
        for i in reversed(range(self.config.depth)):
            u = cache["u"][i]
            h_in = cache["h"][i]
            grads[f"w2_{i}"] = u.T @ dh
            grads[f"b2_{i}"] = dh.sum(axis=0)
            du = (dh @ p[f"w2_{i}"].T) * cache["mask"][i]
            grads[f"w1_{i}"] = h_in.T @ du
            grads[f"b1_{i}"] = du.sum(axis=0)
            dh = dh + du @ p[f"w1_{i}"].T
        d_pre_in = dh * cache["mask_in"]
        grads["w_in"] = cache["x"].T @ d_pre_in
        grads["b_in"] = d_pre_in.sum(axis=0)
        return grads

    # ---- inference ----------------------------------------------------------

    def predict(self, y_t: np.ndarray, t: int,
                condition: np.ndarray | None = None) -> np.ndarray:
        """Single-motion prediction on [F, J, D] arrays."""
        cfg = self.config
        shape = (cfg.num_frames, cfg.num_joints, cfg.feature_dim)
        y_t = np.asarray(y_t, dtype=np.float64)
        if y_t.shape != shape:
            raise ValueError(f"expected y_t of shape {shape}, got {y_t.shape}")
        t = self.schedule.check_t(t, lo=1)
        cond_flat = None
        if condition is not None:
            condition = np.asarray(condition, dtype=np.float64)
            if condition.shape != shape:
                raise ValueError(f"expected condition of shape {shape}, got {condition.shape}")
            cond_flat = condition.reshape(1, -1)
        x0 = self.forward(y_t.reshape(1, -1), np.array([t]), cond_flat)
        return x0.reshape(shape)


class NetDenoiserU:
    """Unconditioned trained backend."""

    def __init__(self, net: TinyDenoiserNet):
        if net.config.conditional:
            raise ValueError("NetDenoiserU requires an unconditioned network")
        self.net = net
        self.schedule = net.schedule

    @property
    def shape(self) -> tuple[int, int, int]:
        c = self.net.config
        return (c.num_frames, c.num_joints, c.feature_dim)

    def evaluate(self, y_t: np.ndarray, t: int) -> np.ndarray:
        return self.net.predict(y_t, t)


class NetDenoiserR:
    """Condition-taking trained backend."""

    def __init__(self, net: TinyDenoiserNet):
        if not net.config.conditional:
            raise ValueError("NetDenoiserR requires a conditional network")
        self.net = net
        self.schedule = net.schedule

    @property
    def shape(self) -> tuple[int, int, int]:
        c = self.net.config
        return (c.num_frames, c.num_joints, c.feature_dim)

    def evaluate(self, condition: np.ndarray, t: int, y_t: np.ndarray) -> np.ndarray:
        return self.net.predict(y_t, t, condition)


class Adam:
    """Standard Adam with bias correction; deterministic given call order.

    Updates run through preallocated scratch buffers: the optimizer step is
    memory-bound at this parameter count and fresh temporaries dominate the
    step time otherwise.
    """

    def __init__(self, params: dict[str, np.ndarray], learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self._buf = {k: np.empty_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.step_count += 1
        b1c = 1.0 - self.beta1 ** self.step_count
        b2c = 1.0 - self.beta2 ** self.step_count
        for key, g in grads.items():
            m = self.m[key]
            v = self.v[key]
            buf = self._buf[key]
            np.multiply(g, 1.0 - self.beta1, out=buf)
            m *= self.beta1
            m += buf
            np.multiply(g, g, out=buf)
            buf *= 1.0 - self.beta2
            v *= self.beta2
            v += buf
            np.divide(v, b2c, out=buf)
            np.sqrt(buf, out=buf)
            buf += self.eps
            np.divide(m, buf, out=buf)
            buf *= self.lr / b1c
            self.params[key] -= buf


# ---- checkpoint container ---------------------------------------------------


def save_checkpoint(path: str | Path, net: TinyDenoiserNet,
                    training_config: dict[str, Any] | None = None) -> None:
    """Binary container: magic, JSON header, then little-endian float64 blob."""
    order = ["alpha_bar", "stats_mean", "stats_var", *_param_names(net.config)]
    arrays = {
        "alpha_bar": net.schedule.alpha_bar,
        "stats_mean": net.stats_mean,
        "stats_var": net.stats_var,
        **net.params,
    }
    if net.cond_var is not None:
        order.insert(3, "cond_var")
        arrays["cond_var"] = net.cond_var
    header = {
        "format_version": CHECKPOINT_VERSION,
        "arch": asdict(net.config),
        "schedule": {"family": "cosine", "num_steps": net.schedule.num_steps},
        "shapes": [[name, list(arrays[name].shape)] for name in order],
        "training": training_config or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        for name in order:
            fh.write(np.ascontiguousarray(arrays[name], dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[TinyDenoiserNet, dict[str, Any]]:
    raw = Path(path).read_bytes()
    if raw[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a denoiser checkpoint (bad magic)")
    off = len(CHECKPOINT_MAGIC)
    (header_len,) = struct.unpack_from("<Q", raw, off)
    off += 8
    header = json.loads(raw[off: off + header_len].decode("utf-8"))
    off += header_len
    if header.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {header.get('format_version')}")
    config = NetConfig(**header["arch"])

    shapes = header["shapes"]
    expected = sum(int(np.prod(s)) for _, s in shapes)
    blob = np.frombuffer(raw, dtype="<f8", offset=off)
    if blob.size != expected:
        raise ValueError(
            f"checkpoint blob holds {blob.size} values but the shape table requires {expected}"
        )
    arrays: dict[str, np.ndarray] = {}
    pos = 0
    for name, shape in shapes:
        size = int(np.prod(shape))
        arrays[name] = blob[pos: pos + size].reshape(shape).copy()
        pos += size

    missing = [n for n in ("alpha_bar", "stats_mean", "stats_var", *_param_names(config))
               if n not in arrays]
    if missing:
        raise ValueError(f"checkpoint is missing arrays: {missing}")
    schedule = NoiseSchedule(arrays.pop("alpha_bar"))
    stats_mean = arrays.pop("stats_mean")
    stats_var = arrays.pop("stats_var")
    cond_var = arrays.pop("cond_var", None)
    net = TinyDenoiserNet(config, arrays, stats_mean, stats_var, schedule,
                          cond_var=cond_var)
    return net, header.get("training", {})
