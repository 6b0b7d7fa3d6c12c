"""Cosine noise schedule and the forward noising process.

The schedule stores alpha_bar[0..T] with alpha_bar[0] = 1 exactly, plus the
precomputed coefficients for the x0-parameterized ancestral posterior
q(Y_{t-1} | Y_t, x0).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_STEPS = 1000


def cosine_alpha_bar(num_steps: int, offset: float = 0.008) -> np.ndarray:
    """alpha_bar[t] = f(t)/f(0) with f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2)."""
    t = np.arange(num_steps + 1, dtype=np.float64)
    f = np.cos((t / num_steps + offset) / (1.0 + offset) * np.pi / 2.0) ** 2
    alpha_bar = f / f[0]
    alpha_bar[0] = 1.0
    return alpha_bar


@dataclass(frozen=True)
class NoiseSchedule:
    """Monotone alpha_bar sequence driving forward and reverse diffusion."""

    alpha_bar: np.ndarray
    # derived, index t in [1, T]
    posterior_coef_x0: np.ndarray = field(init=False, repr=False)
    posterior_coef_yt: np.ndarray = field(init=False, repr=False)
    posterior_sigma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ab = np.ascontiguousarray(self.alpha_bar, dtype=np.float64)
        if ab.ndim != 1 or ab.shape[0] < 2:
            raise ValueError("alpha_bar must be a 1-D sequence of length T+1 with T >= 1")
        if ab[0] != 1.0:
            raise ValueError("alpha_bar[0] must be exactly 1")
        if np.any(np.diff(ab) >= 0.0):
            raise ValueError("alpha_bar must be strictly decreasing in t")
        if np.any(ab <= 0.0) or np.any(ab > 1.0):
            raise ValueError("alpha_bar entries must lie in (0, 1]")
        if ab[-1] >= 1e-4:
            raise ValueError(f"alpha_bar[T] must be < 1e-4, got {ab[-1]:.3e}")
        ab.flags.writeable = False
        object.__setattr__(self, "alpha_bar", ab)

        # q(Y_{t-1} | Y_t, x0) = N(c0[t] * x0 + c1[t] * Y_t, sigma[t]^2 I)
        alpha = ab[1:] / ab[:-1]
        beta = 1.0 - alpha
        one_minus = 1.0 - ab[1:]
        prev = ab[:-1]
        coef_x0 = np.sqrt(prev) * beta / one_minus
        coef_yt = np.sqrt(alpha) * (1.0 - prev) / one_minus
        sigma = np.sqrt(beta * (1.0 - prev) / one_minus)
        for arr in (coef_x0, coef_yt, sigma):
            arr.flags.writeable = False
        object.__setattr__(self, "posterior_coef_x0", coef_x0)
        object.__setattr__(self, "posterior_coef_yt", coef_yt)
        object.__setattr__(self, "posterior_sigma", sigma)

    @classmethod
    def cosine(cls, num_steps: int = DEFAULT_STEPS) -> "NoiseSchedule":
        return cls(cosine_alpha_bar(num_steps))

    @property
    def num_steps(self) -> int:
        return self.alpha_bar.shape[0] - 1

    def check_t(self, t: int, lo: int = 0) -> int:
        t = int(t)
        if not lo <= t <= self.num_steps:
            raise ValueError(f"t must lie in [{lo}, {self.num_steps}], got {t}")
        return t

    def signal_scale(self, t: int) -> float:
        return float(np.sqrt(self.alpha_bar[self.check_t(t)]))

    def noise_scale(self, t: int) -> float:
        return float(np.sqrt(1.0 - self.alpha_bar[self.check_t(t)]))


def forward_noise(y: np.ndarray, t: int, noise: np.ndarray,
                  schedule: NoiseSchedule) -> np.ndarray:
    """Sample q(Y_t | Y): sqrt(alpha_bar_t) * Y + sqrt(1 - alpha_bar_t) * noise."""
    t = schedule.check_t(t)
    y = np.asarray(y, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if y.shape != noise.shape:
        raise ValueError(f"shape mismatch: y {y.shape} vs noise {noise.shape}")
    return schedule.signal_scale(t) * y + schedule.noise_scale(t) * noise
