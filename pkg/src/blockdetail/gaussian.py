"""Analytic Gaussian denoiser backends.

Under a Gaussian motion prior with a shared temporal covariance per
joint-coordinate channel, the exact Bayes x0 predictions for the forward
process are available in closed form. These back the unconditioned model
and the condition-taking model with exactly testable references.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .motion import FEATURE_DIM
from .schedule import NoiseSchedule

DEFAULT_KERNEL_VARIANCE = 0.04   # m^2
DEFAULT_KERNEL_LENGTH = 6.0      # frames
DEFAULT_KERNEL_JITTER = 1e-6
DEFAULT_CONDITION_NOISE = 0.01   # m^2


def squared_exponential_kernel(num_frames: int,
                               variance: float = DEFAULT_KERNEL_VARIANCE,
                               length: float = DEFAULT_KERNEL_LENGTH,
                               jitter: float = DEFAULT_KERNEL_JITTER) -> np.ndarray:
    """k(i, j) = variance * exp(-(i-j)^2 / (2 length^2)) + jitter * I."""
    idx = np.arange(num_frames, dtype=np.float64)
    diff = idx[:, None] - idx[None, :]
    return variance * np.exp(-(diff * diff) / (2.0 * length * length)) + jitter * np.eye(num_frames)


@dataclass(frozen=True)
class GaussianMotionPrior:
    """N(mean, covariance) per joint-coordinate channel over the F frames.

    The covariance is factorized once (symmetric eigendecomposition); all
    posterior solves are applied through the factors, never through an
    explicit inverse.
    """

    mean: np.ndarray                 # [F, J, D]
    covariance: np.ndarray           # [F, F]
    _eigvals: np.ndarray = field(init=False, repr=False)
    _eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        cov = np.ascontiguousarray(self.covariance, dtype=np.float64)
        if mean.ndim != 3:
            raise ValueError(f"mean must be [F, J, D], got {mean.shape}")
        f = mean.shape[0]
        if cov.shape != (f, f):
            raise ValueError(f"covariance must be [{f}, {f}], got {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        vals, vecs = np.linalg.eigh(cov)
        if vals.min() <= 0.0:
            raise ValueError(
                f"covariance must be symmetric positive definite (min eigenvalue {vals.min():.3e})"
            )
        mean.flags.writeable = False
        cov.flags.writeable = False
        vals.flags.writeable = False
        vecs.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_eigvals", vals)
        object.__setattr__(self, "_eigvecs", vecs)

    @classmethod
    def from_kernel(cls, mean: np.ndarray,
                    variance: float = DEFAULT_KERNEL_VARIANCE,
                    length: float = DEFAULT_KERNEL_LENGTH,
                    jitter: float = DEFAULT_KERNEL_JITTER) -> "GaussianMotionPrior":
        mean = np.asarray(mean, dtype=np.float64)
        return cls(mean, squared_exponential_kernel(mean.shape[0], variance, length, jitter))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.mean.shape  # type: ignore[return-value]

    def _channels(self, arr: np.ndarray) -> np.ndarray:
        """[F, J, D] -> [F, J*D] channel matrix."""
        f, j, d = self.shape
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (f, j, d):
            raise ValueError(f"expected array of shape {(f, j, d)}, got {arr.shape}")
        return arr.reshape(f, j * d)

    def _apply_filter(self, gains: np.ndarray, channels: np.ndarray) -> np.ndarray:
        """Apply Q diag(gains) Q^T to every channel column."""
        q = self._eigvecs
        return q @ (gains[:, None] * (q.T @ channels))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one [F, J, D] motion array from the prior."""
        f, j, d = self.shape
        white = rng.standard_normal((f, j * d))
        colored = self._eigvecs @ (np.sqrt(self._eigvals)[:, None] * white)
        return self.mean + colored.reshape(f, j, d)


def gaussian_posterior_x0(prior: GaussianMotionPrior, y_t: np.ndarray, t: int,
                          schedule: NoiseSchedule) -> np.ndarray:
    """Exact E[Y | Y_t] under the prior and the forward process at step t.

    Per channel: mu + sqrt(ab) S (ab S + (1 - ab) I)^{-1} (y_t - sqrt(ab) mu),
    applied through the cached symmetric factorization.
    """
    t = schedule.check_t(t, lo=1)
    ab = float(schedule.alpha_bar[t])
    sqrt_ab = np.sqrt(ab)
    innov = prior._channels(y_t) - sqrt_ab * prior._channels(prior.mean)
    gains = sqrt_ab * prior._eigvals / (ab * prior._eigvals + (1.0 - ab))
    f, j, d = prior.shape
    return prior.mean + prior._apply_filter(gains, innov).reshape(f, j, d)


def gaussian_conditional_x0(prior: GaussianMotionPrior, condition: np.ndarray,
                            obs_noise_var: float, y_t: np.ndarray, t: int,
                            schedule: NoiseSchedule) -> np.ndarray:
    """Exact E[Y | Y_t, X] treating X as a dense observation Y + N(0, obs_noise_var I).

    Joint-precision solve per channel: (I + c S) m = mu + S b with
    c = ab/(1-ab) + 1/s2 and b = sqrt(ab)/(1-ab) y_t + x/s2.
    """
    if obs_noise_var <= 0.0:
        raise ValueError("obs_noise_var must be positive")
    t = schedule.check_t(t, lo=1)
    ab = float(schedule.alpha_bar[t])
    one_minus = 1.0 - ab
    c = ab / one_minus + 1.0 / obs_noise_var
    b = (np.sqrt(ab) / one_minus) * prior._channels(y_t) + prior._channels(condition) / obs_noise_var

    q = prior._eigvecs
    lam = prior._eigvals
    rhs = prior._channels(prior.mean) + q @ (lam[:, None] * (q.T @ b))
    m = q @ ((1.0 / (1.0 + c * lam))[:, None] * (q.T @ rhs))
    f, j, d = prior.shape
    return m.reshape(f, j, d)


class GaussianDenoiserU:
    """Unconditioned x0-predictor backed by the exact Gaussian posterior."""

    def __init__(self, prior: GaussianMotionPrior, schedule: NoiseSchedule):
        self.prior = prior
        self.schedule = schedule

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.prior.shape

    def evaluate(self, y_t: np.ndarray, t: int) -> np.ndarray:
        return gaussian_posterior_x0(self.prior, y_t, t, self.schedule)


class GaussianDenoiserR:
    """Condition-taking x0-predictor; the condition is a noisy dense view of Y."""

    def __init__(self, prior: GaussianMotionPrior, schedule: NoiseSchedule,
                 obs_noise_var: float = DEFAULT_CONDITION_NOISE):
        self.prior = prior
        self.schedule = schedule
        self.obs_noise_var = float(obs_noise_var)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.prior.shape

    def evaluate(self, condition: np.ndarray, t: int, y_t: np.ndarray) -> np.ndarray:
        return gaussian_conditional_x0(self.prior, condition, self.obs_noise_var,
                                       y_t, t, self.schedule)
