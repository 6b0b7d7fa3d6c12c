"""x0-parameterized ancestral sampling.

The denoiser is passed as a callable (y_t, t) -> x0 prediction; conditioned
models are closed over whatever condition state the caller manages. An
optional step hook observes every prediction and may swap that state for
subsequent steps. Hooks receive read-only views and must consume no
randomness from the sampling stream, which keeps runs with and without
hooks bit-identical.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .schedule import NoiseSchedule

DenoiseFn = Callable[[np.ndarray, int], np.ndarray]
StepHook = Callable[[int, np.ndarray, np.ndarray], None]


def _readonly(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


def ancestral_sample(denoise_fn: DenoiseFn, schedule: NoiseSchedule,
                     shape: tuple[int, ...], seed: int | np.random.Generator,
                     step_hook: StepHook | None = None) -> np.ndarray:
    """Run the reverse chain from Y_T ~ N(0, I) down to Y_0.

    At each step t the denoiser provides x0_hat; Y_{t-1} is drawn from the
    forward posterior q(Y_{t-1} | Y_t, x0_hat). The final step is
    deterministic and returns x0_hat exactly.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y = rng.standard_normal(shape)
    for t in range(schedule.num_steps, 0, -1):
        x0 = np.asarray(denoise_fn(_readonly(y), t), dtype=np.float64)
        if x0.shape != y.shape:
            raise ValueError(f"denoiser returned shape {x0.shape}, expected {y.shape}")
        if not np.all(np.isfinite(x0)):
            raise FloatingPointError(f"denoiser produced a non-finite prediction at t={t}")
        if step_hook is not None:
            step_hook(t, _readonly(y), _readonly(x0))
        c0 = schedule.posterior_coef_x0[t - 1]
        c1 = schedule.posterior_coef_yt[t - 1]
        y = c0 * x0 + c1 * y
        if t > 1:
            y = y + schedule.posterior_sigma[t - 1] * rng.standard_normal(shape)
    return y
