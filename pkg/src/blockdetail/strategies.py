"""Strategy descriptors: data-driven selection of a generation strategy,
shared by the benchmark runner, the CLI, and the HTTP service."""
from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import (GuidanceConfig, blended_sample, guided_sample,
                        hard_impute_sample, r_no_tolerance_sample, soft_mask,
                        sparse_mask, unconditioned_sample)
from .detailing import RefinementConfig, detail_motion
from .motion import BlockingSet, Motion
from .skeleton import DEFAULT_SKELETON, SkeletonSpec

STRATEGY_NAMES = (
    "detailing",
    "r-no-tolerance",
    "diffusion-blending",
    "soft-mask",
    "u-guidance",
    "hard-impute",
)


@dataclass(frozen=True)
class StrategyDescriptor:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in STRATEGY_NAMES:
            raise ValueError(f"unknown strategy {self.name!r}; expected one of {STRATEGY_NAMES}")

    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"


def parse_strategy(text: str) -> StrategyDescriptor:
    """Parse 'name' or 'name:k=v,k=v' (numbers parsed, true/false as bools)."""
    name, _, rest = text.partition(":")
    params: dict = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            if not key or not value:
                raise ValueError(f"bad strategy parameter {item!r} in {text!r}")
            if value.lower() in ("true", "false"):
                params[key] = value.lower() == "true"
            else:
                try:
                    params[key] = int(value)
                except ValueError:
                    params[key] = float(value)
    return StrategyDescriptor(name.strip(), params)


def run_strategy(desc: StrategyDescriptor, denoiser_r, denoiser_u,
                 blocking: BlockingSet, seed: int,
                 skeleton: SkeletonSpec = DEFAULT_SKELETON,
                 fps: float = 20.0) -> Motion:
    """Execute one strategy on one blocking set with a shared seed."""
    p = dict(desc.params)
    if desc.name == "detailing":
        c = p.pop("c", None)
        config = RefinementConfig(
            cadence=int(p.pop("cadence", RefinementConfig.cadence)),
            search_radius=int(p.pop("radius", RefinementConfig.search_radius)),
            apply_ground_fix=bool(p.pop("ground_fix", RefinementConfig.apply_ground_fix)),
            default_tolerance=float(p.pop("default_tolerance", RefinementConfig.default_tolerance)),
        )
        _reject_leftovers(desc, p)
        if c is not None:
            blocking = blocking.with_uniform_tolerance(float(c))
        motion, _ = detail_motion(blocking, denoiser_r, denoiser_u, config, seed,
                                  skeleton=skeleton, fps=fps)
        return motion
    if desc.name == "r-no-tolerance":
        _reject_leftovers(desc, p)
        return r_no_tolerance_sample(denoiser_r, blocking, seed, fps=fps)
    if desc.name == "diffusion-blending":
        c = float(p.pop("c", 0.85))
        _reject_leftovers(desc, p)
        return blended_sample(denoiser_r, denoiser_u, blocking,
                              sparse_mask(blocking, c), seed, fps=fps)
    if desc.name == "soft-mask":
        c = float(p.pop("c", 0.85))
        falloff = int(p.pop("falloff", 10))
        _reject_leftovers(desc, p)
        return blended_sample(denoiser_r, denoiser_u, blocking,
                              soft_mask(blocking, c, falloff), seed, fps=fps)
    if desc.name == "u-guidance":
        w = float(p.pop("w", 1.0))
        _reject_leftovers(desc, p)
        return guided_sample(denoiser_u, blocking, GuidanceConfig(weight=w), seed, fps=fps)
    if desc.name == "hard-impute":
        _reject_leftovers(desc, p)
        return hard_impute_sample(denoiser_u, blocking, seed, fps=fps)
    raise AssertionError(f"unhandled strategy {desc.name}")


def _reject_leftovers(desc: StrategyDescriptor, leftover: dict) -> None:
    if leftover:
        raise ValueError(f"unknown parameters for strategy {desc.name!r}: {sorted(leftover)}")


__all__ = [
    "StrategyDescriptor", "STRATEGY_NAMES", "parse_strategy", "run_strategy",
    "unconditioned_sample",
]
