import numpy as np
import pytest

from blockdetail.benchmark import BenchmarkSpec, make_blocking
from blockdetail.net import NetDenoiserR, NetDenoiserU, save_checkpoint
from blockdetail.synth import synth_dataset
from blockdetail.training import TrainConfig, train_denoiser, training_pairs

TINY_FRAMES = 16
TINY_DIFFUSION_STEPS = 200


@pytest.fixture(scope="session")
def tiny_train_results():
    """Small fast U and R models shared by CLI/service/job tests."""
    clips = synth_dataset(100, TINY_FRAMES, seed=7)
    pairs = training_pairs(clips, 600)
    common = dict(hidden=32, depth=1, steps=150, batch_size=16,
                  diffusion_steps=TINY_DIFFUSION_STEPS)
    res_r = train_denoiser(pairs, TrainConfig(mode="R", seed=11, **common))
    res_u = train_denoiser(pairs, TrainConfig(mode="U", seed=12, **common))
    return res_r, res_u


@pytest.fixture(scope="session")
def tiny_models(tiny_train_results):
    res_r, res_u = tiny_train_results
    return NetDenoiserR(res_r.net), NetDenoiserU(res_u.net)


@pytest.fixture(scope="session")
def tiny_checkpoints(tiny_train_results, tmp_path_factory):
    res_r, res_u = tiny_train_results
    root = tmp_path_factory.mktemp("checkpoints")
    path_r = root / "model_r.ckpt"
    path_u = root / "model_u.ckpt"
    save_checkpoint(path_r, res_r.net, res_r.training_echo())
    save_checkpoint(path_u, res_u.net, res_u.training_echo())
    return path_r, path_u


@pytest.fixture(scope="session")
def tiny_blocking_doc():
    from blockdetail.motion_io import blocking_to_doc
    from blockdetail.synth import synth_motion

    gt = synth_motion("walk", TINY_FRAMES, 42)
    blocking = make_blocking(gt, BenchmarkSpec(clip_length=TINY_FRAMES), 42)
    return blocking_to_doc(blocking)
