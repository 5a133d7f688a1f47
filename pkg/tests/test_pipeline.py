################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_pipeline.py                                                                             #
# Date de modification : 19.10.2026                                                                            #
# Description : Chaîne de prédiction reconstruite depuis un checkpoint d'étage 1 ou 2.                         #
################################################################################################################

import numpy as np
import pytest

from mdgan.checkpoint import Checkpoint
from mdgan.errors import ConfigError, ValidationError
from mdgan.models import duplicate_frame, forward_generator
from mdgan.network_spec import build_generator
from mdgan.nn_ops import init_parameters
from mdgan.pipeline import VideoPipeline
from mdgan.tensor import Tensor

from conftest import tiny_config


def _stage_checkpoints():
    cfg = tiny_config()
    g1 = init_parameters(build_generator(1, 64, 0.125), 0, np.float64)
    g2 = init_parameters(build_generator(2, 64, 0.125), 1, np.float64)
    stage1 = Checkpoint(1, 5, cfg.to_dict(), g1.to_arrays("g."))
    arrays = dict(g2.to_arrays("g."))
    arrays.update(g1.to_arrays("g1."))
    stage2 = Checkpoint(2, 7, cfg.to_dict(), arrays)
    return stage1, stage2, g1, g2


@pytest.fixture(scope="module")
def checkpoints():
    return _stage_checkpoints()


def _input(seed=0):
    frame = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(1, 3, 64, 64))
    return duplicate_frame(Tensor(frame), 32)


def test_stage1_pipeline_is_g1(checkpoints):
    stage1, _, g1, _ = checkpoints
    pipeline = VideoPipeline.from_checkpoint(stage1)
    assert pipeline.stage == 1
    X = _input()
    expected = forward_generator(build_generator(1, 64, 0.125), g1, X, mode="inference", track_running=False)
    np.testing.assert_array_equal(pipeline.predict(X).values, expected.video.values)


def test_stage2_pipeline_chains_generators(checkpoints):
    _, stage2, g1, g2 = checkpoints
    pipeline = VideoPipeline.from_checkpoint(stage2)
    assert pipeline.stage == 2
    X = _input(1)
    y1 = forward_generator(build_generator(1, 64, 0.125), g1, X, mode="inference", track_running=False).video
    y2 = forward_generator(build_generator(2, 64, 0.125), g2, y1, mode="inference", track_running=False).video
    np.testing.assert_array_equal(pipeline.predict(X).values, y2.values)


def test_stage2_checkpoint_truncated_to_base_net(checkpoints):
    stage1, stage2, _, _ = checkpoints
    X = _input(2)
    base = VideoPipeline.from_checkpoint(stage2, stage=1).predict(X)
    np.testing.assert_array_equal(base.values, VideoPipeline.from_checkpoint(stage1).predict(X).values)
    with pytest.raises(ConfigError):
        VideoPipeline.from_checkpoint(stage1, stage=2)


def test_predict_frame_checks_resolution(checkpoints):
    pipeline = VideoPipeline.from_checkpoint(checkpoints[0])
    video = pipeline.predict_frame(np.zeros((64, 64, 3), dtype=np.uint8))
    assert video.shape == (1, 3, 32, 64, 64)
    with pytest.raises(ValidationError):
        pipeline.predict_frame(np.zeros((32, 32, 3), dtype=np.uint8))


def test_incompatible_parameters(checkpoints):
    stage1 = checkpoints[0]
    arrays = dict(stage1.arrays)
    arrays.pop("g.param.conv3.weight")
    with pytest.raises(ConfigError):
        VideoPipeline.from_checkpoint(Checkpoint(1, 0, stage1.config, arrays))
