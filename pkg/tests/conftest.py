################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/conftest.py                                                                                  #
# Date de modification : 19.10.2026                                                                            #
# Description : Fixtures partagées : stores synthétiques à 64 px, configuration réduite et aides float64.      #
################################################################################################################

import numpy as np
import pytest

from mdgan.config import build_config
from mdgan.data_pipeline import ClipStore
from mdgan.synth_data import MotionParams, synthesize


def tiny_config(**overrides):
    # Réseaux au 1/8 en 64 px : assez petits pour tourner en quelques secondes
    values = {"resolution": 64, "width_multiplier": 0.125, "batch_size": 2, "dtype": "float64",
              "iterations": 2, "checkpoint_every": 1, "prefetch": 0, "progress_every": 1000, "seed": 3}
    values.update(overrides)
    return build_config(values)


@pytest.fixture
def make_config():
    return tiny_config


@pytest.fixture(scope="session")
def synth_store_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth") / "store"
    synthesize(str(root), n_sources=4, frames_per_source=64, seed=0, resolution=64, test_fraction=0.25)
    return str(root)


@pytest.fixture(scope="session")
def static_store_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("static") / "store"
    synthesize(str(root), n_sources=3, frames_per_source=32, motion=MotionParams(velocity=0.0), seed=1,
               resolution=64, test_fraction=0.34)
    return str(root)


@pytest.fixture
def synth_store(synth_store_dir):
    return ClipStore(synth_store_dir)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
