################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_metrics.py                                                                              #
# Date de modification : 19.10.2026                                                                            #
# Description : MSE, PSNR plafonné et SSIM gaussien sur des valeurs dans [0, 1].                               #
################################################################################################################

import numpy as np
import pytest

from mdgan.errors import ConfigError, DimensionError
from mdgan.metrics import frame_psnr_mean, mse, psnr, psnr_from_mse, ssim, to_unit_range


def test_identical_inputs():
    a = np.random.default_rng(0).uniform(size=(3, 4, 16, 16))
    assert mse(a, a) == 0.0
    assert psnr(a, a) == 100.0
    assert ssim(a, a) == 1.0


def test_known_psnr():
    a = np.zeros((3, 2, 12, 12))
    assert mse(a, a + 0.1) == pytest.approx(0.01)
    assert psnr(a, a + 0.1) == pytest.approx(20.0)
    assert psnr_from_mse(1e-30) == 100.0


def test_ssim_drops_with_noise():
    rng = np.random.default_rng(1)
    a = rng.uniform(size=(3, 2, 24, 24))
    b = np.clip(a + rng.normal(0.0, 0.2, size=a.shape), 0.0, 1.0)
    value = ssim(a, b)
    assert -1.0 <= value < 0.9


def test_ssim_window_larger_than_frame():
    with pytest.raises(ConfigError):
        ssim(np.zeros((3, 1, 8, 8)), np.zeros((3, 1, 8, 8)))


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        mse(np.zeros(3), np.zeros(4))


def test_unit_range_mapping():
    np.testing.assert_allclose(to_unit_range(np.array([-1.0, 0.0, 1.0, 1.4])), [0.0, 0.5, 1.0, 1.0])


def test_ssim_constant_images_closed_form():
    c1 = 0.01 ** 2
    value = ssim(np.zeros((3, 1, 16, 16)), np.ones((3, 1, 16, 16)))
    assert value == pytest.approx(c1 / (1.0 + c1), abs=1e-9)


def test_frame_psnr_mean_differs_from_pooled():
    a = np.zeros((3, 2, 4, 4))
    b = a.copy()
    b[:, 1] = 0.1
    # Frame 0 parfaite (100 dB), frame 1 à 20 dB
    assert frame_psnr_mean(a, b) == pytest.approx(60.0)
    assert psnr(a, b) == pytest.approx(10.0 * np.log10(1.0 / 0.005))
