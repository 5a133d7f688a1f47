################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_network_spec.py                                                                         #
# Date de modification : 19.10.2026                                                                            #
# Description : Architectures G1, G2 et D : formes par couche, skips, variante 64 px et erreurs de             #
# configuration.                                                                                               #
################################################################################################################

import pytest

from mdgan.errors import ConfigError, InternalConsistencyError
from mdgan.network_spec import NetworkSpec, build_discriminator, build_generator, scaled_filters

G1_128_SHAPES = {
    "conv1": (32, 32, 64, 64),
    "conv2": (64, 16, 32, 32),
    "conv3": (128, 8, 16, 16),
    "conv4": (256, 4, 8, 8),
    "conv5": (512, 2, 4, 4),
    "conv6": (512, 1, 1, 1),
    "deconv1": (512, 2, 4, 4),
    "deconv2": (256, 4, 8, 8),
    "deconv3": (128, 8, 16, 16),
    "deconv4": (64, 16, 32, 32),
    "deconv5": (32, 32, 64, 64),
    "deconv6": (3, 32, 128, 128),
}


def test_stage1_128_layer_shapes():
    spec = build_generator(1, 128)
    assert spec.layer_names() == list(G1_128_SHAPES)
    shapes = spec.output_shapes(batch=2)
    for name, expected in G1_128_SHAPES.items():
        assert shapes[name] == (2,) + expected


def test_batch_norm_placement():
    spec = build_generator(1, 128)
    without = {layer.name for layer in spec.layers if not layer.batch_norm}
    assert without == {"conv1", "conv6", "deconv6"}
    assert spec.layer("deconv6").activation == "tanh"
    assert spec.layer("conv3").activation == "leaky_relu"
    assert spec.layer("deconv3").activation == "relu"


def test_skip_maps_per_stage():
    g1 = build_generator(1, 128)
    g2 = build_generator(2, 128)
    assert len(g1.skip_map) == 5
    assert set(g2.skip_map) == {("conv3", "deconv4"), ("conv4", "deconv3"), ("conv5", "deconv2")}
    assert g1.parameter_shapes() == g2.parameter_shapes()


def test_64_variant():
    g1 = build_generator(1, 64)
    assert g1.layer_names()[0] == "conv2"
    assert g1.layer_names()[-1] == "deconv5"
    assert len(g1.layers) == 10
    assert not g1.layer("conv2").batch_norm
    assert g1.layer("deconv5").params.num_filters == 3
    assert g1.output_shapes()["deconv5"] == (1, 3, 32, 64, 64)
    assert len(g1.skip_map) == 4
    assert len(build_generator(2, 64).skip_map) == 3


def test_width_multiplier_keeps_output_channels():
    spec = build_generator(1, 64, 0.125)
    assert spec.layer("conv2").params.num_filters == 8
    assert spec.layer("deconv5").params.num_filters == 3
    assert scaled_filters(32, 0.01) == 1


def test_discriminator_taps_and_score():
    d128 = build_discriminator(128)
    assert d128.feature_taps == ("conv1", "conv3")
    assert d128.output_shapes()["score"] == (1, 1, 1, 1, 1)
    assert d128.layer("score").activation == "sigmoid"
    d64 = build_discriminator(64, 0.125)
    assert d64.feature_taps == ("conv2", "conv4")
    assert d64.output_shapes()["score"] == (1, 1, 1, 1, 1)
    with pytest.raises(ConfigError):
        build_discriminator(128, taps=(6,))


def test_invalid_requests():
    with pytest.raises(ConfigError):
        build_generator(3)
    with pytest.raises(ConfigError):
        build_generator(1, 96)
    with pytest.raises(ConfigError):
        build_generator(1, 128, 0.0)


def test_mismatched_skip_is_a_consistency_error():
    spec = build_generator(1, 128)
    with pytest.raises(InternalConsistencyError):
        NetworkSpec("generator", spec.layers, (("conv1", "deconv2"),), 128, stage=1)


def test_summary_table_lists_every_layer():
    spec = build_generator(1, 128)
    table = spec.summary_table()
    for name in G1_128_SHAPES:
        assert name in table
    assert str(spec.parameter_count()) in table


@pytest.mark.parametrize("resolution", [64, 128])
@pytest.mark.parametrize("width", [1.0, 0.5, 0.25, 0.125])
def test_skip_shapes_hold_for_every_width(resolution, width):
    g1 = build_generator(1, resolution, width)
    g2 = build_generator(2, resolution, width)
    for spec in (g1, g2, build_discriminator(resolution, width)):
        spec.validate()
    assert len(g1.skip_map) == (5 if resolution == 128 else 4)
    assert all(enc not in ("conv1", "conv2") for enc, _ in g2.skip_map)
    assert set(g2.skip_map) < set(g1.skip_map)
    shapes = g1.output_shapes(batch=2)
    assert shapes[g1.layer_names()[-1]] == (2, 3, 32, resolution, resolution)


@pytest.mark.parametrize("stage", [1, 2])
def test_skips_are_additive_joins(stage):
    spec = build_generator(stage, 128, 0.25)
    shapes = spec.output_shapes()
    weights = spec.parameter_shapes()
    names = spec.layer_names()
    for enc, dec in spec.skip_map:
        previous = names[names.index(dec) - 1]
        # Somme de deux tenseurs de même forme : pas de canaux en plus à l'entrée du deconv
        assert shapes[enc] == shapes[previous]
        assert weights[f"{dec}.weight"][0] == shapes[previous][1]
