################################################################################################################
# Projet : MD-GAN Video Prediction                                                                             #
# Fichier : tests/test_data_pipeline.py                                                                        #
# Date de modification : 19.10.2026                                                                            #
# Description : Ingestion en clips de 32 frames, split par source, tirage des lots et export PPM.              #
################################################################################################################

import json
import logging
import os

import numpy as np
import pytest
from PIL import Image

from mdgan.data_pipeline import (ClipRecord, ClipSampler, ClipStore, clip_to_pixels, denormalize, export_clip,
                                 export_frame_strip, import_clip, ingest, load_batch, normalize, split, split_store)
from mdgan.errors import ConfigError, DataError, IntegrityError


def _write_source(root, name, n_frames, size=(10, 6), ext="ppm"):
    folder = root / name
    folder.mkdir(parents=True)
    for t in range(n_frames):
        frame = np.empty((size[1], size[0], 3), dtype=np.uint8)
        frame[...] = (t % 256, 255 - t % 256, 7)
        Image.fromarray(frame).save(folder / f"f{t}.{ext}")


@pytest.fixture
def frame_root(tmp_path):
    root = tmp_path / "frames"
    _write_source(root, "alpha", 100)
    _write_source(root, "beta", 31)
    _write_source(root, "gamma", 64, ext="png")
    return root


def test_ingest_cuts_non_overlapping_clips(frame_root, tmp_path, caplog):
    out = tmp_path / "store"
    with caplog.at_level(logging.WARNING, logger="mdgan"):
        records = ingest(str(frame_root), str(out), 64, workers=2)
    per_source = {}
    for r in records:
        per_source.setdefault(r.source_id, []).append(r)
    assert {k: len(v) for k, v in per_source.items()} == {"alpha": 3, "gamma": 2}
    assert any("beta" in r.getMessage() for r in caplog.records)

    store = ClipStore(str(out))
    assert store.resolution == 64
    assert store.verify() == []
    for r in per_source["alpha"]:
        pixels = store.load_pixels(r)
        assert pixels.shape == (3, 32, 64, 64)
        # Frame t du clip i = frame 32i + t de la source (natural sort : f2 avant f10)
        expected = np.arange(32 * r.clip_index, 32 * r.clip_index + 32)
        np.testing.assert_array_equal(pixels[0, :, 0, 0], expected)
        np.testing.assert_array_equal(pixels[1, :, 5, 9], 255 - expected)


def test_ingest_without_usable_source(tmp_path):
    root = tmp_path / "frames"
    _write_source(root, "short", 10)
    with pytest.raises(DataError):
        ingest(str(root), str(tmp_path / "store"), 64)
    with pytest.raises(DataError):
        ingest(str(tmp_path / "missing"), str(tmp_path / "store"), 64)
    with pytest.raises(ConfigError):
        ingest(str(root), str(tmp_path / "store"), 100)


def _records(counts):
    return [ClipRecord(f"s{s}", c, f"clips/s{s}_{c}.mdt", "unassigned", 64, 64)
            for s, n in enumerate(counts) for c in range(n)]


@pytest.mark.parametrize("seed", range(5))
def test_split_never_shares_a_source(seed):
    tagged = split(_records([3, 1, 4, 1, 5, 9, 2, 6]), 0.25, seed)
    train = {r.source_id for r in tagged if r.split == "train"}
    test = {r.source_id for r in tagged if r.split == "test"}
    assert train and test
    assert not train & test
    assert {r.split for r in tagged} == {"train", "test"}


def test_split_approaches_fraction_and_accepts_large_fractions():
    tagged = split(_records([2] * 20), 0.1, 0)
    assert sum(r.split == "test" for r in tagged) == 4
    mostly_test = split(_records([2] * 10), 0.9, 0)
    assert sum(r.split == "train" for r in mostly_test) == 2


def test_split_preconditions():
    with pytest.raises(ConfigError):
        split(_records([4]), 0.5, 0)
    with pytest.raises(ConfigError):
        split(_records([1, 1]), 1.0, 0)


def test_normalization_round_trip_is_exact():
    pixels = np.arange(256, dtype=np.uint8)
    values = normalize(pixels, np.float64)
    assert values.min() == -1.0 and values.max() == 1.0
    np.testing.assert_array_equal(denormalize(values), pixels)
    np.testing.assert_array_equal(denormalize(normalize(pixels, np.float32)), pixels)


def test_sampler_covers_epoch_without_duplicates(synth_store):
    n = len(synth_store.records_for("train"))
    sampler = ClipSampler(synth_store, "train", 1, np.random.default_rng(0))
    seen = [sampler.next_indices()[0] for _ in range(n)]
    assert sorted(seen) == list(range(n))


def test_sampler_state_restores_sequence(synth_store):
    a = ClipSampler(synth_store, "train", 2, np.random.default_rng(5))
    a.next_indices()
    state = json.loads(json.dumps(a.state()))
    expected = [a.next_indices() for _ in range(4)]
    b = ClipSampler(synth_store, "train", 2, np.random.default_rng(99))
    b.restore(state)
    assert [b.next_indices() for _ in range(4)] == expected


def test_load_batch_builds_duplicated_first_frame(synth_store):
    Y, X, state = load_batch(synth_store, "train", 2, seed=1, dtype=np.float64)
    assert Y.shape == X.shape == (2, 3, 32, 64, 64)
    for t in range(32):
        np.testing.assert_array_equal(X.values[:, :, t], Y.values[:, :, 0])
    assert -1.0 <= Y.values.min() and Y.values.max() <= 1.0
    _, _, state2 = load_batch(synth_store, "train", 2, state=state)
    assert state2["cursor"] != state["cursor"] or state2["epoch"] != state["epoch"]


def test_empty_split(synth_store_dir):
    store = ClipStore(synth_store_dir)
    with pytest.raises(DataError):
        ClipSampler(store, "validation", 1, np.random.default_rng(0))


def test_export_import_is_bitwise(synth_store, tmp_path):
    record = synth_store.records_for("test")[0]
    pixels = synth_store.load_pixels(record)
    paths = export_clip(pixels, str(tmp_path / "clip"))
    assert len(paths) == 32 and paths[0].endswith("frame_00000.ppm")
    np.testing.assert_array_equal(import_clip(str(tmp_path / "clip")), pixels)
    np.testing.assert_array_equal(clip_to_pixels(normalize(pixels, np.float64)), pixels)


def test_export_clamps_out_of_range(tmp_path, caplog):
    video = np.full((1, 3, 32, 4, 4), 1.5)
    with caplog.at_level(logging.WARNING, logger="mdgan"):
        export_clip(video, str(tmp_path / "out"))
    assert caplog.records
    assert import_clip(str(tmp_path / "out")).max() == 255


def test_frame_strip(tmp_path):
    video = np.zeros((3, 32, 4, 6), dtype=np.uint8)
    path = export_frame_strip(video, str(tmp_path / "strip.ppm"))
    with Image.open(path) as im:
        assert im.size == (30, 4)


def test_corrupt_manifest(tmp_path):
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "store.json").write_text(json.dumps({"resolution": 64}), encoding="utf-8")
    (broken / "manifest.jsonl").write_text("{not json\n", encoding="utf-8")
    with pytest.raises(IntegrityError):
        ClipStore(str(broken))


def test_split_store_rewrites_manifest(frame_root, tmp_path):
    out = tmp_path / "store"
    ingest(str(frame_root), str(out), 64)
    split_store(str(out), 0.4, 3)
    counts = ClipStore(str(out)).split_counts()
    assert set(counts) == {"train", "test"}
    assert sum(counts.values()) == 5
    assert os.path.exists(out / "store.json")
