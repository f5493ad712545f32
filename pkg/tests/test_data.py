import gzip
import struct

import numpy as np
import pytest

from tausnn.data import (LabeledImage, LabeledWindow, load_mnist_idx,
                         load_series_csv, save_series_csv, synth_images,
                         synth_series, IdxMagicError, IdxTruncatedError,
                         IdxCountMismatchError, SeriesCsvError)
from tausnn.numerics import Rng


def write_idx_images(path, images):
    n = len(images)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            fh.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, len(labels)))
        fh.write(bytes(labels))


class TestIdxLoader:
    def test_single_zero_image(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs", tmp_path / "lbls"
        write_idx_images(img_path, [[0] * 784])
        write_idx_labels(lbl_path, [7])
        items = load_mnist_idx(img_path, lbl_path)
        assert len(items) == 1
        assert not items[0].pixels.any()
        assert items[0].label == 7

    def test_normalization_255_is_one(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs", tmp_path / "lbls"
        write_idx_images(img_path, [[255] * 784])
        write_idx_labels(lbl_path, [0])
        items = load_mnist_idx(img_path, lbl_path)
        assert np.all(items[0].pixels == 1.0)

    def test_wrong_magic(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs", tmp_path / "lbls"
        write_idx_labels(img_path, [0])  # label magic in the image slot
        write_idx_labels(lbl_path, [0])
        with pytest.raises(IdxMagicError):
            load_mnist_idx(img_path, lbl_path)

    def test_truncated_payload(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs", tmp_path / "lbls"
        with open(img_path, "wb") as fh:
            fh.write(struct.pack(">IIII", 0x00000803, 2, 28, 28))
            fh.write(bytes(784))  # one image short
        write_idx_labels(lbl_path, [0, 1])
        with pytest.raises(IdxTruncatedError):
            load_mnist_idx(img_path, lbl_path)

    def test_count_mismatch(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs", tmp_path / "lbls"
        write_idx_images(img_path, [[0] * 784, [0] * 784])
        write_idx_labels(lbl_path, [0])
        with pytest.raises(IdxCountMismatchError):
            load_mnist_idx(img_path, lbl_path)

    def test_gzipped_accepted(self, tmp_path):
        img_path, lbl_path = tmp_path / "imgs.gz", tmp_path / "lbls"
        raw = struct.pack(">IIII", 0x00000803, 1, 28, 28) + bytes([128] * 784)
        img_path.write_bytes(gzip.compress(raw))
        write_idx_labels(lbl_path, [3])
        items = load_mnist_idx(img_path, lbl_path)
        assert items[0].label == 3
        assert items[0].pixels[0] == pytest.approx(128 / 255)


class TestSeriesCsv:
    def test_two_windows(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("sample,label\n1.0,\n2.0,1\n3.0,\n4.0,2\n")
        wins = load_series_csv(path, window=2, stride=2)
        assert len(wins) == 2
        assert wins[0].label == 1 and wins[1].label == 2
        assert np.array_equal(wins[1].samples, [3.0, 4.0])

    def test_unlabeled_windows_dropped(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0,\n2.0,\n3.0,\n4.0,3\n")
        wins = load_series_csv(path, window=2, stride=2)
        assert len(wins) == 1 and wins[0].label == 3

    def test_empty_file(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("")
        assert load_series_csv(path, window=2, stride=1) == []

    def test_errors(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0,\nabc,\n")
        with pytest.raises(SeriesCsvError, match=":2"):
            load_series_csv(path, window=1, stride=1)
        path.write_text("1.0,9\n")
        with pytest.raises(SeriesCsvError, match="out of range"):
            load_series_csv(path, window=1, stride=1)
        path.write_text("1.0,0\n")
        with pytest.raises(SeriesCsvError, match="window"):
            load_series_csv(path, window=5, stride=1)

    def test_round_trip_with_generator(self, tmp_path):
        wins = synth_series(6, 64, Rng(4))
        path = tmp_path / "round.csv"
        save_series_csv(path, wins)
        loaded = load_series_csv(path, window=64, stride=64)
        assert len(loaded) == len(wins)
        for a, b in zip(wins, loaded):
            assert a.label == b.label
            assert np.array_equal(a.samples, b.samples)


class TestSynthImages:
    def test_deterministic(self):
        a = synth_images(20, Rng(5))
        b = synth_images(20, Rng(5))
        for x, y in zip(a, b):
            assert x.label == y.label and np.array_equal(x.pixels, y.pixels)

    def test_pixel_range_and_labels(self):
        for item in synth_images(50, Rng(1), n_classes=4):
            assert 0.0 <= item.pixels.min() and item.pixels.max() <= 1.0
            assert 0 <= item.label < 4

    def test_two_class_variant(self):
        labels = {i.label for i in synth_images(50, Rng(2), n_classes=2)}
        assert labels == {0, 1}


class TestSynthSeries:
    def test_deterministic(self):
        a = synth_series(20, 128, Rng(5))
        b = synth_series(20, 128, Rng(5))
        for x, y in zip(a, b):
            assert x.label == y.label and np.array_equal(x.samples, y.samples)

    def test_early_late_identical_histograms(self):
        wins = synth_series(400, 128, Rng(9))
        early = [w for w in wins if w.label == 0]
        late = [w for w in wins if w.label == 1]
        assert early and late
        ref = np.sort(early[0].samples)
        for w in early + late:
            assert np.array_equal(np.sort(w.samples), ref)

    def test_labels_cover_all_classes(self):
        labels = {w.label for w in synth_series(200, 128, Rng(3))}
        assert labels == {0, 1, 2, 3}


class TestDomainTypes:
    def test_labeled_image_validation(self):
        with pytest.raises(ValueError):
            LabeledImage(np.zeros(10), 0)
        with pytest.raises(ValueError):
            LabeledImage(np.zeros(784), 12)

    def test_labeled_window_validation(self):
        with pytest.raises(ValueError):
            LabeledWindow(np.zeros(0), 0)
        with pytest.raises(ValueError):
            LabeledWindow(np.zeros(8), 4)
