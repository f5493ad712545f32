import numpy as np
import pytest

from tausnn.encoding import (InputPlan, encode_static, encode_dynamic,
                             encode_series, encode_batch, segment_schedule)
from tausnn.neuron import LifParams, LifLayerState, lif_step
from tausnn.numerics import Rng


class TestEncodeStatic:
    def test_zero_image(self):
        plan = encode_static(np.zeros(784), 10)
        assert plan.steps == 10 and plan.width == 784
        assert not plan.currents.any()

    def test_constant_repetition(self):
        image = np.zeros(784)
        image[3] = 0.8
        plan = encode_static(image, 2)
        for t in range(2):
            assert plan.currents[t, 3] == 0.8
            assert plan.currents[t].sum() == 0.8

    def test_first_spike_step(self):
        # pixel 0.8 into a tau=2, theta=1 neuron: 0.8, then 1.2 -> spike
        image = np.zeros(784)
        image[3] = 0.8
        plan = encode_static(image, 10)
        p = LifParams(tau_discrete=2.0)
        state = LifLayerState.at_rest(784, p)
        first_spike = None
        for t in range(plan.steps):
            state, spikes = lif_step(state, plan.currents[t], p)
            if spikes[3] and first_spike is None:
                first_spike = t
        assert first_spike == 1  # second update
        assert state.v[3] != 0.0

    def test_step_invariance(self):
        plan = encode_static(Rng(0).uniform(0, 1, 784), 7)
        assert all(np.array_equal(plan.currents[t], plan.currents[0])
                   for t in range(7))

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            encode_static(np.zeros(100), 10)
        with pytest.raises(ValueError):
            encode_static(np.full(784, 1.5), 10)


class TestEncodeDynamic:
    def test_zero_image(self):
        assert not encode_dynamic(np.zeros(784), 10, 4).currents.any()

    def test_schedule(self):
        assert segment_schedule(10, 4).tolist() == [0, 0, 0, 1, 1, 2, 2, 2, 3, 3]

    def test_single_pixel_active_steps(self):
        image = np.zeros(784)
        image[300] = 0.6  # segment 1 (indices 196..391)
        plan = encode_dynamic(image, 10, 4)
        nz_steps = {t for t in range(10) if plan.currents[t].any()}
        assert nz_steps == {3, 4}
        for t in (3, 4):
            assert plan.currents[t, 300] == 0.6
            assert plan.currents[t].sum() == 0.6

    def test_column_conservation(self):
        image = Rng(1).uniform(0, 1, 784)
        plan = encode_dynamic(image, 10, 4)
        schedule = segment_schedule(10, 4)
        summed = plan.currents.sum(axis=0)
        rebuilt = np.empty(784)
        for seg in range(4):
            active = int((schedule == seg).sum())
            rebuilt[seg * 196:(seg + 1) * 196] = summed[seg * 196:(seg + 1) * 196] / active
        assert np.allclose(rebuilt, image)

    def test_segment_disjointness(self):
        plan = encode_dynamic(np.full(784, 0.5), 10, 4)
        for t in range(10):
            segs = {i // 196 for i in np.nonzero(plan.currents[t])[0]}
            assert len(segs) <= 1

    def test_rejects_bad_schedule(self):
        with pytest.raises(ValueError):
            encode_dynamic(np.zeros(784), 10, 3)  # 784 % 3 != 0
        with pytest.raises(ValueError):
            encode_dynamic(np.zeros(784), 3, 4)  # fewer steps than segments


class TestEncodeSeries:
    def test_constant_window(self):
        plan = encode_series(np.array([5.0, 5.0, 5.0]))
        assert np.array_equal(plan.currents[:, 0], [0.5, 0.5, 0.5])

    def test_min_max(self):
        plan = encode_series(np.array([0.0, 1.0, 2.0, 1.0]))
        assert np.array_equal(plan.currents[:, 0], [0.0, 0.5, 1.0, 0.5])

    def test_synthetic_beat_peak(self):
        # triangular beat: peak current 1.0 exactly at the peak index
        t = np.arange(128)
        beat = np.maximum(0.0, 1.0 - np.abs(t - 40) / 5.0) * 3.0 + 0.1
        plan = encode_series(beat)
        assert plan.steps == 128 and plan.width == 1
        assert plan.currents[40, 0] == 1.0
        assert int(np.argmax(plan.currents[:, 0])) == int(np.argmax(beat))

    def test_monotone_normalization(self):
        samples = Rng(2).uniform(-3, 3, 64)
        plan = encode_series(samples)
        assert np.array_equal(np.argsort(samples, kind="stable"),
                              np.argsort(plan.currents[:, 0], kind="stable"))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            encode_series(np.array([]))


class TestEncodeBatch:
    def test_matches_single_sample_encoders(self):
        rng = Rng(3)
        images = rng.uniform(0, 1, (5, 784))
        static = encode_batch("static", images, 10)
        dynamic = encode_batch("dynamic", images, 10)
        for i in range(5):
            assert np.array_equal(static[i], encode_static(images[i], 10).currents)
            assert np.array_equal(dynamic[i], encode_dynamic(images[i], 10, 4).currents)
        windows = rng.uniform(-1, 1, (5, 64))
        series = encode_batch("series", windows, 64)
        for i in range(5):
            assert np.array_equal(series[i], encode_series(windows[i]).currents)

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            encode_batch("poisson", np.zeros((1, 784)), 10)


class TestInputPlan:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            InputPlan(np.array([[np.inf]]))
