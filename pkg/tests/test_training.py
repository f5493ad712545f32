from types import SimpleNamespace

import numpy as np
import pytest

from tausnn.data import synth_images
from tausnn.experiments import default_architecture
from tausnn.network import Architecture, forward_batch
from tausnn.numerics import Rng
from tausnn.training import (TrainConfig, train, evaluate, save_checkpoint,
                             load_checkpoint, CheckpointDigestError,
                             CheckpointVersionError, _Optimizer)


@pytest.fixture(scope="module")
def small_arch():
    return Architecture((784, 16, 10), 10)


@pytest.fixture(scope="module")
def tiny_dataset():
    rng = Rng(42)
    return synth_images(120, rng), synth_images(40, rng.child(1))


class TestTrain:
    def test_zero_epochs(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        model, history = train(small_arch, ds, TrainConfig(epochs=0, seed=3),
                               holdout=ev)
        ref, _ = train(small_arch, ds, TrainConfig(epochs=0, seed=3), holdout=ev)
        assert history.train_loss == [] and history.holdout_accuracy == []
        for a, b in zip(model.weights, ref.weights):
            assert np.array_equal(a, b)

    def test_deterministic(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        cfg = TrainConfig(epochs=2, seed=7, batch_size=32)
        m1, h1 = train(small_arch, ds, cfg, holdout=ev)
        m2, h2 = train(small_arch, ds, cfg, holdout=ev)
        for a, b in zip(m1.weights + m1.biases, m2.weights + m2.biases):
            assert np.array_equal(a, b)
        assert h1.train_loss == h2.train_loss
        assert h1.holdout_accuracy == h2.holdout_accuracy

    def test_separable_two_class(self):
        rng = Rng(0)
        ds = synth_images(400, rng, n_classes=2)
        ev = synth_images(100, rng.child(1), n_classes=2)
        arch = default_architecture("static")
        _, history = train(arch, ds, TrainConfig(epochs=5, seed=1, task="static"),
                           holdout=ev)
        assert history.holdout_accuracy[-1] >= 0.99

    def test_history_losses_finite(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        _, history = train(small_arch, ds, TrainConfig(epochs=2, seed=1), holdout=ev)
        assert all(np.isfinite(l) for l in history.train_loss)
        assert all(0.0 <= a <= 1.0 for a in history.holdout_accuracy)

    def test_default_holdout_split(self, small_arch, tiny_dataset):
        ds, _ = tiny_dataset
        _, history = train(small_arch, ds, TrainConfig(epochs=1, seed=1))
        assert len(history.holdout_accuracy) == 1

    def test_empty_dataset_rejected(self, small_arch):
        with pytest.raises(ValueError):
            train(small_arch, [], TrainConfig())


class TestEvaluate:
    def test_all_correct(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        model, _ = train(small_arch, ds, TrainConfig(epochs=3, seed=2), holdout=ev)
        from tausnn.encoding import encode_batch
        raw = np.stack([i.pixels for i in ev]).astype(np.float64)
        logits, _ = forward_batch(model, encode_batch("static", raw, 10))
        relabeled = [type(ev[0])(ev[i].pixels, int(np.argmax(logits[i])) % 10)
                     for i in range(len(ev))]
        assert evaluate(model, relabeled, model.lif_params.tau_discrete,
                        task="static") == 1.0

    def test_single_wrong_label(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        model, _ = train(small_arch, ds, TrainConfig(epochs=1, seed=2), holdout=ev)
        item = ev[0]
        from tausnn.encoding import encode_static
        from tausnn.network import predict
        pred = predict(model, encode_static(item.pixels.astype(np.float64), 10))
        wrong = type(item)(item.pixels, (pred + 1) % 10)
        assert evaluate(model, [wrong], model.lif_params.tau_discrete,
                        task="static") == 0.0

    def test_read_only_tau_overrides(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        model, _ = train(small_arch, ds, TrainConfig(epochs=1, seed=4), holdout=ev)
        tau0 = model.lif_params.tau_discrete
        before = evaluate(model, ev, tau0, task="static")
        evaluate(model, ev, 2.0, task="static")
        evaluate(model, ev, 256.0, task="static")
        assert evaluate(model, ev, tau0, task="static") == before
        assert model.lif_params.tau_discrete == tau0


class TestOptimizer:
    def test_zero_learning_rate_is_identity(self, small_arch):
        model_cfg = TrainConfig(epochs=1)
        from tausnn.network import TauSnn
        from tausnn.neuron import LifParams
        model = TauSnn.initialize(small_arch, LifParams(), Rng(0))
        before = [w.copy() for w in model.weights + model.biases]
        for name in ("sgd", "adam"):
            cfg = SimpleNamespace(optimizer=name, learning_rate=0.0,
                                  beta1=0.9, beta2=0.999, adam_eps=1e-8)
            opt = _Optimizer(cfg, model)
            grads_w = [np.ones(w.shape) for w in model.weights]
            grads_b = [np.ones(b.shape) for b in model.biases]
            opt.step(model, grads_w, grads_b)
            for a, b in zip(model.weights + model.biases, before):
                assert np.array_equal(a, b)
        assert model_cfg.learning_rate > 0

    def test_sgd_supported(self, small_arch, tiny_dataset):
        ds, ev = tiny_dataset
        cfg = TrainConfig(epochs=1, optimizer="sgd", learning_rate=0.1, seed=1)
        _, history = train(small_arch, ds, cfg, holdout=ev)
        assert np.isfinite(history.train_loss[0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(optimizer="rmsprop")
        with pytest.raises(ValueError):
            TrainConfig(tau_train=0.5)


class TestCheckpoint:
    def make_model(self, seed=0):
        from tausnn.network import TauSnn
        from tausnn.neuron import LifParams
        arch = Architecture((12, 8, 4), 6)
        return TauSnn.initialize(arch, LifParams(tau_discrete=64.0), Rng(seed))

    def test_round_trip_forward_equality(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path, TrainConfig(tau_train=64.0))
        loaded = load_checkpoint(path)
        for seed in range(10):
            cur = Rng(seed).uniform(0, 1, (1, 6, 12))
            a, _ = forward_batch(model, cur)
            b, _ = forward_batch(loaded, cur)
            assert np.array_equal(a, b)

    def test_truncated_file_gives_digest_error(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        data = path.read_bytes()
        path.write_bytes(data[:-17])
        with pytest.raises(CheckpointDigestError, match="truncated"):
            load_checkpoint(path)

    def test_corrupt_payload_names_digests(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        data = bytearray(path.read_bytes())
        data[-1] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointDigestError, match="expected .* actual"):
            load_checkpoint(path)

    def test_unknown_version(self, tmp_path):
        model = self.make_model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path)
        text = path.read_bytes()
        path.write_bytes(text.replace(b'"version": 1', b'"version": 9'))
        with pytest.raises(CheckpointVersionError):
            load_checkpoint(path)

    def test_config_echo(self, tmp_path):
        import json
        model = self.make_model()
        path = tmp_path / "m.ckpt"
        save_checkpoint(model, path, TrainConfig(tau_train=64.0, seed=5))
        header = path.read_bytes().split(b"\n\n", 1)[0].split(b"\n", 1)[1]
        payload = json.loads(header)
        assert payload["train_config"]["tau_train"] == 64.0
        assert payload["train_config"]["seed"] == 5
        assert payload["rng_algorithm"] == "numpy-philox4x64"
