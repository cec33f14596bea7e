from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.data import split_dataset, synth_blobs
from src.trainer import (
    RELU,
    TANH,
    MlpModel,
    SgdMomentum,
    TrainConfig,
    backward,
    calibrate_gamma,
    check_total_loss_grad,
    compare_constrained,
    forward,
    init_mlp,
    layer_profile,
    load_checkpoint,
    rng_streams,
    save_checkpoint,
    ss_penalty,
    task_loss,
    total_loss,
    train,
)
from src.trainer.checkpoint import sidecar_path
from src.trainer.loop import LOG_COLUMNS
from src.utils.errors import TrainingDivergedError, ValidationError


def blobs(n_per_class=40, seed=0):
    return synth_blobs(3, n_per_class, dim=2, separation=5.0, seed=seed)


def task_only_training(model, data, cfg, steps_per_epoch):
    """Plain SGD-momentum on cross-entropy, consuming the shuffle stream like train()."""
    streams = rng_streams(cfg.seed)
    model = model.copy()
    optimizer = SgdMomentum(cfg.lr, cfg.momentum)
    steps = 0
    for _ in range(cfg.epochs):
        order = streams.shuffle.permutation(len(data))
        for start in range(0, len(data), cfg.batch_size):
            index = order[start:start + cfg.batch_size]
            cache = forward(model, data.x[index])
            _, dlogits = task_loss(cache.logits, data.y[index])
            optimizer.step(model, backward(model, cache, dlogits))
            steps += 1
    assert steps == cfg.epochs * steps_per_epoch
    return model


class TestMlp:
    def test_zero_weights_give_uniform_loss(self):
        model = MlpModel.from_flat((4, 5, 3), np.zeros(4 * 5 + 5 + 5 * 3 + 3))
        batch = np.random.default_rng(0).normal(size=(6, 4))
        cache = forward(model, batch)
        assert_array_equal(cache.logits, 0.0)
        loss, grad = task_loss(cache.logits, np.array([0, 1, 2, 0, 1, 2]))
        assert loss == pytest.approx(np.log(3), abs=1e-12)
        assert_allclose(grad.sum(axis=1), 0.0, atol=1e-15)

    def test_hidden_outputs_are_post_activation(self):
        model = init_mlp((3, 4, 4, 2), seed=1)
        cache = forward(model, np.random.default_rng(2).normal(size=(5, 3)))
        assert len(cache.hidden) == 2
        assert all(h.shape == (5, 4) and np.all(h >= 0) for h in cache.hidden)

    def test_flat_round_trip(self):
        model = init_mlp((3, 7, 2), TANH, seed=3)
        rebuilt = MlpModel.from_flat(model.widths, model.flat(), TANH)
        assert_array_equal(rebuilt.flat(), model.flat())

    def test_wrong_parameter_count(self):
        with pytest.raises(ValidationError):
            MlpModel.from_flat((2, 3, 2), np.zeros(5))

    def test_batch_shape_checked(self):
        with pytest.raises(ValidationError):
            forward(init_mlp((3, 4, 2)), np.zeros((5, 2)))

    def test_labels_checked(self):
        with pytest.raises(ValidationError):
            task_loss(np.zeros((2, 3)), np.array([0, 3]))


class TestPenalty:
    def test_alpha_zero_matches_task_gradients(self):
        model = init_mlp((2, 8, 8, 3), TANH, seed=0)
        data = blobs(10)
        cfg = TrainConfig(alpha=0.0, gamma_target=0.8)
        step = total_loss(model, data.x, data.y, cfg, np.random.default_rng(0))
        cache = forward(model, data.x)
        _, dlogits = task_loss(cache.logits, data.y)
        for got, expected in zip(step.grads, backward(model, cache, dlogits)):
            assert_array_equal(got, expected)
        assert step.penalty == 0.0 and step.ss_rate is None

    def test_alpha_zero_training_is_bit_identical_to_task_only(self):
        data = blobs(20)
        model = init_mlp((2, 8, 8, 3), seed=4)
        cfg = TrainConfig(alpha=0.0, gamma_target=0.3, epochs=10, batch_size=12, lr=0.05)
        result = train(model, data, cfg)
        expected = task_only_training(model, data, cfg, steps_per_epoch=5)
        assert_array_equal(result.model.flat(), expected.flat())

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_penalized_loss_gradient(self, seed):
        result = check_total_loss_grad(seed)
        assert result.checked > 0
        assert result.passed, f"max relative error {result.max_relative_error:.3e}"

    def test_penalty_reaches_layers_up_to_the_sampled_one(self):
        model = init_mlp((2, 6, 6, 6, 3), TANH, seed=5)
        data = blobs(6)
        plain = total_loss(model, data.x, data.y, TrainConfig(), None, k=0).grads
        cfg = TrainConfig(alpha=1e-4, gamma_target=0.9)
        for k in range(model.n_hidden):
            step = total_loss(model, data.x, data.y, cfg, None, k=k)
            assert step.penalty > 0.0
            for layer in range(len(model.weights)):
                same = np.array_equal(step.grads[2 * layer], plain[2 * layer])
                assert same == (layer > k)

    def test_every_hidden_layer_gets_sampled(self):
        model = init_mlp((2, 6, 6, 6, 3), TANH, seed=5)
        data = blobs(6)
        cfg = TrainConfig(alpha=1e-4, gamma_target=0.5)
        rng = np.random.default_rng(0)
        sampled = {total_loss(model, data.x, data.y, cfg, rng).k for _ in range(60)}
        assert sampled == {0, 1, 2}

    def test_gamma_per_layer_length_checked(self):
        model = init_mlp((2, 6, 6, 3), TANH)
        data = blobs(6)
        cfg = TrainConfig(alpha=1.0, gamma_target=(0.1, 0.2, 0.3))
        with pytest.raises(ValidationError):
            total_loss(model, data.x, data.y, cfg, None, k=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_penalty_step_moves_ss_rate_toward_gamma(self, seed):
        model = init_mlp((2, 8, 8, 3), TANH, seed=seed)
        batch = blobs(8, seed=seed).x
        cfg = TrainConfig(alpha=1.0, penalty_fac=1.0, gamma_target=0.2)
        for k in range(model.n_hidden):
            cache = forward(model, batch)
            before = ss_penalty(cache.hidden[k], 0.2, cfg)
            grads = backward(model, cache, np.zeros_like(cache.logits), {k: before.hidden_grad})
            if np.sqrt(sum(float(np.sum(g ** 2)) for g in grads)) <= 1e-10:
                continue
            stepped = model.copy()
            for param, grad in zip(stepped.parameters(), grads):
                param -= 1e-2 * grad
            after = ss_penalty(forward(stepped, batch).hidden[k], 0.2, cfg)
            assert after.value < before.value

    def test_penalty_fac_scales_the_gradient_only(self):
        hidden = np.random.default_rng(3).normal(size=(12, 6))
        one = ss_penalty(hidden, 0.1, TrainConfig(alpha=1.0, penalty_fac=1.0))
        ten = ss_penalty(hidden, 0.1, TrainConfig(alpha=1.0, penalty_fac=10.0))
        assert ten.value == one.value
        assert_allclose(ten.hidden_grad, 10.0 * one.hidden_grad, rtol=1e-12, atol=0.0)


class TestTraining:
    @pytest.mark.slow
    def test_blobs_are_learned(self):
        data = synth_blobs(3, 167, dim=2, separation=5.0, seed=0)
        model = init_mlp((2, 32, 32, 3), rng=rng_streams(0).init)
        result = train(model, data, TrainConfig(epochs=50, lr=0.05, momentum=0.9, batch_size=32))
        assert result.log.frame["train_acc"].iloc[-1] >= 0.95

    def test_log_columns_and_determinism(self):
        data = blobs(15)
        cfg = TrainConfig(alpha=1e-4, gamma_target=0.5, epochs=3, batch_size=16, seed=2)
        runs = [train(init_mlp((2, 6, 6, 3), TANH, seed=2), data, cfg) for _ in range(2)]
        assert tuple(runs[0].log.frame.columns) == LOG_COLUMNS
        assert len(runs[0].log) == 3
        assert runs[0].log.frame.equals(runs[1].log.frame)
        assert_array_equal(runs[0].model.flat(), runs[1].model.flat())

    def test_input_model_untouched(self):
        model = init_mlp((2, 6, 3), seed=0)
        before = model.flat().copy()
        train(model, blobs(10), TrainConfig(epochs=2))
        assert_array_equal(model.flat(), before)

    def test_divergence_raises_with_state(self, monkeypatch):
        import src.trainer.loop as loop

        real = loop.total_loss

        def blow_up(*args, **kwargs):
            return replace(real(*args, **kwargs), total=float("nan"))

        monkeypatch.setattr(loop, "total_loss", blow_up)
        with pytest.raises(TrainingDivergedError) as info:
            train(init_mlp((2, 6, 3)), blobs(10), TrainConfig(epochs=2))
        assert info.value.model is not None
        assert len(info.value.log) == 0

    def test_data_shape_checked(self):
        with pytest.raises(ValidationError):
            train(init_mlp((3, 6, 3)), blobs(5), TrainConfig(epochs=1))

    def test_calibrated_gamma(self):
        model = init_mlp((2, 8, 8, 3), seed=1)
        calibration = calibrate_gamma(model, blobs(15), TrainConfig(epochs=2))
        assert len(calibration.gamma) == 2
        assert all(0.0 <= g <= 1.0 for g in calibration.gamma)

    def test_calibration_rejects_penalty(self):
        with pytest.raises(ValidationError):
            calibrate_gamma(init_mlp((2, 8, 3)), blobs(5), TrainConfig(alpha=0.1))

    def test_layer_profile(self):
        model = init_mlp((2, 8, 8, 8, 3), seed=0)
        profile = layer_profile(model, blobs(20).x)
        assert len(profile.values) == 3
        assert all(0.0 <= v <= 1.0 for v in profile.values)
        with pytest.raises(ValidationError):
            layer_profile(model, blobs(5).x, mode="soft")

    def test_compare_constrained_report(self):
        cfg = TrainConfig(alpha=1e-4, epochs=2, batch_size=16)
        report = compare_constrained((2, 6, 6, 3), TANH, blobs(10), cfg, repeats=2)
        payload = report.to_dict()
        assert len(payload["gamma"]) == 2
        assert [run["seed"] for run in payload["baseline"]["runs"]] == [0, 1]
        assert len(payload["constrained"]["runs"]) == 2
        assert payload["baseline"]["val_acc"] == {"mean": None, "std": None}

    def test_train_log_reaches_every_hidden_layer(self):
        cfg = TrainConfig(alpha=1e-4, gamma_target=0.5, epochs=200, batch_size=16, seed=3)
        result = train(init_mlp((2, 6, 6, 6, 3), TANH, seed=3), blobs(10), cfg)
        frame = result.log.frame
        assert len(frame) == 200
        assert result.log.sampled_layers == {0, 1, 2}
        assert np.all(np.isfinite(frame["total_loss"]))
        assert frame["ss_rate_smooth"].notna().all()

    def test_log_keeps_the_last_sampled_layer(self):
        # 30 rows at batch 16: two steps per epoch.
        cfg = TrainConfig(alpha=1e-4, gamma_target=0.5, epochs=5, batch_size=16, seed=6)
        result = train(init_mlp((2, 6, 6, 6, 3), TANH, seed=6), blobs(10), cfg)
        sampling = rng_streams(6).layer_sampling
        draws = [int(sampling.integers(3)) for _ in range(10)]
        assert result.log.frame["k"].tolist() == draws[1::2]

    @pytest.mark.slow
    def test_penalty_holds_layers_near_gamma(self):
        data = synth_blobs(3, 167, dim=2, separation=5.0, seed=0)
        train_data, val_data = split_dataset(data, 0.2, rng_streams(0).split)
        cfg = TrainConfig(alpha=1e-4, epochs=200, seed=1)
        report = compare_constrained((2, 16, 16, 3), RELU, train_data, cfg, repeats=1, val_data=val_data)
        baseline, constrained = report.baseline[0], report.constrained[0]
        assert baseline.train_acc >= 0.95
        assert abs(constrained.train_acc - baseline.train_acc) <= 0.02
        assert constrained.gap < baseline.gap


class TestOptimizer:
    def test_clipping_rescales_update(self):
        model = MlpModel.from_flat((1, 1), np.zeros(2))
        optimizer = SgdMomentum(lr=0.1, momentum=0.0, clip_norm=1.0)
        optimizer.step(model, [np.array([[6.0]]), np.array([8.0])])
        assert_allclose(model.flat(), [-0.06, -0.08])

    def test_momentum_accumulates(self):
        model = MlpModel.from_flat((1, 1), np.zeros(2))
        optimizer = SgdMomentum(lr=1.0, momentum=0.5)
        grads = [np.array([[1.0]]), np.array([0.0])]
        optimizer.step(model, grads)
        optimizer.step(model, grads)
        assert model.weights[0][0, 0] == pytest.approx(-2.5)


class TestConfigValidation:
    @pytest.mark.parametrize("kwargs", [
        {"alpha": -1.0},
        {"penalty_fac": 0.0},
        {"lr": 0.0},
        {"momentum": 1.0},
        {"epochs": 0},
        {"batch_size": 1},
        {"normalizer_mode": "loose"},
        {"clip_norm": 0.0},
        {"gamma_target": float("nan")},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ValidationError):
            TrainConfig(**kwargs)

    def test_gamma_broadcast(self):
        assert TrainConfig(gamma_target=0.4).gamma_vector(3).tolist() == [0.4, 0.4, 0.4]
        assert TrainConfig(gamma_target=[0.1, 0.2]).gamma_for(1, 2) == 0.2


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model = init_mlp((3, 5, 4, 2), TANH, seed=8)
        path, meta = save_checkpoint(model, tmp_path / "model.bin")
        assert meta == sidecar_path(path)
        assert path.stat().st_size == 8 * model.flat().size
        loaded = load_checkpoint(path)
        assert loaded.widths == model.widths and loaded.activation == TANH
        assert_array_equal(loaded.flat(), model.flat())

    def test_missing_sidecar(self, tmp_path):
        path, meta = save_checkpoint(init_mlp((2, 3, 2)), tmp_path / "model.bin")
        meta.unlink()
        with pytest.raises(ValidationError):
            load_checkpoint(path)

    def test_truncated_binary(self, tmp_path):
        path, _ = save_checkpoint(init_mlp((2, 3, 2)), tmp_path / "model.bin")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValidationError):
            load_checkpoint(path)
