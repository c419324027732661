import numpy as np
import pytest

from rwe import network
from rwe.embeddings import DenseVectorStore
from rwe.errors import DimensionMismatchError, WordLookupError
from rwe.relvec import RelationVectorStore


def _random_model(rng, n_words=5, d=4, h=8, activation="relu"):
    words = [f"w{i}" for i in range(n_words)]
    std = DenseVectorStore(words, rng.standard_normal((n_words, d)))
    model = network.init_model(std, words, hidden=h, seed=int(rng.integers(1 << 30)),
                               output_activation=activation)
    model.a = rng.standard_normal(h) * 0.1
    model.b = rng.standard_normal(d) * 0.1
    return model


def _random_batch(rng, model, size=3):
    n = len(model.words)
    batch, targets = [], {}
    while len(batch) < size:
        i, j = rng.integers(0, n, 2)
        if i == j:
            continue
        pair = (model.words[i], model.words[j])
        key = tuple(sorted(pair))
        if key in targets:
            continue
        targets[key] = rng.standard_normal(model.dim)
        batch.append(pair)
    return batch, RelationVectorStore(model.dim, targets)


def _fd_gradient(model, batch, targets, param, idx, eps=1e-5):
    orig = param[idx]
    param[idx] = orig + eps
    up = network.batch_loss(model, batch, targets)
    param[idx] = orig - eps
    down = network.batch_loss(model, batch, targets)
    param[idx] = orig
    return (up - down) / (2 * eps)


def _check_gradients(model, batch, targets, tol=1e-4):
    grads = network.gradients(model, batch, targets)
    dense_E = np.zeros_like(model.E)
    dense_E[grads["E_idx"]] = grads["E_rows"]
    analytic = {"X": grads["X"], "a": grads["a"], "Y": grads["Y"], "b": grads["b"], "E": dense_E}
    for name in ("E", "X", "a", "Y", "b"):
        param = getattr(model, name)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            fd = _fd_gradient(model, batch, targets, param, idx)
            an = analytic[name][idx]
            scale = max(abs(fd), abs(an))
            if scale > 1e-7:
                assert abs(fd - an) / scale < tol, f"{name}{idx}: {fd} vs {an}"


class TestEncodePairInput:
    def test_hand_value(self):
        np.testing.assert_array_equal(
            network.encode_pair_input([1, 0], [0, 1]), [1, 1, 0, 0]
        )

    def test_equal_vectors(self):
        np.testing.assert_array_equal(
            network.encode_pair_input([2, 3], [2, 3]), [4, 6, 4, 9]
        )

    def test_commutative(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            u, v = rng.standard_normal((2, 6))
            np.testing.assert_array_equal(
                network.encode_pair_input(u, v), network.encode_pair_input(v, u)
            )

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            network.encode_pair_input([1, 2], [1, 2, 3])


class TestForward:
    def test_zero_network_relu(self):
        rng = np.random.default_rng(1)
        model = _random_model(rng)
        model.X[...] = 0
        model.Y[...] = 0
        model.a[...] = 0
        model.b[...] = 0
        np.testing.assert_array_equal(network.forward(model, ("w0", "w1")), np.zeros(model.dim))

    def test_bias_passthrough_identity(self):
        rng = np.random.default_rng(2)
        model = _random_model(rng, activation="identity")
        model.X[...] = 0
        model.a[...] = 0
        model.Y[...] = 0
        np.testing.assert_array_equal(network.forward(model, ("w0", "w1")), model.b)

    def test_hand_arithmetic_2d(self):
        words = ["p", "q"]
        std = DenseVectorStore(words, np.array([[1.0, 2.0], [3.0, -1.0]]))
        model = network.init_model(std, words, hidden=2, seed=0, output_activation="identity")
        model.X = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0]])
        model.a = np.array([0.5, -10.0])
        model.Y = np.array([[1.0, 1.0], [0.0, 2.0]])
        model.b = np.array([0.0, 1.0])
        # i = (4, 1, 3, -2); z1 = (4.5, -6); h = (4.5, 0); o = (4.5, 1)
        np.testing.assert_allclose(network.forward(model, ("p", "q")), [4.5, 1.0], atol=1e-12)

    def test_unknown_word(self):
        rng = np.random.default_rng(3)
        model = _random_model(rng)
        with pytest.raises(WordLookupError):
            network.forward(model, ("w0", "nope"))

    def test_symmetry_bitwise(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            model = _random_model(rng)
            w, v = model.words[0], model.words[1]
            np.testing.assert_array_equal(
                network.forward(model, (w, v)), network.forward(model, (v, w))
            )


class TestBatchLoss:
    def test_exact_fit_zero(self):
        rng = np.random.default_rng(5)
        model = _random_model(rng)
        batch, _ = _random_batch(rng, model)
        targets = RelationVectorStore(
            model.dim, {tuple(sorted(p)): network.forward(model, p) for p in batch}
        )
        assert network.batch_loss(model, batch, targets) < 1e-24

    def test_hand_value(self):
        rng = np.random.default_rng(6)
        model = _random_model(rng, d=2, h=4, activation="identity")
        model.X[...] = 0
        model.a[...] = 0
        model.Y[...] = 0
        model.b = np.array([1.0, 0.0])  # output is (1, 0) for every pair
        targets = RelationVectorStore(2, {("w0", "w1"): np.array([0.0, 1.0])})
        assert network.batch_loss(model, [("w0", "w1")], targets) == pytest.approx(2.0)

    def test_additive_over_batches(self):
        rng = np.random.default_rng(7)
        model = _random_model(rng)
        batch, targets = _random_batch(rng, model, size=4)
        total = network.batch_loss(model, batch, targets)
        split = network.batch_loss(model, batch[:2], targets) + network.batch_loss(
            model, batch[2:], targets
        )
        assert total == pytest.approx(split, rel=1e-12)


class TestGradients:
    def test_zero_loss_zero_gradients(self):
        rng = np.random.default_rng(8)
        model = _random_model(rng)
        batch, _ = _random_batch(rng, model)
        targets = RelationVectorStore(
            model.dim, {tuple(sorted(p)): network.forward(model, p) for p in batch}
        )
        grads = network.gradients(model, batch, targets)
        for name in ("X", "a", "Y", "b", "E_rows"):
            np.testing.assert_allclose(grads[name], np.zeros_like(grads[name]), atol=1e-12)

    @pytest.mark.parametrize("activation", ["relu", "identity"])
    def test_finite_difference_check(self, activation):
        rng = np.random.default_rng(9)
        model = _random_model(rng, activation=activation)
        batch, targets = _random_batch(rng, model)
        _check_gradients(model, batch, targets)

    def test_untouched_word_gets_no_gradient(self):
        rng = np.random.default_rng(10)
        model = _random_model(rng, n_words=6)
        batch = [("w0", "w1"), ("w1", "w2")]
        targets = RelationVectorStore(
            model.dim,
            {tuple(sorted(p)): rng.standard_normal(model.dim) for p in batch},
        )
        grads = network.gradients(model, batch, targets)
        assert 5 not in grads["E_idx"]
        assert set(grads["E_idx"]) <= {0, 1, 2}


class TestTrain:
    def _teacher_student(self):
        rng = np.random.default_rng(1)
        d, h = 8, 16
        words = [f"w{i}" for i in range(20)]
        std = DenseVectorStore(words, rng.standard_normal((20, d)))
        teacher = network.init_model(std, words, hidden=h, seed=5, output_activation="identity")
        teacher.X = rng.standard_normal((h, 2 * d)) * 0.5
        teacher.Y = rng.standard_normal((d, h)) * 0.5
        pairs, seen = [], set()
        while len(pairs) < 50:
            i, j = rng.integers(0, 20, 2)
            key = tuple(sorted((f"w{i}", f"w{j}")))
            if i == j or key in seen:
                continue
            seen.add(key)
            pairs.append(key)
        targets = RelationVectorStore(d, {p: network.forward(teacher, p) for p in pairs})
        student = network.init_model(std, words, hidden=2 * h, seed=99,
                                     output_activation="identity")
        return std, pairs, targets, student

    def test_teacher_student_fit(self):
        _, pairs, targets, student = self._teacher_student()
        trace = network.fit_full_batch(student, pairs, targets, steps=2000, lr=2e-2)
        assert trace[-1] / len(pairs) < 1e-3

    def test_descent_with_small_plain_step(self):
        rng = np.random.default_rng(11)
        model = _random_model(rng, n_words=8, d=4, h=8)
        batch, targets = _random_batch(rng, model, size=6)
        loss = network.batch_loss(model, batch, targets)
        for _ in range(200):
            grads = network.gradients(model, batch, targets)
            network.apply_gradient_step(model, grads, lr=1e-4)
            new_loss = network.batch_loss(model, batch, targets)
            assert new_loss <= loss + 1e-12
            loss = new_loss

    def test_dev_split_floor(self):
        # 1% of 974,250 pairs -> 9,742 dev pairs by floor
        assert int(np.floor(0.01 * 974_250)) == 9742

    def test_train_determinism(self):
        std, pairs, targets, _ = self._teacher_student()
        outs = []
        for _ in range(2):
            model = network.init_model(std, [w for w in std.words], hidden=16, seed=7,
                                       output_activation="identity")
            cfg = network.TrainConfig(learning_rate=1e-3, batch_size=8, max_epochs=5,
                                      dev_fraction=0.1, patience=10, seed=21,
                                      output_activation="identity")
            network.train(model, targets, cfg)
            outs.append(model.copy_parameters())
        for name in outs[0]:
            np.testing.assert_array_equal(outs[0][name], outs[1][name])

    def test_early_stop_returns_best_dev(self):
        std, pairs, targets, student = self._teacher_student()
        cfg = network.TrainConfig(learning_rate=5e-3, batch_size=16, max_epochs=30,
                                  dev_fraction=0.1, patience=3, seed=2,
                                  output_activation="identity")
        history = network.train(student, targets, cfg)
        best = history["best_epoch"]
        assert history["dev"][best] == min(history["dev"])

    def test_empty_store_raises(self):
        rng = np.random.default_rng(12)
        model = _random_model(rng)
        empty = RelationVectorStore(model.dim, {})
        cfg = network.TrainConfig(dev_fraction=0.1)
        with pytest.raises(ValueError):
            network.train(model, empty, cfg)


class TestExportAndCheckpoint:
    def test_export_before_training_equals_init(self):
        rng = np.random.default_rng(13)
        words = ["a", "b", "c"]
        std = DenseVectorStore(words, rng.standard_normal((3, 4)))
        model = network.init_model(std, words, seed=0)
        out = network.export_relational_embeddings(model)
        assert out.words == words
        np.testing.assert_array_equal(out.matrix, std.matrix)

    def test_export_round_trips_through_text(self, tmp_path):
        from rwe.embeddings import load_text_embeddings, save_text_embeddings

        rng = np.random.default_rng(14)
        words = ["a", "b"]
        std = DenseVectorStore(words, rng.standard_normal((2, 4)))
        model = network.init_model(std, words, seed=0)
        out = network.export_relational_embeddings(model)
        path = tmp_path / "e.txt"
        save_text_embeddings(out, path)
        loaded = load_text_embeddings(path)
        np.testing.assert_allclose(loaded.matrix, out.matrix, atol=1e-5)

    def test_checkpoint_round_trip(self, tmp_path):
        rng = np.random.default_rng(15)
        model = _random_model(rng, n_words=4, d=3, h=6, activation="identity")
        path = tmp_path / "m.ckpt"
        network.save_checkpoint(model, path, seed=123)
        loaded, seed = network.load_checkpoint(path)
        assert seed == 123
        assert loaded.words == model.words
        assert loaded.output_activation == "identity"
        for name in ("E", "X", "a", "Y", "b"):
            np.testing.assert_allclose(
                getattr(loaded, name), getattr(model, name), atol=1e-6
            )
