"""Tests for the gradient tape: forward oracles, backward rules, grad_check."""

import math

import numpy as np
import pytest

from acrotag.autodiff import PROB_FLOOR, Tape, Tensor, grad_check


def softmax(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class TestForwardOps:
    def test_matmul_and_transpose(self):
        tape = Tape()
        a = tape.leaf([[1.0, 2.0], [3.0, 4.0]])
        b = tape.leaf([[1.0, 0.0], [0.0, 1.0]])
        np.testing.assert_array_equal(tape.matmul(a, b).value, a.value)
        np.testing.assert_array_equal(tape.transpose(a).value, a.value.T)

    def test_matmul_shape_mismatch(self):
        tape = Tape()
        a = tape.leaf(np.ones((2, 3)))
        b = tape.leaf(np.ones((2, 3)))
        with pytest.raises(ValueError):
            tape.matmul(a, b)

    def test_add_bias_broadcasts_over_rows(self):
        tape = Tape()
        m = tape.leaf(np.zeros((3, 2)))
        b = tape.leaf([1.0, -1.0])
        np.testing.assert_array_equal(tape.add_bias(m, b).value, [[1, -1]] * 3)

    def test_embed_lookup_gathers_rows(self):
        tape = Tape()
        table = tape.leaf(np.arange(12.0).reshape(4, 3))
        out = tape.embed_lookup(table, [2, 0, 2])
        np.testing.assert_array_equal(out.value, table.value[[2, 0, 2]])
        with pytest.raises(ValueError):
            tape.embed_lookup(table, [4])

    def test_softmax_rows_sum_to_one(self):
        tape = Tape()
        rng = np.random.default_rng(0)
        out = tape.softmax_rows(tape.leaf(rng.normal(size=(6, 5)) * 10))
        np.testing.assert_allclose(out.value.sum(axis=1), np.ones(6), rtol=0, atol=1e-12)
        assert (out.value > 0).all()

    def test_layer_norm_rows_standardized(self):
        tape = Tape()
        rng = np.random.default_rng(1)
        x = tape.leaf(rng.normal(size=(4, 8)))
        gamma = tape.leaf(np.ones(8))
        beta = tape.leaf(np.zeros(8))
        y = tape.layer_norm(x, gamma, beta).value
        np.testing.assert_allclose(y.mean(axis=1), np.zeros(4), atol=1e-12)
        np.testing.assert_allclose(y.std(axis=1), np.ones(4), atol=1e-3)

    def test_finite_outputs_on_extreme_inputs(self):
        tape = Tape()
        big = tape.leaf([[1e6, -1e6, 0.0, 5.0, -5.0]])
        assert np.isfinite(tape.softmax_rows(big).value).all()
        assert np.isfinite(tape.elementwise_tanh(big).value).all()
        flat = tape.leaf(np.full((2, 4), 3.14))  # zero-variance rows
        g = tape.leaf(np.ones(4))
        z = tape.leaf(np.zeros(4))
        assert np.isfinite(tape.layer_norm(flat, g, z).value).all()


class TestCrossEntropy:
    def test_uniform_oracle(self):
        for T in (1, 4, 64):
            tape = Tape()
            probs = tape.leaf(np.full((T, 5), 0.2))
            onehot = np.zeros((T, 5))
            onehot[:, 2] = 1.0
            loss = tape.cross_entropy_sum(probs, onehot, np.ones(T))
            assert abs(float(loss.value) - T * math.log(5.0)) <= 1e-12

    def test_sum_not_mean(self):
        onehot = np.zeros((3, 5))
        onehot[:, 0] = 1.0
        tape = Tape()
        p = tape.leaf(np.full((3, 5), 0.2))
        loss3 = float(tape.cross_entropy_sum(p, onehot, np.ones(3)).value)
        tape = Tape()
        p1 = tape.leaf(np.full((1, 5), 0.2))
        loss1 = float(tape.cross_entropy_sum(p1, onehot[:1], np.ones(1)).value)
        np.testing.assert_allclose(loss3, 3 * loss1, rtol=1e-15)

    def test_mask_excludes_tokens(self):
        rng = np.random.default_rng(3)
        probs = softmax(rng.normal(size=(6, 5)))
        onehot = np.eye(5)[rng.integers(0, 5, size=6)]
        mask = np.array([1, 0, 1, 1, 0, 0], dtype=float)
        tape = Tape()
        full = tape.cross_entropy_sum(tape.leaf(probs), onehot, mask)
        tape2 = Tape()
        keep = mask.astype(bool)
        sub = tape2.cross_entropy_sum(tape2.leaf(probs[keep]), onehot[keep], np.ones(3))
        np.testing.assert_allclose(float(full.value), float(sub.value), rtol=1e-15)
        tape.backward(full)
        grads = tape.nodes[0].grad
        np.testing.assert_array_equal(grads[~keep], np.zeros((3, 5)))

    def test_probability_floor_keeps_loss_finite(self):
        tape = Tape()
        p = tape.leaf([[0.0, 1.0, 0.0, 0.0, 0.0]])
        onehot = np.zeros((1, 5))
        onehot[0, 0] = 1.0
        loss = tape.cross_entropy_sum(p, onehot, np.ones(1))
        assert float(loss.value) == pytest.approx(-math.log(PROB_FLOOR))
        tape.backward(loss)
        assert p.grad[0, 0] == 0.0  # clamped cell contributes no gradient


class TestBackward:
    def test_requires_scalar_loss(self):
        tape = Tape()
        a = tape.leaf(np.ones((2, 2)))
        with pytest.raises(ValueError):
            tape.backward(a)

    def test_unreached_nodes_get_zero_gradient(self):
        tape = Tape()
        a = tape.leaf(np.full((1, 5), 0.2))
        orphan = tape.leaf(np.ones((3, 2)))
        onehot = np.zeros((1, 5))
        onehot[0, 1] = 1.0
        tape.backward(tape.cross_entropy_sum(a, onehot, np.ones(1)))
        np.testing.assert_array_equal(orphan.grad, np.zeros((3, 2)))

    def test_fanout_accumulates(self):
        tape = Tape()
        a = tape.leaf(np.full((1, 5), 0.2))
        doubled = tape.add(a, a)
        onehot = np.zeros((1, 5))
        onehot[0, 0] = 1.0
        tape.backward(tape.cross_entropy_sum(doubled, onehot, np.ones(1)))
        np.testing.assert_allclose(a.grad[0, 0], 2 * (-1.0 / 0.4))

    def test_backward_is_idempotent(self):
        tape = Tape()
        rng = np.random.default_rng(4)
        a = tape.leaf(rng.normal(size=(3, 5)))
        probs = tape.softmax_rows(a)
        onehot = np.eye(5)[[0, 1, 2]]
        loss = tape.cross_entropy_sum(probs, onehot, np.ones(3))
        tape.backward(loss)
        first = a.grad.copy()
        tape.backward(loss)
        np.testing.assert_array_equal(a.grad, first)

    def test_softmax_cross_entropy_gradient_identity(self):
        # d(loss)/d(logits) for softmax + CE is probs - onehot on counted rows
        rng = np.random.default_rng(5)
        logits = rng.normal(size=(7, 5))
        onehot = np.eye(5)[rng.integers(0, 5, size=7)]
        mask = np.array([1, 1, 0, 1, 0, 1, 1], dtype=float)
        tape = Tape()
        z = tape.leaf(logits)
        loss = tape.cross_entropy_sum(tape.softmax_rows(z), onehot, mask)
        tape.backward(loss)
        expected = (softmax(logits) - onehot) * mask[:, None]
        np.testing.assert_allclose(z.grad, expected, rtol=1e-12, atol=1e-12)


def composite_loss(tape, leaves, idx, onehot, mask, extra_rows):
    """A small network touching every differentiable op."""
    table, w, b, gamma, beta, wc = leaves
    e = tape.embed_lookup(table, idx)
    h = tape.elementwise_tanh(tape.add_bias(tape.matmul(e, w), b))
    h = tape.layer_norm(h, gamma, beta)
    h = tape.add(h, e)
    h = tape.concat_rows(h, tape.leaf(extra_rows))
    h = tape.scale(h, 0.5)
    att = tape.softmax_rows(tape.matmul(h, tape.transpose(h)))
    logits = tape.matmul(tape.matmul(att, h), wc)
    return tape.cross_entropy_sum(tape.softmax_rows(logits), onehot, mask)


class TestGradCheck:
    def test_composite_network_matches_central_differences(self):
        rng = np.random.default_rng(6)
        d, C, T = 4, 5, 5
        leaves = [
            rng.normal(size=(7, d)) * 0.5,   # embedding table
            rng.normal(size=(d, d)) * 0.5,
            rng.normal(size=(d,)),
            rng.normal(size=(d,)) + 1.0,
            rng.normal(size=(d,)),
            rng.normal(size=(d, C)) * 0.5,
        ]
        idx = np.array([0, 3, 6, 2, 1])
        onehot = np.eye(C)[rng.integers(0, C, size=T + 2)]
        mask = np.array([1, 1, 0, 1, 1, 0, 0], dtype=float)
        extra = rng.normal(size=(2, d))

        def build(tape, nodes):
            return composite_loss(tape, nodes, idx, onehot, mask, extra)

        assert grad_check(build, leaves) < 1e-6

    def test_each_op_individually(self):
        rng = np.random.default_rng(8)
        onehot = np.eye(5)[rng.integers(0, 5, size=4)]
        mask = np.ones(4)

        def to_loss(tape, m):
            # funnel an arbitrary (4, 5) tensor into a scalar
            return tape.cross_entropy_sum(tape.softmax_rows(m), onehot, mask)

        cases = {
            "matmul": (lambda t, n: to_loss(t, t.matmul(n[0], n[1])),
                       [rng.normal(size=(4, 3)), rng.normal(size=(3, 5))]),
            "transpose": (lambda t, n: to_loss(t, t.transpose(n[0])),
                          [rng.normal(size=(5, 4))]),
            "add": (lambda t, n: to_loss(t, t.add(n[0], n[1])),
                    [rng.normal(size=(4, 5)), rng.normal(size=(4, 5))]),
            "add_bias": (lambda t, n: to_loss(t, t.add_bias(n[0], n[1])),
                         [rng.normal(size=(4, 5)), rng.normal(size=(5,))]),
            "tanh": (lambda t, n: to_loss(t, t.elementwise_tanh(n[0])),
                     [rng.normal(size=(4, 5))]),
            "scale": (lambda t, n: to_loss(t, t.scale(n[0], -2.5)),
                      [rng.normal(size=(4, 5))]),
            "concat_rows": (lambda t, n: to_loss(t, t.concat_rows(n[0], n[1])),
                            [rng.normal(size=(1, 5)), rng.normal(size=(3, 5))]),
            "embed_lookup": (lambda t, n: to_loss(t, t.embed_lookup(n[0], [1, 0, 2, 1])),
                             [rng.normal(size=(3, 5))]),
            "layer_norm": (lambda t, n: to_loss(t, t.layer_norm(n[0], n[1], n[2])),
                           [rng.normal(size=(4, 5)), rng.normal(size=(5,)) + 1.0,
                            rng.normal(size=(5,))]),
            "softmax": (lambda t, n: to_loss(t, t.scale(t.softmax_rows(n[0]), 3.0)),
                        [rng.normal(size=(4, 5))]),
        }
        for name, (build, leaves) in cases.items():
            err = grad_check(build, leaves)
            assert err < 1e-6, f"{name}: {err}"

    def test_random_seeds_loop(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            onehot = np.eye(5)[rng.integers(0, 5, size=3)]

            def build(tape, nodes):
                h = tape.elementwise_tanh(tape.matmul(nodes[0], nodes[1]))
                return tape.cross_entropy_sum(tape.softmax_rows(h), onehot, np.ones(3))

            leaves = [rng.normal(size=(3, 4)), rng.normal(size=(4, 5))]
            assert grad_check(build, leaves) < 1e-6

    def test_does_not_mutate_inputs(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=(2, 5))
        snapshot = x.copy()
        onehot = np.eye(5)[[0, 1]]
        grad_check(lambda t, n: t.cross_entropy_sum(t.softmax_rows(n[0]), onehot, np.ones(2)), [x])
        np.testing.assert_array_equal(x, snapshot)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            grad_check(lambda t, n: n[0], [np.ones(())], h=0.0)

    def test_rejects_non_finite_values(self):
        def build(tape, nodes):
            return tape.scale(nodes[0], float("inf"))

        with pytest.raises(FloatingPointError):
            grad_check(build, [np.asarray(1.0)])


class TestTensor:
    def test_leaf_converts_to_float64(self):
        tape = Tape()
        t = tape.leaf([[1, 2], [3, 4]])
        assert t.value.dtype == np.float64
        assert t.shape == (2, 2)
        assert isinstance(t, Tensor)

    def test_tape_is_append_only(self):
        tape = Tape()
        a = tape.leaf(np.ones((2, 2)))
        b = tape.leaf(np.ones((2, 2)))
        tape.add(a, b)
        assert len(tape.nodes) == 3
        assert tape.nodes[0] is a and tape.nodes[1] is b
