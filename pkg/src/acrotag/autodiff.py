"""Minimal dense-tensor reverse-mode differentiation on a gradient tape.

Everything is float64.  A :class:`Tape` records each forward op in
execution order; :meth:`Tape.backward` replays the records once in reverse,
accumulating gradients into every node, so the gradient of the loss is
available both for parameters and for intermediate values such as the
input-embedding matrix of a sequence.

The op set is exactly what the tagger needs; there is no broadcasting
beyond bias-add over rows, which keeps every backward rule short enough
to audit by eye.
"""

from __future__ import annotations

import numpy as np

# Floor inside the cross-entropy log: perturbed forward passes can saturate
# softmax, and log(0) must not poison training with -inf.
PROB_FLOOR = 1e-12


class Tensor:
    """A value on the tape: numpy array plus the gradient slot."""

    __slots__ = ("value", "grad", "_backward")

    def __init__(self, value, backward=None):
        self.value = value
        self.grad = None
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape


def _acc(node: Tensor, g) -> None:
    # out-of-place accumulation; gradient arrays are never mutated
    node.grad = g if node.grad is None else node.grad + g


class Tape:
    """Append-only record of operations; topological order is append order."""

    def __init__(self):
        self.nodes: list[Tensor] = []

    def _node(self, value, backward=None) -> Tensor:
        t = Tensor(value, backward)
        self.nodes.append(t)
        return t

    def leaf(self, value) -> Tensor:
        """Enter an array as a differentiable leaf (parameter or input)."""
        return self._node(np.asarray(value, dtype=np.float64))

    # -- forward ops --------------------------------------------------------

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        av, bv = a.value, b.value
        if av.shape[-1] != bv.shape[0]:
            raise ValueError(f"matmul shape mismatch {av.shape} @ {bv.shape}")
        out = self._node(av @ bv)

        def bw(g):
            _acc(a, g @ bv.T)
            _acc(b, av.T @ g)

        out._backward = bw
        return out

    def transpose(self, a: Tensor) -> Tensor:
        out = self._node(a.value.T)
        out._backward = lambda g: _acc(a, g.T)
        return out

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape != b.value.shape:
            raise ValueError(f"add shape mismatch {a.value.shape} vs {b.value.shape}")
        out = self._node(a.value + b.value)

        def bw(g):
            _acc(a, g)
            _acc(b, g)

        out._backward = bw
        return out

    def add_bias(self, m: Tensor, b: Tensor) -> Tensor:
        """Rows of m plus a bias vector."""
        if m.value.ndim != 2 or b.value.shape != (m.value.shape[1],):
            raise ValueError(f"add_bias shape mismatch {m.value.shape} + {b.value.shape}")
        out = self._node(m.value + b.value)

        def bw(g):
            _acc(m, g)
            _acc(b, g.sum(axis=0))

        out._backward = bw
        return out

    def elementwise_tanh(self, a: Tensor) -> Tensor:
        y = np.tanh(a.value)
        out = self._node(y)
        out._backward = lambda g: _acc(a, g * (1.0 - y * y))
        return out

    def scale(self, a: Tensor, c: float) -> Tensor:
        out = self._node(a.value * c)
        out._backward = lambda g: _acc(a, g * c)
        return out

    def concat_rows(self, a: Tensor, b: Tensor) -> Tensor:
        if a.value.shape[1:] != b.value.shape[1:]:
            raise ValueError(f"concat_rows shape mismatch {a.value.shape} vs {b.value.shape}")
        out = self._node(np.concatenate([a.value, b.value], axis=0))
        ra = a.value.shape[0]

        def bw(g):
            _acc(a, g[:ra])
            _acc(b, g[ra:])

        out._backward = bw
        return out

    def embed_lookup(self, table: Tensor, indices) -> Tensor:
        idx = np.asarray(indices, dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= table.value.shape[0]):
            raise ValueError("embed_lookup index out of range")
        out = self._node(table.value[idx])

        def bw(g):
            gt = np.zeros_like(table.value)
            np.add.at(gt, idx, g)
            _acc(table, gt)

        out._backward = bw
        return out

    def softmax_rows(self, a: Tensor) -> Tensor:
        z = a.value - a.value.max(axis=1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=1, keepdims=True)
        out = self._node(y)

        def bw(g):
            _acc(a, (g - (g * y).sum(axis=1, keepdims=True)) * y)

        out._backward = bw
        return out

    def layer_norm(self, x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
        """Row-wise normalization with learned scale and shift."""
        xv = x.value
        mu = xv.mean(axis=1, keepdims=True)
        xc = xv - mu
        var = (xc * xc).mean(axis=1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = xc * inv
        out = self._node(xhat * gamma.value + beta.value)

        def bw(g):
            _acc(gamma, (g * xhat).sum(axis=0))
            _acc(beta, g.sum(axis=0))
            dxhat = g * gamma.value
            _acc(x, inv * (dxhat
                           - dxhat.mean(axis=1, keepdims=True)
                           - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)))

        out._backward = bw
        return out

    def cross_entropy_sum(self, probs: Tensor, one_hot_targets, mask) -> Tensor:
        """Summed cross-entropy over unmasked tokens (no mean reduction here).

        ``one_hot_targets`` is (T, C) with one-hot rows; ``mask`` is (T,) with
        1 for tokens that count and 0 for padding.
        """
        y = np.asarray(one_hot_targets, dtype=np.float64)
        m = np.asarray(mask, dtype=np.float64)
        p = probs.value
        if p.shape != y.shape or m.shape != (p.shape[0],):
            raise ValueError(f"cross_entropy_sum shape mismatch {p.shape}, {y.shape}, {m.shape}")
        pf = np.maximum(p, PROB_FLOOR)
        loss = -((y * np.log(pf)).sum(axis=1) * m).sum()
        out = self._node(np.asarray(loss))

        def bw(g):
            d = np.where(p >= PROB_FLOOR, -y / pf, 0.0) * m[:, None]
            _acc(probs, d * g)

        out._backward = bw
        return out

    # -- reverse sweep ------------------------------------------------------

    def backward(self, loss: Tensor) -> None:
        """Fill .grad on every tape node with dloss/dnode.

        Nodes not reachable from the loss get a zero gradient.
        """
        if loss.value.shape != ():
            raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")
        for n in self.nodes:
            n.grad = None
        loss.grad = np.asarray(1.0)
        for n in reversed(self.nodes):
            if n.grad is not None and n._backward is not None:
                n._backward(n.grad)
        for n in self.nodes:
            if n.grad is None:
                n.grad = np.zeros_like(n.value)


def grad_check(build, leaves, h: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    ``build(tape, leaf_tensors) -> scalar loss Tensor`` must be a pure,
    deterministic function of the leaf values.  The numeric side re-runs
    the forward pass at x +/- h per element and never touches the tape's
    analytic gradients, so the two routes stay independent.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    work = [np.array(x, dtype=np.float64) for x in leaves]

    tape = Tape()
    nodes = [tape.leaf(x) for x in work]
    loss = build(tape, nodes)
    tape.backward(loss)
    if not np.isfinite(loss.value):
        raise FloatingPointError("non-finite loss in grad_check")
    analytic = [n.grad.copy() for n in nodes]

    def f() -> float:
        t = Tape()
        out = build(t, [t.leaf(x) for x in work])
        v = float(out.value)
        if not np.isfinite(v):
            raise FloatingPointError("non-finite function value in grad_check")
        return v

    worst = 0.0
    for li, x in enumerate(work):
        flat = x.reshape(-1)
        ana = analytic[li].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            f_plus = f()
            flat[j] = orig - h
            f_minus = f()
            flat[j] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            err = abs(ana[j] - numeric) / max(abs(ana[j]), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst
