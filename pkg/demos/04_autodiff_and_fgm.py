"""
The gradient tape and the FGM perturbation
==========================================

Every tensor operation appends a node to a tape; backward on a scalar
walks the tape in reverse and accumulates gradients into every node.
The adversarial perturbation is then one normalization away from the
gradient at the input embedding.
"""

import numpy as np

from acrotag import Tape, fgm_perturbation, grad_check

# Differentiate a small expression: mean-ish loss over tanh(x @ w + b).
tape = Tape()
x = tape.leaf(np.array([[0.5, -1.0], [2.0, 0.3]]))
w = tape.leaf(np.array([[1.0, 0.0], [0.2, -0.7]]))
b = tape.leaf(np.array([0.1, -0.1]))
h = tape.elementwise_tanh(tape.add_bias(tape.matmul(x, w), b))
probs = tape.softmax_rows(h)
one_hot = np.array([[1.0, 0.0], [0.0, 1.0]])
loss = tape.cross_entropy_sum(probs, one_hot, np.ones(2))
tape.backward(loss)
print("loss:", float(loss.value))
print("dloss/dx:\n", x.grad)

# A finite-difference check confirms the analytic gradients.
def build(check_tape, nodes):
    xs, ws, bs = nodes
    hidden = check_tape.elementwise_tanh(
        check_tape.add_bias(check_tape.matmul(xs, ws), bs))
    return check_tape.cross_entropy_sum(
        check_tape.softmax_rows(hidden), one_hot, np.ones(2))

err = grad_check(build, [x.value, w.value, b.value])
print(f"grad check worst relative error: {err:.2e}")

# FGM: the adversarial direction is the input gradient, rescaled to a
# fixed L2 radius.  Scaling the gradient does not change the direction.
r = fgm_perturbation(x.grad, epsilon=0.25)
print("perturbation norm:", float(np.linalg.norm(r)))
assert np.array_equal(fgm_perturbation(4.0 * x.grad, epsilon=0.25), r)
print("perturbation:\n", r)
