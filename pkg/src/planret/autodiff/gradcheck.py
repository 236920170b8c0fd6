"""Finite-difference verification of backward rules.

Every catalog op gets a builder that draws small float64 operands (extents
kept at 6 or below) and a closure mapping raw arrays to a scalar loss
through the op. The reported figure is the worst relative error between the
analytic gradient and central differences with step 1e-5, using
max(|a|, |b|, 1e-8) as the denominator.
"""

from __future__ import annotations

import numpy as np

from . import ops
from .tensor import backward

FD_STEP = 1e-5


def finite_difference(fn, arrays, step=FD_STEP):
    """Central-difference gradients of scalar fn w.r.t. each input array."""
    grads = []
    for i, arr in enumerate(arrays):
        g = np.zeros_like(arr, dtype=np.float64)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            hi = fn(arrays)
            flat[j] = orig - step
            lo = fn(arrays)
            flat[j] = orig
            gflat[j] = (hi - lo) / (2.0 * step)
        grads.append(g)
    return grads


def max_rel_error(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-8)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def check_scalar_fn(build_loss, arrays):
    """Compare autodiff and finite-difference gradients of a scalar graph.

    build_loss receives Tensors (requires_grad, float64) aligned with
    `arrays` and returns the scalar loss Tensor. Returns the worst relative
    error over every input element.
    """
    tensors = [ops.parameter(a.astype(np.float64)) for a in arrays]
    loss = build_loss(tensors)
    grad_map = backward(loss)
    analytic = [grad_map[t] for t in tensors]

    def eval_fn(arrs):
        ts = [ops.constant(a) for a in arrs]
        return float(build_loss(ts).data)

    numeric = finite_difference(eval_fn, [a.astype(np.float64) for a in arrays])
    return max(max_rel_error(an, nu) for an, nu in zip(analytic, numeric))


def _away_from(x, boundary, margin):
    """Nudge values off a non-differentiable boundary so central differences
    stay on one side."""
    return np.where(np.abs(x - boundary) < margin,
                    boundary + np.sign(x - boundary + 1e-12) * margin, x)


def _mix(out_shape, rng):
    """Fixed random mixing weights so the scalarized loss exercises every
    output element, not just their mean."""
    return ops.constant(rng.standard_normal(out_shape))


def _build(op_kind, rng):
    """Random small operands plus a closure building the scalar loss.

    The closure draws nothing itself; all randomness is frozen here so the
    finite-difference re-evaluations see the same function.
    """
    u = lambda *s: rng.standard_normal(s)
    if op_kind == "conv3d":
        arrays = [u(1, 2, 4, 4, 4), u(3, 2, 3, 3, 3), u(3)]
        r = _mix((1, 3, 4, 4, 4), rng)
        return arrays, lambda t: ops.reduce_mean(
            ops.mul(ops.conv3d(t[0], t[1], t[2], stride=1, padding=1), r))
    if op_kind == "conv3d_strided":
        arrays = [u(2, 2, 4, 4, 4), u(3, 2, 4, 4, 4), u(3)]
        r = _mix((2, 3, 2, 2, 2), rng)
        return arrays, lambda t: ops.reduce_mean(
            ops.mul(ops.conv3d(t[0], t[1], t[2], stride=2, padding=1), r))
    if op_kind == "conv3d_transpose":
        arrays = [u(1, 3, 3, 3, 3), u(3, 2, 4, 4, 4), u(2)]
        r = _mix((1, 2, 6, 6, 6), rng)
        return arrays, lambda t: ops.reduce_mean(
            ops.mul(ops.conv3d_transpose(t[0], t[1], t[2], stride=2, padding=1), r))
    if op_kind == "group_norm":
        arrays = [u(1, 4, 2, 2, 2), u(4), u(4)]
        r = _mix((1, 4, 2, 2, 2), rng)
        return arrays, lambda t: ops.reduce_mean(
            ops.mul(ops.group_norm(t[0], t[1], t[2], groups=2), r))
    if op_kind == "leaky_relu":
        arrays = [_away_from(u(3, 5), 0.0, 0.05)]
        r = _mix((3, 5), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.leaky_relu(t[0], 0.01), r))
    if op_kind == "linear":
        arrays = [u(3, 5), u(4, 5), u(4)]
        r = _mix((3, 4), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.linear(t[0], t[1], t[2]), r))
    if op_kind == "mean_squared_error":
        return [u(3, 4), u(3, 4)], lambda t: ops.mean_squared_error(t[0], t[1])
    if op_kind == "l2_norm":
        arrays = [u(3, 5) + np.where(u(3, 5) > 0, 0.5, -0.5)]
        r = _mix((3,), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.l2_norm(t[0]), r))
    if op_kind == "euclidean_distance":
        arrays = [u(3, 5), u(3, 5) + 2.0]
        r = _mix((3,), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.euclidean_distance(t[0], t[1]), r))
    if op_kind == "cosine_similarity":
        arrays = [u(3, 5) + 3.0, u(3, 5) + 3.0]
        r = _mix((3,), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.cosine_similarity(t[0], t[1]), r))
    if op_kind == "add":
        arrays = [u(3, 4), u(3, 4)]
        r = _mix((3, 4), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.add(t[0], t[1]), r))
    if op_kind == "mul":
        return [u(3, 4), u(3, 4)], lambda t: ops.reduce_mean(ops.mul(t[0], t[1]))
    if op_kind == "scale":
        arrays = [u(3, 4)]
        r = _mix((3, 4), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.scale(t[0], 1.7), r))
    if op_kind == "reduce_mean":
        return [u(2, 3, 4)], lambda t: ops.reduce_mean(t[0])
    if op_kind == "gaussian_rbf_kernel":
        arrays = [u(4, 3), u(5, 3)]
        r = _mix((4, 5), rng)
        return arrays, lambda t: ops.reduce_mean(
            ops.mul(ops.gaussian_rbf_kernel(t[0], t[1], 1.3), r))
    if op_kind == "exp":
        arrays = [u(3, 4) * 0.5]
        r = _mix((3, 4), rng)
        return arrays, lambda t: ops.reduce_mean(ops.mul(ops.exp(t[0]), r))
    raise KeyError(f"no gradient-check builder for op {op_kind!r}")


CHECKABLE_OPS = (
    "conv3d", "conv3d_strided", "conv3d_transpose", "group_norm", "leaky_relu",
    "linear", "mean_squared_error", "l2_norm", "euclidean_distance",
    "cosine_similarity", "add", "mul", "scale", "reduce_mean",
    "gaussian_rbf_kernel", "exp",
)


def grad_check(op_kind, seed=0):
    """Worst finite-difference relative error for one catalog op.

    Runs in float64 on small random operands; a healthy backward rule
    lands well below 1e-4.
    """
    rng = np.random.default_rng(seed)
    arrays, build_loss = _build(op_kind, rng)
    return check_scalar_fn(build_loss, arrays)
