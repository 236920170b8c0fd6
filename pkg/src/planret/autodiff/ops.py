"""The layer catalog: forward and backward rules for every op the encoder
families need.

Each op validates operand extents, computes the forward value with numpy
(convolutions dispatch to the compiled kernels when available), and wires a
closure that pushes the upstream gradient to its parents. `exp` and
`reshape` are small utility ops used by the variational heads and the
flatten step; everything else is the catalog proper.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from .tensor import ShapeError, Tensor


def _require(cond, op, msg):
    if not cond:
        raise ShapeError(f"{op}: {msg}")


def constant(data, dtype=None):
    arr = np.asarray(data, dtype=dtype)
    return Tensor(arr, requires_grad=False, op="const")


def parameter(data):
    return Tensor(np.asarray(data), requires_grad=True, op="param")


# ---------------------------------------------------------------------------
# convolutions

def conv3d(x, w, bias=None, stride=1, padding=0):
    """3D cross-correlation, x (N,Cin,D,H,W) with w (Cout,Cin,kD,kH,kW)."""
    _require(x.data.ndim == 5, "conv3d", f"input must be 5-d, got {x.data.shape}")
    _require(w.data.ndim == 5, "conv3d", f"weight must be 5-d, got {w.data.shape}")
    _require(x.data.shape[1] == w.data.shape[1], "conv3d",
             f"input channels {x.data.shape[1]} != weight channels {w.data.shape[1]}")
    for ax in range(3):
        ext = x.data.shape[2 + ax] + 2 * padding - w.data.shape[2 + ax]
        _require(ext >= 0, "conv3d",
                 f"kernel extent {w.data.shape[2 + ax]} too large for input extent "
                 f"{x.data.shape[2 + ax]} with padding {padding}")
    out = _kernels.conv3d_forward(x.data, w.data, None if bias is None else bias.data,
                                  stride, padding)
    parents = (x, w) if bias is None else (x, w, bias)
    node = Tensor(out, op="conv3d", parents=parents)

    def _back(g):
        gx, gw, gb = _kernels.conv3d_backward(x.data, w.data, g, stride, padding,
                                              bias is not None)
        x.accumulate_grad(gx)
        w.accumulate_grad(gw)
        if bias is not None:
            bias.accumulate_grad(gb)

    node._backward = _back
    return node


def conv3d_transpose(x, w, bias=None, stride=1, padding=0):
    """Transposed 3D convolution, x (N,Cin,D,H,W) with w (Cin,Cout,kD,kH,kW)."""
    _require(x.data.ndim == 5, "conv3d_transpose", f"input must be 5-d, got {x.data.shape}")
    _require(w.data.ndim == 5, "conv3d_transpose", f"weight must be 5-d, got {w.data.shape}")
    _require(x.data.shape[1] == w.data.shape[0], "conv3d_transpose",
             f"input channels {x.data.shape[1]} != weight channels {w.data.shape[0]}")
    for ax in range(3):
        ext = _kernels.convt_out_extent(x.data.shape[2 + ax], w.data.shape[2 + ax],
                                        stride, padding)
        _require(ext >= 1, "conv3d_transpose",
                 f"output extent {ext} < 1 along axis {ax}")
    out = _kernels.conv3d_transpose_forward(x.data, w.data,
                                            None if bias is None else bias.data,
                                            stride, padding)
    parents = (x, w) if bias is None else (x, w, bias)
    node = Tensor(out, op="conv3d_transpose", parents=parents)

    def _back(g):
        gx, gw, gb = _kernels.conv3d_transpose_backward(x.data, w.data, g, stride,
                                                        padding, bias is not None)
        x.accumulate_grad(gx)
        w.accumulate_grad(gw)
        if bias is not None:
            bias.accumulate_grad(gb)

    node._backward = _back
    return node


# ---------------------------------------------------------------------------
# normalization and activation

def group_norm(x, gamma, beta, groups, eps=1e-5):
    """Per-sample group normalization over (N, C, *spatial) with affine scale/shift."""
    n, c = x.data.shape[0], x.data.shape[1]
    _require(c % groups == 0, "group_norm", f"{groups} groups do not divide {c} channels")
    _require(gamma.data.shape == (c,) and beta.data.shape == (c,), "group_norm",
             f"affine params must have shape ({c},)")
    grouped = x.data.reshape(n, groups, -1)
    mean = grouped.mean(axis=2, keepdims=True)
    var = grouped.var(axis=2, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = ((grouped - mean) * inv).reshape(x.data.shape)
    cshape = (1, c) + (1,) * (x.data.ndim - 2)
    out = xhat * gamma.data.reshape(cshape) + beta.data.reshape(cshape)
    node = Tensor(out, op="group_norm", parents=(x, gamma, beta))

    def _back(g):
        axes = (0,) + tuple(range(2, x.data.ndim))
        gamma.accumulate_grad((g * xhat).sum(axis=axes))
        beta.accumulate_grad(g.sum(axis=axes))
        gxhat = (g * gamma.data.reshape(cshape)).reshape(n, groups, -1)
        xh = xhat.reshape(n, groups, -1)
        m1 = gxhat.mean(axis=2, keepdims=True)
        m2 = (gxhat * xh).mean(axis=2, keepdims=True)
        gx = (gxhat - m1 - xh * m2) * inv
        x.accumulate_grad(gx.reshape(x.data.shape))

    node._backward = _back
    return node


def leaky_relu(x, negative_slope=0.01):
    out = np.where(x.data > 0, x.data, x.data * np.asarray(negative_slope, dtype=x.dtype))
    node = Tensor(out, op="leaky_relu", parents=(x,))

    def _back(g):
        slope = np.asarray(negative_slope, dtype=g.dtype)
        x.accumulate_grad(np.where(x.data > 0, g, g * slope))

    node._backward = _back
    return node


# ---------------------------------------------------------------------------
# dense / vector ops

def linear(x, w, bias=None):
    """Affine map of row vectors: x (N,in) @ w (out,in)^T + bias (out,)."""
    _require(x.data.ndim == 2 and w.data.ndim == 2, "linear",
             f"expected 2-d operands, got {x.data.shape} and {w.data.shape}")
    _require(x.data.shape[1] == w.data.shape[1], "linear",
             f"input features {x.data.shape[1]} != weight features {w.data.shape[1]}")
    out = x.data @ w.data.T
    if bias is not None:
        out = out + bias.data
    parents = (x, w) if bias is None else (x, w, bias)
    node = Tensor(out, op="linear", parents=parents)

    def _back(g):
        x.accumulate_grad(g @ w.data)
        w.accumulate_grad(g.T @ x.data)
        if bias is not None:
            bias.accumulate_grad(g.sum(axis=0))

    node._backward = _back
    return node


def mean_squared_error(a, b):
    _require(a.data.shape == b.data.shape, "mean_squared_error",
             f"shape mismatch {a.data.shape} vs {b.data.shape}")
    diff = a.data - b.data
    out = np.asarray((diff * diff).mean(), dtype=a.dtype)
    node = Tensor(out, op="mean_squared_error", parents=(a, b))

    def _back(g):
        coef = g * np.asarray(2.0 / diff.size, dtype=g.dtype)
        a.accumulate_grad(coef * diff)
        b.accumulate_grad(-coef * diff)

    node._backward = _back
    return node


def l2_norm(x):
    """Row-wise Euclidean norm of (N, M) vectors."""
    _require(x.data.ndim == 2, "l2_norm", f"expected 2-d input, got {x.data.shape}")
    out = np.sqrt((x.data * x.data).sum(axis=1))
    node = Tensor(out, op="l2_norm", parents=(x,))

    def _back(g):
        safe = np.where(out > 0, out, 1.0)
        gx = (g / safe)[:, None] * x.data
        x.accumulate_grad(np.where(out[:, None] > 0, gx, 0.0).astype(x.dtype))

    node._backward = _back
    return node


def euclidean_distance(a, b):
    """Row-wise distance between (N, M) vector batches; zero-distance rows
    get a zero subgradient."""
    _require(a.data.shape == b.data.shape, "euclidean_distance",
             f"shape mismatch {a.data.shape} vs {b.data.shape}")
    diff = a.data - b.data
    out = np.sqrt((diff * diff).sum(axis=1))
    node = Tensor(out, op="euclidean_distance", parents=(a, b))

    def _back(g):
        safe = np.where(out > 0, out, 1.0)
        gd = np.where(out[:, None] > 0, (g / safe)[:, None] * diff, 0.0).astype(a.dtype)
        a.accumulate_grad(gd)
        b.accumulate_grad(-gd)

    node._backward = _back
    return node


def cosine_similarity(a, b):
    """Row-wise cosine similarity of (N, M) vector batches."""
    _require(a.data.shape == b.data.shape, "cosine_similarity",
             f"shape mismatch {a.data.shape} vs {b.data.shape}")
    na = np.sqrt((a.data * a.data).sum(axis=1))
    nb = np.sqrt((b.data * b.data).sum(axis=1))
    if np.any(na == 0) or np.any(nb == 0):
        raise ValueError("cosine_similarity: zero-norm vector")
    dot = (a.data * b.data).sum(axis=1)
    out = dot / (na * nb)
    node = Tensor(out, op="cosine_similarity", parents=(a, b))

    def _back(g):
        ga = (b.data / (na * nb)[:, None] - (out / (na * na))[:, None] * a.data)
        gb = (a.data / (na * nb)[:, None] - (out / (nb * nb))[:, None] * b.data)
        a.accumulate_grad((g[:, None] * ga).astype(a.dtype))
        b.accumulate_grad((g[:, None] * gb).astype(b.dtype))

    node._backward = _back
    return node


# ---------------------------------------------------------------------------
# elementwise and reductions

def add(a, b):
    _require(a.data.shape == b.data.shape, "add",
             f"shape mismatch {a.data.shape} vs {b.data.shape}")
    node = Tensor(a.data + b.data, op="add", parents=(a, b))

    def _back(g):
        a.accumulate_grad(g)
        b.accumulate_grad(g)

    node._backward = _back
    return node


def mul(a, b):
    _require(a.data.shape == b.data.shape, "mul",
             f"shape mismatch {a.data.shape} vs {b.data.shape}")
    node = Tensor(a.data * b.data, op="mul", parents=(a, b))

    def _back(g):
        a.accumulate_grad(g * b.data)
        b.accumulate_grad(g * a.data)

    node._backward = _back
    return node


def scale(x, c):
    """Multiply by a python-float constant."""
    cval = np.asarray(c, dtype=x.dtype)
    node = Tensor(x.data * cval, op="scale", parents=(x,))

    def _back(g):
        x.accumulate_grad(g * cval)

    node._backward = _back
    return node


def add_scalar(x, c):
    """Shift by a python-float constant."""
    cval = np.asarray(c, dtype=x.dtype)
    node = Tensor(x.data + cval, op="add_scalar", parents=(x,))
    node._backward = lambda g: x.accumulate_grad(g)
    return node


def reduce_mean(x):
    out = np.asarray(x.data.mean(), dtype=x.dtype)
    node = Tensor(out, op="reduce_mean", parents=(x,))

    def _back(g):
        x.accumulate_grad(np.broadcast_to(g / x.data.size, x.data.shape).astype(x.dtype))

    node._backward = _back
    return node


def stop_gradient(x):
    """Identity in forward; propagates nothing backward, so any parameter
    feeding only this branch reports an exact zero gradient."""
    node = Tensor(x.data, op="stop_gradient", parents=(x,))
    node._backward = lambda g: None
    return node


def exp(x):
    out = np.exp(x.data)
    node = Tensor(out, op="exp", parents=(x,))
    node._backward = lambda g: x.accumulate_grad(g * out)
    return node


def reshape(x, shape):
    node = Tensor(x.data.reshape(shape), op="reshape", parents=(x,))
    node._backward = lambda g: x.accumulate_grad(g.reshape(x.data.shape))
    return node


def gaussian_rbf_kernel(x, y, sigma):
    """Gaussian RBF Gram matrix K_ij = exp(-|x_i - y_j|^2 / (2 sigma^2)).

    sigma is a constant (not differentiated), matching the usual treatment
    of the bandwidth in kernel two-sample statistics.
    """
    _require(x.data.ndim == 2 and y.data.ndim == 2, "gaussian_rbf_kernel",
             f"expected 2-d sample sets, got {x.data.shape} and {y.data.shape}")
    _require(x.data.shape[1] == y.data.shape[1], "gaussian_rbf_kernel",
             f"dim mismatch {x.data.shape[1]} vs {y.data.shape[1]}")
    s2 = float(sigma) ** 2
    d2 = ((x.data[:, None, :] - y.data[None, :, :]) ** 2).sum(axis=2)
    k = np.exp(-d2 / (2.0 * s2)).astype(x.dtype)
    node = Tensor(k, op="gaussian_rbf_kernel", parents=(x, y))

    def _back(g):
        gk = (g * k / s2).astype(x.dtype)
        # dK_ij/dx_i = K_ij (y_j - x_i) / sigma^2
        gx = gk @ y.data - gk.sum(axis=1, keepdims=True) * x.data
        gy = gk.T @ x.data - gk.sum(axis=0)[:, None] * y.data
        x.accumulate_grad(gx.astype(x.dtype))
        y.accumulate_grad(gy.astype(y.dtype))

    node._backward = _back
    return node


# Catalog entries that admit a finite-difference check (stop_gradient is
# excluded: its backward rule is exact-zero by definition, which central
# differences of the identity forward cannot express).
CATALOG = (
    "conv3d", "conv3d_transpose", "group_norm", "leaky_relu", "linear",
    "mean_squared_error", "l2_norm", "euclidean_distance", "cosine_similarity",
    "add", "mul", "scale", "reduce_mean", "gaussian_rbf_kernel",
)
