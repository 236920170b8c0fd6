"""Reverse-mode autodiff over dense numpy arrays.

A Tensor doubles as the graph node: it carries the cached forward value,
the op kind that produced it, references to its parents, and a gradient
accumulator filled in by :func:`backward`. Ops (see :mod:`planret.autodiff.ops`)
build Tensors with a closure that propagates the upstream gradient to the
parents. Graphs are acyclic by construction.
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Raised when operand extents do not conform to an op's shape rule."""


class Tensor:
    """Dense float tensor participating in reverse-mode differentiation.

    Volumes use the (batch, channel, depth, height, width) layout, vectors
    (batch, feature). Training runs in float32; float64 is reserved for
    gradient checking.
    """

    __slots__ = ("data", "requires_grad", "grad", "op", "parents", "_backward")

    def __init__(self, data, requires_grad=False, op="leaf", parents=()):
        self.data = np.asarray(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.op = op
        self.parents = tuple(parents)
        self._backward = None  # set by the op that created this node

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(op={self.op!r}, shape={self.data.shape}, dtype={self.data.dtype})"

    def accumulate_grad(self, g):
        if g.shape != self.data.shape:
            raise ShapeError(
                f"gradient shape {g.shape} does not match value shape {self.data.shape} (op {self.op!r})")
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def zero_grad(self):
        self.grad = None


def topo_order(root):
    """Parents-before-children ordering of the graph reachable from root."""
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    return order


def backward(loss):
    """Backpropagate from a scalar loss node.

    Every reachable tensor gets its ``grad`` populated (cleared first);
    returns a map ``leaf tensor -> gradient array`` over the reachable
    ``requires_grad`` leaves, the usual handle for an optimizer step.
    Leaves cut off by a stop-gradient report an exact zero gradient.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward requires a scalar loss, got shape {loss.data.shape}")
    order = topo_order(loss)
    for node in order:
        node.grad = None
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node.grad is None:
            continue  # severed from the loss (e.g. behind a stop-gradient)
        if node._backward is not None:
            node._backward(node.grad)
    leaves = {}
    for node in order:
        if node.requires_grad and not node.parents:
            if node.grad is None:
                node.grad = np.zeros_like(node.data)
            leaves[node] = node.grad
    return leaves
