"""Minimal reverse-mode automatic differentiation over dense float64 arrays.

Each `Node` wraps an immutable numpy value plus a closure that propagates the
incoming gradient to its parents.  Graphs are built dynamically per example
and traversed once by `backward`.  Gradients accumulate additively and are
lazily allocated, so untouched leaves keep `grad is None`.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, VocabularyError


class Node:
    __slots__ = ("value", "grad", "_parents", "_backward")

    def __init__(self, value: np.ndarray, parents: tuple = (), backward=None):
        self.value = value
        self.grad = None
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.value.shape

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


def leaf(value) -> Node:
    """Wrap an array (or nested sequence) as a graph leaf."""
    return Node(np.asarray(value, dtype=np.float64))


def _acc(node: Node, g: np.ndarray) -> None:
    if node.grad is None:
        node.grad = np.zeros_like(node.value)
    node.grad += g


def _check_same_shape(a: Node, b: Node, op: str) -> None:
    if a.value.shape != b.value.shape:
        raise DimensionError(
            f"{op}: operand shapes differ: {a.value.shape} vs {b.value.shape}"
        )


def add(a: Node, b: Node) -> Node:
    _check_same_shape(a, b, "add")

    def bw(g):
        _acc(a, g)
        _acc(b, g)

    return Node(a.value + b.value, (a, b), bw)


def sub(a: Node, b: Node) -> Node:
    _check_same_shape(a, b, "sub")

    def bw(g):
        _acc(a, g)
        _acc(b, -g)

    return Node(a.value - b.value, (a, b), bw)


def mul(a: Node, b: Node) -> Node:
    _check_same_shape(a, b, "mul")

    def bw(g):
        _acc(a, b.value * g)
        _acc(b, a.value * g)

    return Node(a.value * b.value, (a, b), bw)


def tanh(a: Node) -> Node:
    out_val = np.tanh(a.value)

    def bw(g):
        _acc(a, (1.0 - out_val * out_val) * g)

    return Node(out_val, (a,), bw)


def sigmoid(a: Node) -> Node:
    # Split by sign so neither exp overflows.
    x = a.value
    out_val = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                       np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

    def bw(g):
        _acc(a, out_val * (1.0 - out_val) * g)

    return Node(out_val, (a,), bw)


def softmax(x: Node) -> Node:
    """Stable softmax over a 1-D vector (max-subtraction)."""
    if x.value.ndim != 1 or x.value.size == 0:
        raise DimensionError(f"softmax: need a nonempty 1-D vector, got shape {x.value.shape}")
    shifted = x.value - x.value.max()
    e = np.exp(shifted)
    out_val = e / e.sum()

    def bw(g):
        _acc(x, out_val * (g - np.dot(g, out_val)))

    return Node(out_val, (x,), bw)


def concat(a: Node, b: Node) -> Node:
    if a.value.ndim != 1 or b.value.ndim != 1:
        raise DimensionError(
            f"concat: need 1-D operands, got {a.value.shape} and {b.value.shape}"
        )
    m = a.value.size

    def bw(g):
        _acc(a, g[:m])
        _acc(b, g[m:])

    return Node(np.concatenate([a.value, b.value]), (a, b), bw)


def narrow(x: Node, start: int, length: int) -> Node:
    """Contiguous 1-D slice x[start:start+length] with gradient scatter."""
    if x.value.ndim != 1:
        raise DimensionError(f"narrow: need a 1-D vector, got shape {x.value.shape}")
    if start < 0 or start + length > x.value.size:
        raise DimensionError(
            f"narrow: slice [{start}:{start + length}] out of range for size {x.value.size}"
        )

    def bw(g):
        if x.grad is None:
            x.grad = np.zeros_like(x.value)
        x.grad[start:start + length] += g

    return Node(x.value[start:start + length].copy(), (x,), bw)


def lookup(table: Node, idx: int) -> Node:
    """Row `idx` of an embedding table; gradient lands only in that row."""
    if table.value.ndim != 2:
        raise DimensionError(f"lookup: table must be 2-D, got shape {table.value.shape}")
    if not 0 <= idx < table.value.shape[0]:
        raise VocabularyError(
            f"lookup: id {idx} out of range for table with {table.value.shape[0]} rows"
        )

    def bw(g):
        if table.grad is None:
            table.grad = np.zeros_like(table.value)
        table.grad[idx] += g

    return Node(table.value[idx].copy(), (table,), bw)


def matmul(a: Node, b: Node) -> Node:
    """Matrix/vector product: (m,k)@(k,n), (k,)@(k,n) or (m,k)@(k,)."""
    av, bv = a.value, b.value
    if av.ndim == 2 and bv.ndim == 2:
        if av.shape[1] != bv.shape[0]:
            raise DimensionError(f"matmul: inner dims differ: {av.shape} @ {bv.shape}")

        def bw(g):
            _acc(a, g @ bv.T)
            _acc(b, av.T @ g)

    elif av.ndim == 1 and bv.ndim == 2:
        if av.shape[0] != bv.shape[0]:
            raise DimensionError(f"matmul: inner dims differ: {av.shape} @ {bv.shape}")

        def bw(g):
            _acc(a, bv @ g)
            _acc(b, np.outer(av, g))

    elif av.ndim == 2 and bv.ndim == 1:
        if av.shape[1] != bv.shape[0]:
            raise DimensionError(f"matmul: inner dims differ: {av.shape} @ {bv.shape}")

        def bw(g):
            _acc(a, np.outer(g, bv))
            _acc(b, av.T @ g)

    else:
        raise DimensionError(f"matmul: unsupported ranks: {av.shape} @ {bv.shape}")

    return Node(av @ bv, (a, b), bw)


def affine(x: Node, w: Node, b: Node) -> Node:
    """x @ w + b for a 1-D x, fused into one graph node."""
    xv, wv, bv = x.value, w.value, b.value
    if xv.ndim != 1 or wv.ndim != 2 or xv.shape[0] != wv.shape[0] or bv.shape != (wv.shape[1],):
        raise DimensionError(
            f"affine: incompatible shapes x{xv.shape} w{wv.shape} b{bv.shape}"
        )

    def bw(g):
        _acc(x, wv @ g)
        _acc(w, np.outer(xv, g))
        _acc(b, g)

    return Node(xv @ wv + bv, (x, w, b), bw)


def dual_affine(x: Node, w: Node, h: Node, u: Node, b: Node) -> Node:
    """x @ w + h @ u + b, the fused pre-activation of a gated recurrent cell."""
    xv, wv, hv, uv, bv = x.value, w.value, h.value, u.value, b.value
    if (xv.ndim != 1 or hv.ndim != 1 or xv.shape[0] != wv.shape[0]
            or hv.shape[0] != uv.shape[0] or wv.shape[1] != uv.shape[1]
            or bv.shape != (wv.shape[1],)):
        raise DimensionError(
            f"dual_affine: incompatible shapes x{xv.shape} w{wv.shape} "
            f"h{hv.shape} u{uv.shape} b{bv.shape}"
        )

    def bw(g):
        _acc(x, wv @ g)
        _acc(w, np.outer(xv, g))
        _acc(h, uv @ g)
        _acc(u, np.outer(hv, g))
        _acc(b, g)

    return Node(xv @ wv + hv @ uv + bv, (x, w, h, u, b), bw)


def lerp(t: Node, a: Node, b: Node) -> Node:
    """(1 - t) * a + t * b elementwise (the GRU state interpolation)."""
    _check_same_shape(t, a, "lerp")
    _check_same_shape(t, b, "lerp")

    def bw(g):
        _acc(t, (b.value - a.value) * g)
        _acc(a, (1.0 - t.value) * g)
        _acc(b, t.value * g)

    return Node((1.0 - t.value) * a.value + t.value * b.value, (t, a, b), bw)


def add_rowvec(m: Node, v: Node) -> Node:
    """Add a vector to every row of a matrix (the only broadcast allowed)."""
    if m.value.ndim != 2 or v.value.ndim != 1 or m.value.shape[1] != v.value.shape[0]:
        raise DimensionError(
            f"add_rowvec: incompatible shapes {m.value.shape} + {v.value.shape}"
        )

    def bw(g):
        _acc(m, g)
        _acc(v, g.sum(axis=0))

    return Node(m.value + v.value, (m, v), bw)


def stack(rows: Sequence[Node]) -> Node:
    """Stack equal-length 1-D nodes into a matrix, one per row."""
    if not rows:
        raise DimensionError("stack: empty sequence")
    n = rows[0].value.shape
    for r in rows:
        if r.value.shape != n:
            raise DimensionError(f"stack: row shapes differ: {n} vs {r.value.shape}")

    def bw(g):
        for i, r in enumerate(rows):
            _acc(r, g[i])

    return Node(np.stack([r.value for r in rows]), tuple(rows), bw)


def sum_all(x: Node) -> Node:
    def bw(g):
        _acc(x, np.full_like(x.value, float(g)))

    return Node(np.float64(x.value.sum()), (x,), bw)


def log(x: Node) -> Node:
    def bw(g):
        _acc(x, g / x.value)

    return Node(np.log(x.value), (x,), bw)


def neg_log_pick(dist: Node, idx: int) -> Node:
    """-log(dist[idx]), the per-step cross-entropy term."""
    if dist.value.ndim != 1:
        raise DimensionError(f"neg_log_pick: need a 1-D vector, got shape {dist.value.shape}")
    if not 0 <= idx < dist.value.size:
        raise VocabularyError(f"neg_log_pick: id {idx} out of range for size {dist.value.size}")
    p = dist.value[idx]

    def bw(g):
        if dist.grad is None:
            dist.grad = np.zeros_like(dist.value)
        dist.grad[idx] -= float(g) / p

    return Node(np.float64(-np.log(p)), (dist,), bw)


def topo_order(root: Node) -> list[Node]:
    """Iterative post-order over the parent DAG (no recursion limit issues)."""
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(root: Node) -> None:
    """Populate grads of every node reachable from the scalar `root`."""
    if root.value.size != 1:
        raise DimensionError(f"backward: root must be scalar, got shape {root.value.shape}")
    order = topo_order(root)
    root.grad = np.ones_like(root.value)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grads(nodes: Iterable[Node]) -> None:
    for n in nodes:
        n.grad = None
