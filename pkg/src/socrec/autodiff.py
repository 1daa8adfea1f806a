"""Dense 2-D tensors with a recorded operation tape for reverse-mode differentiation.

Every tensor is a (rows, cols) float32 or float64 array; scalars live as
(1, 1). Operations executed while a Tape is active append replayable nodes,
so `Tape.backward` can push gradients to every parameter and `Tape.replay`
can re-run the forward pass after parameters change (used by the
finite-difference oracle).

Broadcasting is deliberately narrow: `add` accepts a (1, c) row bias and
`mul` accepts (r, 1) / (1, c) / (1, 1) factors. Nothing else is needed by
the model equations, and keeping the rules short keeps the backward rules
auditable.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, NumericalError, ShapeError
from .sparse import SparseMatrix

_TAPE_STACK: list["Tape"] = []
_FINITE_CHECKS = False

FLOAT_DTYPES = (np.float32, np.float64)

# Gradient-check tolerances per float width (relative error, central differences).
GRAD_RTOL = {np.dtype(np.float64): 1e-4, np.dtype(np.float32): 1e-2}


def set_finite_checks(enabled: bool) -> bool:
    """Toggle per-operation NaN/Inf validation; returns the previous setting."""
    global _FINITE_CHECKS
    previous = _FINITE_CHECKS
    _FINITE_CHECKS = bool(enabled)
    return previous


def _as_2d(data, dtype=None) -> np.ndarray:
    arr = np.asarray(data, dtype=dtype)
    if arr.dtype not in FLOAT_DTYPES:
        arr = arr.astype(np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ShapeError(f"tensors are 2-D; got ndim={arr.ndim}")
    return arr


class Tensor:
    """Value + gradient pair. `requires_grad` marks trainable leaves."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False, _validate: bool = True):
        self.data = _as_2d(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        if _validate and not np.all(np.isfinite(self.data)):
            raise NumericalError("tensor created with non-finite values")

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() on tensor of shape {self.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    # Operator sugar; scalars go through `affine` so they stay off the slow paths.
    def __add__(self, other):
        if isinstance(other, Tensor):
            return add(self, other)
        return affine(self, 1.0, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return sub(self, other)
        return affine(self, 1.0, -float(other))

    def __rsub__(self, other):
        return affine(self, -1.0, float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return affine(self, float(other), 0.0)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise ShapeError("tensor/tensor division is not part of the op set")
        return affine(self, 1.0 / float(other), 0.0)

    def __neg__(self):
        return affine(self, -1.0, 0.0)

    def __matmul__(self, other):
        return matmul(self, other)


def constant(data, dtype=None) -> Tensor:
    t = Tensor(np.asarray(data, dtype=dtype))
    return t


def parameter(data, dtype=None) -> Tensor:
    return Tensor(np.asarray(data, dtype=dtype), requires_grad=True)


class _Node:
    __slots__ = ("op", "inputs", "output", "fwd", "bwd")

    def __init__(self, op, inputs, output, fwd, bwd):
        self.op = op
        self.inputs = inputs
        self.output = output
        self.fwd = fwd
        self.bwd = bwd


class Tape:
    """Ordered, replayable record of operations (creation order = topological)."""

    def __init__(self):
        self.nodes: list[_Node] = []

    def __enter__(self) -> "Tape":
        _TAPE_STACK.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _TAPE_STACK.pop()
        assert popped is self

    def backward(self, loss: Tensor) -> None:
        """Seed d(loss)/d(loss)=1 and accumulate gradients into every tensor
        that requires them. Repeated uses of a parameter accumulate."""
        if loss.shape != (1, 1):
            raise ContractError(f"backward needs a scalar loss; got shape {loss.shape}")
        if loss.grad is None:
            loss.grad = np.ones((1, 1), dtype=loss.dtype)
        else:
            loss.grad = loss.grad + np.ones((1, 1), dtype=loss.dtype)
        for node in reversed(self.nodes):
            out_grad = node.output.grad
            if out_grad is None:
                continue
            grads = node.bwd(out_grad, node.output.data)
            for tensor, grad in zip(node.inputs, grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if tensor.grad is None:
                    tensor.grad = np.zeros_like(tensor.data)
                tensor.grad += grad

    def replay(self) -> None:
        """Re-run every recorded forward in order against current leaf values."""
        for node in self.nodes:
            node.output.data = node.fwd()


def _apply(op: str, inputs: tuple[Tensor, ...], fwd: Callable[[], np.ndarray], bwd) -> Tensor:
    data = fwd()
    if _FINITE_CHECKS and not np.all(np.isfinite(data)):
        raise NumericalError(f"non-finite values produced by op '{op}'")
    requires = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.requires_grad = requires
    if _TAPE_STACK and requires:
        _TAPE_STACK[-1].nodes.append(_Node(op, inputs, out, fwd, bwd))
    return out


def _check_dtypes(op, *tensors):
    dt = tensors[0].dtype
    for t in tensors[1:]:
        if t.dtype != dt:
            raise ShapeError(f"{op}: mixed dtypes {dt} and {t.dtype}")


# ---------------------------------------------------------------------------
# Linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    _check_dtypes("matmul", a, b)

    def bwd(g, out):
        return g @ b.data.T, a.data.T @ g

    return _apply("matmul", (a, b), lambda: a.data @ b.data, bwd)


def spmm(s: SparseMatrix, x: Tensor) -> Tensor:
    """Sparse @ dense. The sparse operand is graph structure: no gradient flows to it."""
    if s.shape[1] != x.shape[0]:
        raise ShapeError(f"spmm: {s.shape} @ {x.shape}")
    if s.dtype != x.dtype:
        raise ShapeError(f"spmm: sparse dtype {s.dtype} vs dense {x.dtype}")

    def bwd(g, out):
        return (s.transpose().matmul_dense(np.ascontiguousarray(g)),)

    return _apply("spmm", (x,), lambda: s.matmul_dense(x.data), bwd)


def transpose(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (np.ascontiguousarray(g.T),)

    return _apply("transpose", (x,), lambda: np.ascontiguousarray(x.data.T), bwd)


# ---------------------------------------------------------------------------
# Pointwise arithmetic

def _reduce_to(shape: tuple[int, int], g: np.ndarray) -> np.ndarray:
    if g.shape == shape:
        return g
    out = g
    if shape[0] == 1 and g.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


def _broadcastable(a: Tensor, b: Tensor) -> bool:
    return all(db == da or db == 1 for da, db in zip(a.shape, b.shape))


def add(a: Tensor, b: Tensor) -> Tensor:
    """a + b; b may be a (1, c) row bias or (r, 1) column, broadcast over a."""
    _check_dtypes("add", a, b)
    if not _broadcastable(a, b):
        raise ShapeError(f"add: {a.shape} + {b.shape}")

    def bwd(g, out):
        return g, _reduce_to(b.shape, g)

    return _apply("add", (a, b), lambda: a.data + b.data, bwd)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_dtypes("sub", a, b)
    if not _broadcastable(a, b):
        raise ShapeError(f"sub: {a.shape} - {b.shape}")

    def bwd(g, out):
        return g, -_reduce_to(b.shape, g)

    return _apply("sub", (a, b), lambda: a.data - b.data, bwd)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise a * b; b may broadcast as (r, 1), (1, c) or (1, 1)."""
    _check_dtypes("mul", a, b)
    if not _broadcastable(a, b):
        raise ShapeError(f"mul: {a.shape} * {b.shape}")

    def bwd(g, out):
        return g * b.data, _reduce_to(b.shape, g * a.data)

    return _apply("mul", (a, b), lambda: a.data * b.data, bwd)


def affine(x: Tensor, scale: float, shift: float) -> Tensor:
    """scale * x + shift with float constants."""
    scale = float(scale)
    shift = float(shift)

    def bwd(g, out):
        return (g * scale,)

    return _apply("affine", (x,), lambda: scale * x.data + shift, bwd)


# ---------------------------------------------------------------------------
# Structure ops

def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    parts = tuple(parts)
    if not parts:
        raise ShapeError("concat_cols of nothing")
    rows = parts[0].shape[0]
    if any(p.shape[0] != rows for p in parts):
        raise ShapeError(f"concat_cols: ragged row counts {[p.shape for p in parts]}")
    _check_dtypes("concat_cols", *parts)
    widths = [p.shape[1] for p in parts]
    offsets = np.cumsum([0] + widths)

    def bwd(g, out):
        return tuple(g[:, offsets[i]:offsets[i + 1]] for i in range(len(parts)))

    return _apply("concat_cols", parts, lambda: np.hstack([p.data for p in parts]), bwd)


def scatter_add_rows(target: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> None:
    """target[idx[i]] += rows[i], with repeated indices summed (vectorized)."""
    if idx.size == 0:
        return
    order = np.argsort(idx, kind="stable")
    sorted_idx = idx[order]
    starts = np.flatnonzero(np.r_[True, np.diff(sorted_idx) > 0])
    sums = np.add.reduceat(rows[order], starts, axis=0)
    target[sorted_idx[starts]] += sums


def gather_rows(x: Tensor, idx: np.ndarray) -> Tensor:
    """Row lookup x[idx]; backward scatter-adds into the source rows."""
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 1:
        raise ShapeError("gather_rows expects a 1-D index array")
    if idx.size and (idx.min() < 0 or idx.max() >= x.shape[0]):
        raise ShapeError("gather_rows: index out of range")

    def bwd(g, out):
        gx = np.zeros_like(x.data)
        scatter_add_rows(gx, idx, g)
        return (gx,)

    return _apply("gather_rows", (x,), lambda: x.data[idx], bwd)


# ---------------------------------------------------------------------------
# Nonlinearities

def prelu(x: Tensor, slope: Tensor) -> Tensor:
    """max(x, 0) + slope * min(x, 0) with a single learnable (1, 1) slope."""
    if slope.shape != (1, 1):
        raise ShapeError(f"prelu slope must be (1, 1); got {slope.shape}")
    _check_dtypes("prelu", x, slope)

    def bwd(g, out):
        gx = g * np.where(x.data > 0, x.data.dtype.type(1), slope.data[0, 0])
        gs = np.sum(g * np.minimum(x.data, 0), keepdims=True)
        return gx, gs

    return _apply("prelu", (x, slope), lambda: np.where(x.data > 0, x.data, slope.data[0, 0] * x.data), bwd)


def relu(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (g * (x.data > 0),)

    return _apply("relu", (x,), lambda: np.maximum(x.data, 0), bwd)


def _sigmoid(d: np.ndarray) -> np.ndarray:
    out = np.empty_like(d)
    pos = d >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ed = np.exp(d[~pos])
    out[~pos] = ed / (1.0 + ed)
    return out


def sigmoid(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (g * out * (1.0 - out),)

    return _apply("sigmoid", (x,), lambda: _sigmoid(x.data), bwd)


def logsigmoid(x: Tensor) -> Tensor:
    """log(sigmoid(x)) computed stably as -softplus(-x)."""

    def fwd():
        d = x.data
        out = np.empty_like(d)
        pos = d >= 0
        out[pos] = -np.log1p(np.exp(-d[pos]))
        out[~pos] = d[~pos] - np.log1p(np.exp(d[~pos]))
        return out

    def bwd(g, out):
        return (g * _sigmoid(-x.data),)

    return _apply("logsigmoid", (x,), fwd, bwd)


def log(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (g / x.data,)

    return _apply("log", (x,), lambda: np.log(x.data), bwd)


def clamp_min(x: Tensor, lo: float) -> Tensor:
    """max(x, lo); gradient passes only where x > lo."""
    lo = float(lo)

    def bwd(g, out):
        return (g * (x.data > lo),)

    return _apply("clamp_min", (x,), lambda: np.maximum(x.data, lo), bwd)


def square(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (2.0 * x.data * g,)

    return _apply("square", (x,), lambda: x.data * x.data, bwd)


# ---------------------------------------------------------------------------
# Reductions

def sum_all(x: Tensor) -> Tensor:
    def bwd(g, out):
        return (np.full_like(x.data, g[0, 0]),)

    return _apply("sum_all", (x,), lambda: np.sum(x.data, keepdims=True), bwd)


def l2_penalty(tensors: Sequence[Tensor]) -> Tensor:
    """Sum of squared entries over a parameter collection (Frobenius norm squared)."""
    acc = None
    for t in tensors:
        term = sum_all(square(t))
        acc = term if acc is None else add(acc, term)
    if acc is None:
        raise ContractError("l2_penalty of an empty collection")
    return acc
