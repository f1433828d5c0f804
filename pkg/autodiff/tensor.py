"""
Dense float64 tensor with a reverse-mode tape

Every primitive records its parents and a backward rule returning one
gradient per parent. `Tensor.backward` walks the recorded graph once in
reverse topological order and accumulates into `.grad`.
"""
from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from models.exceptions import NonFiniteError, ShapeError

ArrayLike = Union["Tensor", np.ndarray, float, int]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_state = threading.local()


def grad_enabled() -> bool:
    return getattr(_state, "enabled", True)


@contextmanager
def no_grad() -> Iterator[None]:
    """Forward ops inside the block record nothing (per thread)"""
    previous = grad_enabled()
    _state.enabled = False
    try:
        yield
    finally:
        _state.enabled = previous


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple[Tensor, ...] = ()
        self._backward: Optional[BackwardFn] = None
        self.op = "leaf"

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, op={self.op}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float(self.data)

    # operators
    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return div(other, self)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        return power(self, exponent)

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        return matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)

    @property
    def T(self) -> "Tensor":
        return transpose(self, None)

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into every leaf that requires grad"""
        if not self.requires_grad:
            raise ValueError("backward() on a tensor that does not require grad")
        if grad is None:
            if self.size != 1:
                raise ShapeError(f"implicit gradient needs a scalar output, got shape {self.shape}")
            grad = np.ones_like(self.data)
        self.grad = np.asarray(grad, dtype=np.float64) if self.grad is None else self.grad + grad

        for node in reversed(_topological(self)):
            if node._backward is None or node.grad is None:
                continue
            parent_grads = node._backward(node.grad)
            for parent, g in zip(node._parents, parent_grads):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g.copy() if parent.grad is None else parent.grad + g
            # interior gradients are not kept once propagated
            node.grad = None


def _topological(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def as_tensor(x: ArrayLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _record(data: np.ndarray, parents: Sequence[Tensor], backward: BackwardFn, op: str) -> Tensor:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced non-finite values")
    out = Tensor(data)
    out.op = op
    if grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# elementwise binary

def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _record(
        a.data + b.data, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
        "add",
    )


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _record(
        a.data - b.data, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
        "sub",
    )


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _record(
        a.data * b.data, (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
        "mul",
    )


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a.data / b.data
    return _record(
        out, (a, b),
        lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * a.data / (b.data * b.data), b.shape)),
        "div",
    )


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    """np.matmul semantics for operands of rank >= 2"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("matmul needs operands of rank >= 2")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner extents differ: {a.shape} @ {b.shape}")

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _record(np.matmul(a.data, b.data), (a, b), backward, "matmul")


# elementwise unary

def neg(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return _record(-x.data, (x,), lambda g: (-g,), "neg")


def power(x: ArrayLike, exponent: float) -> Tensor:
    x = as_tensor(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x.data ** exponent
    return _record(out, (x,), lambda g: (g * exponent * x.data ** (exponent - 1),), "pow")


def exp(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    with np.errstate(over="ignore"):
        out = np.exp(x.data)
    return _record(out, (x,), lambda g: (g * out,), "exp")


def log(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.data)
    return _record(out, (x,), lambda g: (g / x.data,), "log")


def sqrt(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    with np.errstate(invalid="ignore"):
        out = np.sqrt(x.data)
    return _record(out, (x,), lambda g: (g * 0.5 / out,), "sqrt")


def tabs(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return _record(np.abs(x.data), (x,), lambda g: (g * np.sign(x.data),), "abs")


def sigmoid(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    out = expit(x.data)
    return _record(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def leaky_relu(x: ArrayLike, slope: float = 0.2) -> Tensor:
    x = as_tensor(x)
    positive = x.data > 0
    return _record(
        np.where(positive, x.data, slope * x.data), (x,),
        lambda g: (g * np.where(positive, 1.0, slope),),
        "leaky_relu",
    )


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    positive = x.data > 0
    return _record(np.where(positive, x.data, 0.0), (x,), lambda g: (g * positive,), "relu")


# reductions and shape

def tsum(x: ArrayLike, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _record(np.sum(x.data, axis=axis, keepdims=keepdims), (x,), backward, "sum")


def mean(x: ArrayLike, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return tsum(x, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    return _record(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: ArrayLike, axes: Optional[Sequence[int]] = None) -> Tensor:
    x = as_tensor(x)
    inverse = None if axes is None else np.argsort(axes)
    return _record(np.transpose(x.data, axes), (x,), lambda g: (np.transpose(g, inverse),), "transpose")


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _record(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward, "concat")


def take(x: ArrayLike, indices: np.ndarray, axis: int) -> Tensor:
    """Gather along one axis"""
    x = as_tensor(x)
    indices = np.asarray(indices, dtype=np.int64)

    def backward(g):
        full = np.zeros(np.moveaxis(x.data, axis, 0).shape)
        np.add.at(full, indices, np.moveaxis(g, axis, 0))
        return (np.moveaxis(full, 0, axis),)

    return _record(np.take(x.data, indices, axis=axis), (x,), backward, "take")


def scatter(base: ArrayLike, indices: np.ndarray, values: ArrayLike, axis: int) -> Tensor:
    """Copy of `base` with the (unique) positions `indices` along `axis` replaced by `values`"""
    base, values = as_tensor(base), as_tensor(values)
    indices = np.asarray(indices, dtype=np.int64)
    out = np.moveaxis(base.data.copy(), axis, 0)
    out[indices] = np.moveaxis(values.data, axis, 0)

    def backward(g):
        moved = np.moveaxis(g, axis, 0)
        g_base = moved.copy()
        g_base[indices] = 0.0
        return np.moveaxis(g_base, 0, axis), np.moveaxis(moved[indices], 0, axis)

    return _record(np.moveaxis(out, 0, axis), (base, values), backward, "scatter")


def where(condition: np.ndarray, a: ArrayLike, b: ArrayLike) -> Tensor:
    """Per-element select; `condition` is a constant boolean array"""
    a, b = as_tensor(a), as_tensor(b)
    condition = np.asarray(condition, dtype=bool)
    return _record(
        np.where(condition, a.data, b.data), (a, b),
        lambda g: (_unbroadcast(np.where(condition, g, 0.0), a.shape), _unbroadcast(np.where(condition, 0.0, g), b.shape)),
        "where",
    )


def softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    """Max-subtracted softmax"""
    x = as_tensor(x)
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / np.sum(e, axis=axis, keepdims=True)

    def backward(g):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return _record(out, (x,), backward, "softmax")


def upsample_nearest(x: ArrayLike, factor: int = 2) -> Tensor:
    """NCHW nearest-neighbour upsampling by an integer factor"""
    x = as_tensor(x)
    if x.ndim != 4:
        raise ShapeError(f"upsample expects NCHW, got {x.shape}")
    out = x.data.repeat(factor, axis=2).repeat(factor, axis=3)

    def backward(g):
        n, c, h, w = x.shape
        return (g.reshape(n, c, h, factor, w, factor).sum(axis=(3, 5)),)

    return _record(out, (x,), backward, "upsample")
