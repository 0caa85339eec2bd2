"""Dense tensor algebra with reverse-mode differentiation.

Tensors wrap row-major numpy arrays (float32 by default, float64 for test
oracles). Operations built from the primitives in this module record a tape
when any input requires gradients; ``backward`` walks the tape in reverse
topological order and accumulates vector-Jacobian products into leaf
gradients. Reductions rely on numpy's fixed evaluation order, so identical
seeds and inputs reproduce bit-identical values on the same build.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, ShapeError

EPS_NORM = 1e-8

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / oracle evals)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """A dense array plus an optional gradient slot and tape linkage."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype})"


class Parameter(Tensor):
    """A named trainable tensor; its grad slot always exists."""

    __slots__ = ("name",)

    def __init__(self, name: str, data, dtype=None):
        super().__init__(data, requires_grad=True, dtype=dtype)
        self.name = name
        self.grad = np.zeros_like(self.data)

    @property
    def value(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


def _node(data: np.ndarray, parents: Sequence[Tensor], vjp: Callable) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _accumulate(t: Tensor, g: np.ndarray):
    if g.shape != t.data.shape:
        raise ShapeError(f"gradient shape {g.shape} != tensor shape {t.data.shape}")
    if t.grad is None:
        t.grad = g.astype(t.data.dtype, copy=True)
    else:
        t.grad += g


def backward(out: Tensor):
    """Accumulate d(out)/d(leaf) into every reachable leaf's ``grad``.

    ``out`` must be a scalar (shape ``(1,)`` or ``()``) produced under
    tracing. Leaves not reachable from ``out`` are left untouched, so
    parameters keep the zeros they were initialised with.
    """
    if out.data.size != 1:
        raise ContractError(f"backward needs a scalar output, got shape {out.shape}")
    if not out.requires_grad:
        raise ContractError("output was not produced under tracing")

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(out, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    out.grad = np.ones_like(out.data)
    for node in reversed(order):
        if node._vjp is None or node.grad is None:
            continue
        grads = node._vjp(node.grad)
        for parent, g in zip(node._parents, grads):
            if parent.requires_grad and g is not None:
                _accumulate(parent, g)
        if node is not out and not isinstance(node, Parameter):
            node.grad = None  # free intermediate buffers


class MarginProbe:
    """Records how close relu/maxpool inputs come to their kinks.

    Finite-difference gradient checks are only meaningful when piecewise
    branches stay fixed under the probe step; tests use this to filter
    seeds whose margins are too small.
    """

    _active: list["MarginProbe"] = []

    def __init__(self):
        self.min_relu_margin = np.inf
        self.min_pool_margin = np.inf

    def __enter__(self):
        MarginProbe._active.append(self)
        return self

    def __exit__(self, *exc):
        MarginProbe._active.remove(self)
        return False

    @classmethod
    def report_relu(cls, x: np.ndarray):
        if cls._active and x.size:
            m = float(np.min(np.abs(x)))
            for probe in cls._active:
                probe.min_relu_margin = min(probe.min_relu_margin, m)

    @classmethod
    def report_pool(cls, margin: float):
        for probe in cls._active:
            probe.min_pool_margin = min(probe.min_pool_margin, margin)


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def _as2d(x: Tensor, op: str) -> np.ndarray:
    if x.data.ndim != 2:
        raise ShapeError(f"{op} expects a 2-D tensor, got shape {x.shape}")
    return x.data


def matmul(a: Tensor, b: Tensor) -> Tensor:
    ad, bd = _as2d(a, "matmul"), _as2d(b, "matmul")
    if ad.shape[1] != bd.shape[0]:
        raise ShapeError(f"matmul mismatch: {ad.shape} @ {bd.shape}")

    def vjp(g):
        return g @ bd.T, ad.T @ g

    return _node(ad @ bd, (a, b), vjp)


def transpose(x: Tensor) -> Tensor:
    xd = _as2d(x, "transpose")

    def vjp(g):
        return (g.T.copy(),)

    return _node(xd.T.copy(), (x,), vjp)


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    if b.data.ndim != 1 or x.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(f"add_bias mismatch: {x.shape} + {b.shape}")
    lead = tuple(range(x.data.ndim - 1))

    def vjp(g):
        return g, g.sum(axis=lead) if lead else g

    return _node(x.data + b.data, (x, b), vjp)


def relu(x: Tensor) -> Tensor:
    MarginProbe.report_relu(x.data)
    mask = x.data > 0

    def vjp(g):
        return (g * mask,)

    return _node(np.where(mask, x.data, 0), (x,), vjp)


def softmax_rows(x: Tensor) -> Tensor:
    xd = _as2d(x, "softmax_rows")
    shifted = xd - xd.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)

    def vjp(g):
        inner = (g * s).sum(axis=1, keepdims=True)
        return (s * (g - inner),)

    return _node(s, (x,), vjp)


def log_sum_exp_rows(x: Tensor) -> Tensor:
    """Row-wise log(sum(exp(x))) with max subtraction for stability."""
    xd = _as2d(x, "log_sum_exp_rows")
    m = xd.max(axis=1, keepdims=True)
    e = np.exp(xd - m)
    z = e.sum(axis=1, keepdims=True)
    out = (m + np.log(z)).reshape(-1)

    def vjp(g):
        return (g[:, None] * (e / z),)

    return _node(out, (x,), vjp)


def conv_pointwise_1d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Per-timestep affine map: (..., T, C_in) -> (..., T, C_out)."""
    xd, wd = x.data, _as2d(w, "conv_pointwise_1d")
    if xd.ndim not in (2, 3) or xd.shape[-1] != wd.shape[0]:
        raise ShapeError(f"conv_pointwise_1d mismatch: {x.shape} with weight {w.shape}")
    if b.data.shape != (wd.shape[1],):
        raise ShapeError(f"conv_pointwise_1d bias shape {b.shape}")
    out = xd @ wd + b.data

    def vjp(g):
        g2 = g.reshape(-1, wd.shape[1])
        x2 = xd.reshape(-1, wd.shape[0])
        return g @ wd.T, x2.T @ g2, g2.sum(axis=0)

    return _node(out, (x, w, b), vjp)


def conv2d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Stride-1 same-padded 2-D convolution, NCHW layout."""
    xd, wd = x.data, w.data
    if xd.ndim != 4 or wd.ndim != 4 or xd.shape[1] != wd.shape[1]:
        raise ShapeError(f"conv2d mismatch: input {x.shape}, weight {w.shape}")
    if b.data.shape != (wd.shape[0],):
        raise ShapeError(f"conv2d bias shape {b.shape}")
    kh, kw = wd.shape[2], wd.shape[3]
    ph, pw = (kh - 1) // 2, (kw - 1) // 2
    xp = np.pad(xd, ((0, 0), (0, 0), (ph, kh - 1 - ph), (pw, kw - 1 - pw)))
    cols = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    out = np.einsum("nchwuv,ocuv->nohw", cols, wd, optimize=True) + b.data[None, :, None, None]

    def vjp(g):
        db = g.sum(axis=(0, 2, 3))
        dw = np.einsum("nohw,nchwuv->ocuv", g, cols, optimize=True)
        dxp = np.zeros_like(xp)
        for u in range(kh):
            for v in range(kw):
                dxp[:, :, u : u + xd.shape[2], v : v + xd.shape[3]] += np.einsum(
                    "nohw,oc->nchw", g, wd[:, :, u, v], optimize=True
                )
        h, wdt = xd.shape[2], xd.shape[3]
        return dxp[:, :, ph : ph + h, pw : pw + wdt], dw, db

    return _node(out, (x, w, b), vjp)


def maxpool2d(x: Tensor, size: int = 2) -> Tensor:
    """Non-overlapping size x size max pooling; trailing remainder dropped."""
    xd = x.data
    if xd.ndim != 4:
        raise ShapeError(f"maxpool2d expects NCHW, got {x.shape}")
    n, c, h, w = xd.shape
    h2, w2 = h // size, w // size
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"maxpool2d input {x.shape} smaller than pool {size}")
    crop = xd[:, :, : h2 * size, : w2 * size]
    win = crop.reshape(n, c, h2, size, w2, size).transpose(0, 1, 2, 4, 3, 5)
    flat = win.reshape(n, c, h2, w2, size * size)
    idx = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]

    if MarginProbe._active:
        srt = np.sort(flat, axis=-1)
        gaps = srt[..., -1] - srt[..., -2]
        pos = srt[..., -1] > 0
        MarginProbe.report_pool(float(gaps[pos].min()) if pos.any() else np.inf)

    def vjp(g):
        dflat = np.zeros_like(flat)
        np.put_along_axis(dflat, idx[..., None], g[..., None], axis=-1)
        dcrop = dflat.reshape(n, c, h2, w2, size, size).transpose(0, 1, 2, 4, 3, 5)
        dx = np.zeros_like(xd)
        dx[:, :, : h2 * size, : w2 * size] = dcrop.reshape(n, c, h2 * size, w2 * size)
        return (dx,)

    return _node(out, (x,), vjp)


def mean_axis(x: Tensor, axis: int) -> Tensor:
    n = x.data.shape[axis]

    def vjp(g):
        return (np.repeat(np.expand_dims(g / n, axis), n, axis=axis),)

    return _node(x.data.mean(axis=axis), (x,), vjp)


def mean_over_time(x: Tensor) -> Tensor:
    """Mean over the time axis of a (..., T, C) tensor."""
    if x.data.ndim < 2:
        raise ShapeError(f"mean_over_time needs rank >= 2, got {x.shape}")
    return mean_axis(x, x.data.ndim - 2)


def l2_normalize_rows(x: Tensor) -> Tensor:
    """Rows scaled to unit norm; rows with norm < 1e-8 divide by 1e-8 instead."""
    xd = _as2d(x, "l2_normalize_rows")
    n = np.sqrt((xd * xd).sum(axis=1))
    d = np.maximum(n, EPS_NORM)
    out = xd / d[:, None]

    def vjp(g):
        inner = (g * xd).sum(axis=1)
        # below the guard the denominator is constant, so only g/d survives
        corr = np.where(n > EPS_NORM, inner / (d * d * d), 0.0)
        return (g / d[:, None] - xd * corr[:, None],)

    return _node(out, (x,), vjp)


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)

    def vjp(g):
        return (g * c,)

    return _node(x.data * c, (x,), vjp)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add mismatch: {a.shape} vs {b.shape}")

    def vjp(g):
        return g, g

    return _node(a.data + b.data, (a, b), vjp)


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"sub mismatch: {a.shape} vs {b.shape}")

    def vjp(g):
        return g, -g

    return _node(a.data - b.data, (a, b), vjp)


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul mismatch: {a.shape} vs {b.shape}")

    def vjp(g):
        return g * b.data, g * a.data

    return _node(a.data * b.data, (a, b), vjp)


def concat(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not xs:
        raise ShapeError("concat of zero tensors")
    sizes = [t.data.shape[axis] for t in xs]
    bounds = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, bounds, axis=axis))

    return _node(np.concatenate([t.data for t in xs], axis=axis), tuple(xs), vjp)


def weighted_layer_sum(x: Tensor, w: Tensor) -> Tensor:
    """Weighted sum over the layer axis: (N, L, ...) with weights (L,) -> (N, ...)."""
    xd, wd = x.data, w.data
    if wd.ndim != 1 or xd.ndim < 2 or xd.shape[1] != wd.shape[0]:
        raise ShapeError(f"weighted_layer_sum mismatch: {x.shape} with weights {w.shape}")
    wexp = wd.reshape((1, -1) + (1,) * (xd.ndim - 2))

    def vjp(g):
        dx = np.expand_dims(g, 1) * wexp
        dw = np.einsum("nl...,n...->l", xd, g, optimize=True)
        return dx, dw

    return _node((xd * wexp).sum(axis=1), (x, w), vjp)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = x.data.shape

    def vjp(g):
        return (g.reshape(old),)

    return _node(x.data.reshape(shape), (x,), vjp)


def take_diag(x: Tensor) -> Tensor:
    xd = _as2d(x, "take_diag")
    if xd.shape[0] != xd.shape[1]:
        raise ShapeError(f"take_diag needs a square matrix, got {x.shape}")

    def vjp(g):
        out = np.zeros_like(xd)
        np.fill_diagonal(out, g)
        return (out,)

    return _node(np.diagonal(xd).copy(), (x,), vjp)


def gather_cols(x: Tensor, idx: np.ndarray) -> Tensor:
    xd = _as2d(x, "gather_cols")
    idx = np.asarray(idx, dtype=np.intp)
    if idx.shape != (xd.shape[0],):
        raise ShapeError(f"gather_cols index shape {idx.shape} for input {x.shape}")
    rows = np.arange(xd.shape[0])

    def vjp(g):
        out = np.zeros_like(xd)
        out[rows, idx] = g
        return (out,)

    return _node(xd[rows, idx].copy(), (x,), vjp)


def mean_all(x: Tensor) -> Tensor:
    size = x.data.size

    def vjp(g):
        return (np.full_like(x.data, g.reshape(-1)[0] / size),)

    return _node(np.asarray([x.data.mean()], dtype=x.data.dtype), (x,), vjp)


_PRIMITIVES: dict[str, Callable] = {
    "matmul": matmul,
    "add_bias": add_bias,
    "relu": relu,
    "softmax_rows": softmax_rows,
    "log_sum_exp_rows": log_sum_exp_rows,
    "conv_pointwise_1d": conv_pointwise_1d,
    "conv2d": conv2d,
    "maxpool2d": maxpool2d,
    "mean_over_time": mean_over_time,
    "l2_normalize_rows": l2_normalize_rows,
    "scale": scale,
    "concat": concat,
    "weighted_layer_sum": weighted_layer_sum,
    "transpose": transpose,
    "add": add,
    "sub": sub,
    "mul": mul,
    "reshape": reshape,
    "take_diag": take_diag,
    "gather_cols": gather_cols,
    "mean_all": mean_all,
    "mean_axis": mean_axis,
}


def apply_primitive(kind: str, inputs: Sequence[Tensor], attrs: dict | None = None) -> Tensor:
    """Dispatch a primitive by name. ``attrs`` become keyword arguments."""
    if kind not in _PRIMITIVES:
        raise ContractError(f"unknown primitive kind {kind!r}")
    fn = _PRIMITIVES[kind]
    attrs = attrs or {}
    if kind == "concat":
        return fn(list(inputs), **attrs)
    return fn(*inputs, **attrs)


# ---------------------------------------------------------------------------
# initialisation and gradient checking
# ---------------------------------------------------------------------------


def init_weight(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype=np.float32) -> np.ndarray:
    bound = float(np.sqrt(1.0 / fan_in))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def zero_grads(params: Iterable[Parameter]):
    for p in params:
        p.zero_grad()


def grad_check(fn: Callable[[], Tensor], params: Sequence[Parameter], h: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``fn`` evaluates a scalar from ``params``. The relative error for each
    entry is |analytic - central| / max(1e-8, |central|); build params in
    float64 for tight tolerances.
    """
    if h <= 0:
        raise ContractError("grad_check needs h > 0")
    zero_grads(params)
    out = fn()
    backward(out)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, an in zip(params, analytic):
        flat = p.data.reshape(-1)
        an_flat = an.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            with no_grad():
                f_plus = fn().item()
            flat[i] = orig - h
            with no_grad():
                f_minus = fn().item()
            flat[i] = orig
            central = (f_plus - f_minus) / (2.0 * h)
            err = abs(an_flat[i] - central) / max(1e-8, abs(central))
            worst = max(worst, err)
    return worst
