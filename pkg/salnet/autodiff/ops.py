"""
Forward and backward rules of the closed operation set.

Each operation registers a forward rule ``(inputs, **attrs) -> (output, cache)``
and a backward rule ``(grad, inputs, output, cache, **attrs) -> input grads``.
A backward rule returns ``None`` for inputs that take no gradient.

All reductions go through numpy with fixed axes so repeated runs sum in the
same order.
"""

from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from salnet.autodiff.value import Array
from salnet.config.constants import UNIT_BOUND
from salnet.shared.exceptions import ShapeMismatchError

ForwardRule = Callable[..., tuple[Array, Any]]
BackwardRule = Callable[..., List[Optional[Array]]]

FORWARD: Dict[str, ForwardRule] = {}
BACKWARD: Dict[str, BackwardRule] = {}


def forward_rule(name: str) -> Callable[[ForwardRule], ForwardRule]:
    def decorator(func: ForwardRule) -> ForwardRule:
        FORWARD[name] = func
        return func

    return decorator


def backward_rule(name: str) -> Callable[[BackwardRule], BackwardRule]:
    def decorator(func: BackwardRule) -> BackwardRule:
        BACKWARD[name] = func
        return func

    return decorator


def unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    """Sum ``grad`` over the axes that broadcasting added or stretched."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _same_padding(kernel: int) -> int:
    if kernel % 2 == 0:
        raise ShapeMismatchError("same padding needs an odd kernel", details={"kernel": kernel})
    return kernel // 2


# ---------------------------------------------------------------------------
# conv2d
# ---------------------------------------------------------------------------


@forward_rule("conv2d")
def conv2d_forward(
    inputs: Sequence[Array], stride: int = 1, padding: Any = "same"
) -> tuple[Array, Any]:
    x, w = inputs[0], inputs[1]
    if x.ndim != 4 or w.ndim != 4:
        raise ShapeMismatchError(
            "conv2d expects (B,C,H,W) input and (O,C,k,k) kernel",
            details={"input": x.shape, "kernel": w.shape},
        )
    if x.shape[1] != w.shape[1] or w.shape[2] != w.shape[3]:
        raise ShapeMismatchError(
            "conv2d channel/kernel mismatch",
            details={"input": x.shape, "kernel": w.shape},
        )
    kernel = w.shape[2]
    pad = _same_padding(kernel) if padding == "same" else int(padding)
    if x.shape[2] + 2 * pad < kernel or x.shape[3] + 2 * pad < kernel:
        raise ShapeMismatchError(
            "conv2d input smaller than kernel", details={"input": x.shape, "kernel": w.shape}
        )

    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    windows = sliding_window_view(xp, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out)
    if len(inputs) > 2:
        b = inputs[2]
        if b.shape != (w.shape[0],):
            raise ShapeMismatchError(
                "conv2d bias must have one entry per output channel",
                details={"bias": b.shape, "kernel": w.shape},
            )
        out = out + b[None, :, None, None]
    return out, (windows, pad, xp.shape)


@backward_rule("conv2d")
def conv2d_backward(
    grad: Array,
    inputs: Sequence[Array],
    output: Array,
    cache: Any,
    stride: int = 1,
    padding: Any = "same",
) -> List[Optional[Array]]:
    x, w = inputs[0], inputs[1]
    windows, pad, padded_shape = cache
    kernel = w.shape[2]
    h_out, w_out = grad.shape[2], grad.shape[3]

    dw = np.tensordot(grad, windows, axes=([0, 2, 3], [0, 2, 3]))
    dxp = np.zeros(padded_shape)
    for i in range(kernel):
        for j in range(kernel):
            contrib = np.tensordot(grad, w[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
            dxp[
                :,
                :,
                i : i + stride * (h_out - 1) + 1 : stride,
                j : j + stride * (w_out - 1) + 1 : stride,
            ] += contrib
    dx = dxp[:, :, pad : pad + x.shape[2], pad : pad + x.shape[3]]
    grads: List[Optional[Array]] = [np.ascontiguousarray(dx), dw]
    if len(inputs) > 2:
        grads.append(grad.sum(axis=(0, 2, 3)))
    return grads


# ---------------------------------------------------------------------------
# max-pool 2x2
# ---------------------------------------------------------------------------


def _pool_windows(x: Array) -> Array:
    b, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    cropped = x[:, :, : 2 * h2, : 2 * w2]
    return (
        cropped.reshape(b, c, h2, 2, w2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, h2, w2, 4)
    )


@forward_rule("max_pool2x2")
def max_pool_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    x = inputs[0]
    if x.ndim != 4 or x.shape[2] < 2 or x.shape[3] < 2:
        raise ShapeMismatchError("max_pool2x2 expects (B,C,H,W) with H,W >= 2", details={"input": x.shape})
    windows = _pool_windows(x)
    index = np.argmax(windows, axis=-1)
    out = np.take_along_axis(windows, index[..., None], axis=-1)[..., 0]
    return out, index


@backward_rule("max_pool2x2")
def max_pool_backward(
    grad: Array, inputs: Sequence[Array], output: Array, cache: Any
) -> List[Optional[Array]]:
    x = inputs[0]
    b, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    routed = np.zeros((b, c, h2, w2, 4))
    np.put_along_axis(routed, cache[..., None], grad[..., None], axis=-1)
    dx = np.zeros_like(x)
    dx[:, :, : 2 * h2, : 2 * w2] = (
        routed.reshape(b, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(b, c, 2 * h2, 2 * w2)
    )
    return [dx]


# ---------------------------------------------------------------------------
# elementwise nonlinearities
# ---------------------------------------------------------------------------


@forward_rule("relu")
def relu_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    return np.maximum(inputs[0], 0.0), None


@backward_rule("relu")
def relu_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    return [grad * (inputs[0] > 0.0)]


@forward_rule("tanh")
def tanh_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    raw = np.tanh(inputs[0])
    saturated = np.abs(raw) >= UNIT_BOUND
    return np.clip(raw, -UNIT_BOUND, UNIT_BOUND), saturated


@backward_rule("tanh")
def tanh_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    return [np.where(cache, 0.0, grad * (1.0 - output * output))]


@forward_rule("sigmoid")
def sigmoid_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    return expit(inputs[0]), None


@backward_rule("sigmoid")
def sigmoid_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    return [grad * output * (1.0 - output)]


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------


@forward_rule("add")
def add_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    a, b = inputs
    try:
        out_shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeMismatchError(
            "add operands do not broadcast", details={"a": a.shape, "b": b.shape}, original_error=e
        ) from e
    if out_shape != a.shape and out_shape != b.shape:
        raise ShapeMismatchError(
            "add may broadcast one operand into the other only",
            details={"a": a.shape, "b": b.shape},
        )
    return a + b, None


@backward_rule("add")
def add_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    a, b = inputs
    return [unbroadcast(grad, a.shape), unbroadcast(grad, b.shape)]


@forward_rule("scale")
def scale_forward(inputs: Sequence[Array], factor: Any = 1.0) -> tuple[Array, Any]:
    x = inputs[0]
    out = x * factor
    if out.shape != x.shape:
        raise ShapeMismatchError(
            "scale factor must broadcast into the operand",
            details={"operand": x.shape, "factor": np.shape(factor)},
        )
    return out, None


@backward_rule("scale")
def scale_backward(
    grad: Array, inputs: Sequence[Array], output: Array, cache: Any, factor: Any = 1.0
) -> List[Optional[Array]]:
    return [grad * factor]


@forward_rule("matmul")
def matmul_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    a, b = inputs
    if a.ndim < 2 or a.ndim != b.ndim or a.shape[:-2] != b.shape[:-2] or a.shape[-1] != b.shape[-2]:
        raise ShapeMismatchError("matmul shape mismatch", details={"a": a.shape, "b": b.shape})
    return np.matmul(a, b), None


@backward_rule("matmul")
def matmul_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    a, b = inputs
    return [np.matmul(grad, np.swapaxes(b, -1, -2)), np.matmul(np.swapaxes(a, -1, -2), grad)]


def _symmetrize_upper(gram: Array) -> Array:
    upper = np.triu(gram)
    return upper + np.swapaxes(np.triu(gram, 1), -1, -2)


@forward_rule("outer")
def outer_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    x = inputs[0]
    if x.ndim < 2:
        raise ShapeMismatchError("outer expects (..., K, L)", details={"input": x.shape})
    gram = np.matmul(x, np.swapaxes(x, -1, -2))
    return _symmetrize_upper(gram), None


@backward_rule("outer")
def outer_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    x = inputs[0]
    # Only the upper triangle was computed; fold the lower-triangle adjoint onto it.
    folded = np.triu(grad) + np.triu(np.swapaxes(grad, -1, -2), 1)
    sym = folded + np.swapaxes(folded, -1, -2)
    return [np.matmul(sym, x)]


# ---------------------------------------------------------------------------
# layout
# ---------------------------------------------------------------------------


@forward_rule("reshape")
def reshape_forward(inputs: Sequence[Array], shape: tuple[int, ...] = ()) -> tuple[Array, Any]:
    x = inputs[0]
    try:
        return x.reshape(shape).copy(), None
    except ValueError as e:
        raise ShapeMismatchError(
            "reshape size mismatch", details={"input": x.shape, "shape": shape}, original_error=e
        ) from e


@backward_rule("reshape")
def reshape_backward(
    grad: Array, inputs: Sequence[Array], output: Array, cache: Any, shape: tuple[int, ...] = ()
) -> List[Optional[Array]]:
    return [grad.reshape(inputs[0].shape)]


@forward_rule("concatenate")
def concatenate_forward(inputs: Sequence[Array], axis: int = 0) -> tuple[Array, Any]:
    try:
        out = np.concatenate(list(inputs), axis=axis)
    except ValueError as e:
        raise ShapeMismatchError(
            "concatenate shape mismatch",
            details={"shapes": [x.shape for x in inputs], "axis": axis},
            original_error=e,
        ) from e
    return out, None


@backward_rule("concatenate")
def concatenate_backward(
    grad: Array, inputs: Sequence[Array], output: Array, cache: Any, axis: int = 0
) -> List[Optional[Array]]:
    bounds = np.cumsum([x.shape[axis] for x in inputs])[:-1]
    return list(np.split(grad, bounds, axis=axis))


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------


@forward_rule("sum")
def sum_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    return np.asarray(np.sum(inputs[0])), None


@backward_rule("sum")
def sum_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    return [np.full(inputs[0].shape, float(grad))]


@forward_rule("mean_square")
def mean_square_forward(inputs: Sequence[Array]) -> tuple[Array, Any]:
    x = inputs[0]
    if x.size == 0:
        raise ShapeMismatchError("mean_square of an empty operand", details={"input": x.shape})
    return np.asarray(np.sum(x * x) / x.size), None


@backward_rule("mean_square")
def mean_square_backward(grad: Array, inputs: Sequence[Array], output: Array, cache: Any) -> List[Optional[Array]]:
    x = inputs[0]
    return [(2.0 * float(grad) / x.size) * x]
