"""Valid-padding convolution and dense layers with their backward passes."""
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class ShapeMismatchError(ValueError):
    pass


def conv_output_size(size: int, kernel: int, stride: int) -> int:
    if size < kernel:
        raise ShapeMismatchError(f'Input size {size} is smaller than kernel {kernel}')
    return (size - kernel) // stride + 1


def _as_batch(x: np.ndarray) -> np.ndarray:
    if x.ndim == 3:
        return x[None]
    if x.ndim != 4:
        raise ShapeMismatchError(f'Expected (C, H, W) or (B, C, H, W) input, got shape {x.shape}')
    return x


def conv2d_forward(x: np.ndarray, weights: np.ndarray, bias: Optional[np.ndarray],
                   stride: int) -> Tuple[np.ndarray, np.ndarray]:
    """Cross-correlation of a (B, C, H, W) batch with (F, C, k, k) filters.

    Returns the (B, F, Ho, Wo) output and the im2col matrix kept for the backward pass.
    """
    batch, channels, height, width = x.shape
    filters, weight_channels, kernel, kernel_w = weights.shape
    if weight_channels != channels or kernel != kernel_w:
        raise ShapeMismatchError(f'Filters {weights.shape} do not fit input {x.shape}')
    out_h = conv_output_size(height, kernel, stride)
    out_w = conv_output_size(width, kernel, stride)

    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]
    windows = windows[:, :, :out_h, :out_w]
    cols = np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(batch * out_h * out_w, -1)
    out = cols @ weights.reshape(filters, -1).T
    if bias is not None:
        out += bias
    return out.reshape(batch, out_h, out_w, filters).transpose(0, 3, 1, 2), cols


def conv2d_backward(grad_out: np.ndarray, cols: np.ndarray, input_shape: Tuple[int, ...],
                    weights: np.ndarray, stride: int,
                    need_input_grad: bool = True) -> Tuple[Optional[np.ndarray], np.ndarray, np.ndarray]:
    batch, filters, out_h, out_w = grad_out.shape
    kernel = weights.shape[2]
    grad = grad_out.transpose(0, 2, 3, 1).reshape(-1, filters)
    grad_weights = (grad.T @ cols).reshape(weights.shape)
    grad_bias = grad.sum(axis=0)
    if not need_input_grad:
        return None, grad_weights, grad_bias

    grad_cols = (grad @ weights.reshape(filters, -1)).reshape(batch, out_h, out_w, weights.shape[1], kernel, kernel)
    grad_input = np.zeros(input_shape, dtype=grad_out.dtype)
    row_span = stride * (out_h - 1) + 1
    col_span = stride * (out_w - 1) + 1
    for i in range(kernel):
        for j in range(kernel):
            grad_input[:, :, i:i + row_span:stride, j:j + col_span:stride] += \
                grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
    return grad_input, grad_weights, grad_bias


def conv2d(x: np.ndarray, weights: np.ndarray, stride: int = 1, bias: Optional[np.ndarray] = None) -> np.ndarray:
    """Valid cross-correlation; accepts a single (C, H, W) input or a batch."""
    single = x.ndim == 3
    out, _ = conv2d_forward(_as_batch(x), weights, bias, stride)
    return out[0] if single else out


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    return x @ weights.T + bias


def dense_backward(grad_out: np.ndarray, x: np.ndarray,
                   weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return grad_out @ weights, grad_out.T @ x, grad_out.sum(axis=0)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)
