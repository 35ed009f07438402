"""Layer primitives: valid-padding convolution, fully-connected, ReLU.

Convolution lowers to a single matrix product per layer (im2col), which is
where nearly all of the arithmetic lives. Everything is dtype-agnostic so the
same code path runs in float32 for training and float64 for gradient checks.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv_output_size(size, kernel, stride):
    if (size - kernel) % stride != 0:
        raise ValueError(f"kernel {kernel} stride {stride} does not tile input {size}")
    return (size - kernel) // stride + 1


def im2col(x, kernel, stride):
    """(B,C,H,W) -> (B*OH*OW, C*KH*KW) patch matrix."""
    b, c, h, w = x.shape
    oh = conv_output_size(h, kernel, stride)
    ow = conv_output_size(w, kernel, stride)
    windows = sliding_window_view(x, (kernel, kernel), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]  # (B, C, OH, OW, KH, KW)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(b * oh * ow, c * kernel * kernel)
    return np.ascontiguousarray(cols), oh, ow


def col2im(dcols, x_shape, kernel, stride):
    """Scatter-add patch gradients back onto the input layout."""
    b, c, h, w = x_shape
    oh = conv_output_size(h, kernel, stride)
    ow = conv_output_size(w, kernel, stride)
    dcols = dcols.reshape(b, oh, ow, c, kernel, kernel).transpose(0, 3, 4, 5, 1, 2)
    dx = np.zeros(x_shape, dtype=dcols.dtype)
    for i in range(kernel):
        for j in range(kernel):
            dx[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += dcols[:, :, i, j]
    return dx


def conv_forward(x, weight, bias, stride):
    """x (B,C,H,W), weight (OC,C,KH,KW), bias (OC,) -> (B,OC,OH,OW)."""
    oc, _, kernel, _ = weight.shape
    b = x.shape[0]
    cols, oh, ow = im2col(x, kernel, stride)
    out = cols @ weight.reshape(oc, -1).T
    out += bias
    y = out.reshape(b, oh, ow, oc).transpose(0, 3, 1, 2)
    cache = (x.shape, cols, weight, stride)
    return y, cache


def conv_backward(dy, cache, need_dx=True):
    x_shape, cols, weight, stride = cache
    oc, _, kernel, _ = weight.shape
    dy_mat = dy.transpose(0, 2, 3, 1).reshape(-1, oc)
    dweight = (dy_mat.T @ cols).reshape(weight.shape)
    dbias = dy_mat.sum(axis=0)
    dx = None
    if need_dx:
        dcols = dy_mat @ weight.reshape(oc, -1)
        dx = col2im(dcols, x_shape, kernel, stride)
    return dx, dweight, dbias


def fc_forward(x, weight, bias):
    """x (B,N), weight (N,M), bias (M,) -> (B,M)."""
    y = x @ weight + bias
    return y, (x, weight)


def fc_backward(dy, cache):
    x, weight = cache
    dx = dy @ weight.T
    dweight = x.T @ dy
    dbias = dy.sum(axis=0)
    return dx, dweight, dbias


def relu_forward(x):
    mask = x > 0
    return x * mask, mask


def relu_backward(dy, mask):
    return dy * mask
