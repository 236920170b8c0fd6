"""Vectorized numpy fallback for the 3D convolution kernels.

Dense direct convolution expressed as one einsum per kernel offset
(k^3 strided slices), which keeps memory flat and leans on BLAS for the
channel contraction. Used whenever the compiled extension is unavailable
or disabled via PLANRET_FORCE_NUMPY=1.

Array layouts:
    x     (N, Cin, D, H, W)
    w     (Cout, Cin, kD, kH, kW)          for conv3d
    w     (Cin, Cout, kD, kH, kW)          for conv3d_transpose
    bias  (Cout,) or None
"""

from __future__ import annotations

import numpy as np


def conv_out_extent(size, k, stride, pad):
    return (size + 2 * pad - k) // stride + 1


def _pad_spatial(x, pad):
    if pad == 0:
        return x
    p = ((0, 0), (0, 0), (pad, pad), (pad, pad), (pad, pad))
    return np.pad(x, p)


def conv3d_forward(x, w, bias, stride, pad):
    n, cin, d, h, wd = x.shape
    cout, cin_w, kd, kh, kw = w.shape
    od = conv_out_extent(d, kd, stride, pad)
    oh = conv_out_extent(h, kh, stride, pad)
    ow = conv_out_extent(wd, kw, stride, pad)
    xp = _pad_spatial(x, pad)
    out = np.zeros((n, cout, od, oh, ow), dtype=x.dtype)
    for a in range(kd):
        for b in range(kh):
            for c in range(kw):
                xs = xp[:, :, a:a + od * stride:stride,
                        b:b + oh * stride:stride,
                        c:c + ow * stride:stride]
                out += np.einsum("ncdhw,oc->nodhw", xs, w[:, :, a, b, c])
    if bias is not None:
        out += bias.reshape(1, cout, 1, 1, 1)
    return out


def conv3d_backward(x, w, grad_out, stride, pad, need_bias):
    n, cin, d, h, wd = x.shape
    cout, _, kd, kh, kw = w.shape
    od, oh, ow = grad_out.shape[2:]
    xp = _pad_spatial(x, pad)
    gxp = np.zeros_like(xp)
    gw = np.zeros_like(w)
    for a in range(kd):
        for b in range(kh):
            for c in range(kw):
                sl = (slice(None), slice(None),
                      slice(a, a + od * stride, stride),
                      slice(b, b + oh * stride, stride),
                      slice(c, c + ow * stride, stride))
                gw[:, :, a, b, c] = np.einsum("nodhw,ncdhw->oc", grad_out, xp[sl])
                gxp[sl] += np.einsum("nodhw,oc->ncdhw", grad_out, w[:, :, a, b, c])
    gx = gxp[:, :, pad:pad + d, pad:pad + h, pad:pad + wd] if pad else gxp
    gb = grad_out.sum(axis=(0, 2, 3, 4)) if need_bias else None
    return np.ascontiguousarray(gx), gw, gb


def convt_out_extent(size, k, stride, pad):
    return (size - 1) * stride + k - 2 * pad


def conv3d_transpose_forward(x, w, bias, stride, pad):
    n, cin, d, h, wd = x.shape
    cin_w, cout, kd, kh, kw = w.shape
    fd = (d - 1) * stride + kd
    fh = (h - 1) * stride + kh
    fw = (wd - 1) * stride + kw
    full = np.zeros((n, cout, fd, fh, fw), dtype=x.dtype)
    for a in range(kd):
        for b in range(kh):
            for c in range(kw):
                full[:, :, a:a + d * stride:stride,
                     b:b + h * stride:stride,
                     c:c + wd * stride:stride] += np.einsum(
                         "ncdhw,co->nodhw", x, w[:, :, a, b, c])
    out = full[:, :, pad:fd - pad, pad:fh - pad, pad:fw - pad] if pad else full
    if bias is not None:
        out = out + bias.reshape(1, cout, 1, 1, 1)
    return np.ascontiguousarray(out)


def conv3d_transpose_backward(x, w, grad_out, stride, pad, need_bias):
    n, cin, d, h, wd = x.shape
    _, cout, kd, kh, kw = w.shape
    gop = _pad_spatial(grad_out, pad)
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    for a in range(kd):
        for b in range(kh):
            for c in range(kw):
                gs = gop[:, :, a:a + d * stride:stride,
                         b:b + h * stride:stride,
                         c:c + wd * stride:stride]
                gx += np.einsum("nodhw,co->ncdhw", gs, w[:, :, a, b, c])
                gw[:, :, a, b, c] = np.einsum("ncdhw,nodhw->co", x, gs)
    gb = grad_out.sum(axis=(0, 2, 3, 4)) if need_bias else None
    return gx, gw, gb
