# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled direct-loop kernels for 3D convolution and its transpose.

Same contracts as conv3d_numpy; single-threaded dense loops over output
voxels, float32/float64 via a fused type. Selected at import by
planret._kernels when the build succeeded.
"""

import numpy as np

cimport cython

ctypedef fused real:
    float
    double


def conv3d_forward(x, w, bias, int stride, int pad):
    xc = np.ascontiguousarray(x)
    wc = np.ascontiguousarray(w)
    od = (x.shape[2] + 2 * pad - w.shape[2]) // stride + 1
    oh = (x.shape[3] + 2 * pad - w.shape[3]) // stride + 1
    ow = (x.shape[4] + 2 * pad - w.shape[4]) // stride + 1
    out = np.zeros((x.shape[0], w.shape[0], od, oh, ow), dtype=x.dtype)
    if bias is not None:
        out += np.asarray(bias).reshape(1, -1, 1, 1, 1)
    if xc.dtype == np.float32:
        _conv3d_forward[float](xc, wc, out, stride, pad)
    else:
        _conv3d_forward[double](xc, wc, out, stride, pad)
    return out


cdef void _conv3d_forward(real[:, :, :, :, ::1] x, real[:, :, :, :, ::1] w,
                          real[:, :, :, :, ::1] out, int stride, int pad) noexcept:
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1]
    cdef Py_ssize_t d = x.shape[2], h = x.shape[3], wd = x.shape[4]
    cdef Py_ssize_t cout = w.shape[0], kd = w.shape[2], kh = w.shape[3], kw = w.shape[4]
    cdef Py_ssize_t od = out.shape[2], oh = out.shape[3], ow = out.shape[4]
    cdef Py_ssize_t i, o, c, z, y, xk, a, b, cc, iz, iy, ix
    cdef real acc
    for i in range(n):
        for o in range(cout):
            for z in range(od):
                for y in range(oh):
                    for xk in range(ow):
                        acc = out[i, o, z, y, xk]
                        for c in range(cin):
                            for a in range(kd):
                                iz = z * stride + a - pad
                                if iz < 0 or iz >= d:
                                    continue
                                for b in range(kh):
                                    iy = y * stride + b - pad
                                    if iy < 0 or iy >= h:
                                        continue
                                    for cc in range(kw):
                                        ix = xk * stride + cc - pad
                                        if ix < 0 or ix >= wd:
                                            continue
                                        acc += x[i, c, iz, iy, ix] * w[o, c, a, b, cc]
                        out[i, o, z, y, xk] = acc


def conv3d_backward(x, w, grad_out, int stride, int pad, bint need_bias):
    xc = np.ascontiguousarray(x)
    wc = np.ascontiguousarray(w)
    gc = np.ascontiguousarray(grad_out)
    gx = np.zeros_like(xc)
    gw = np.zeros_like(wc)
    if xc.dtype == np.float32:
        _conv3d_backward[float](xc, wc, gc, gx, gw, stride, pad)
    else:
        _conv3d_backward[double](xc, wc, gc, gx, gw, stride, pad)
    gb = gc.sum(axis=(0, 2, 3, 4)) if need_bias else None
    return gx, gw, gb


cdef void _conv3d_backward(real[:, :, :, :, ::1] x, real[:, :, :, :, ::1] w,
                           real[:, :, :, :, ::1] gout,
                           real[:, :, :, :, ::1] gx, real[:, :, :, :, ::1] gw,
                           int stride, int pad) noexcept:
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1]
    cdef Py_ssize_t d = x.shape[2], h = x.shape[3], wd = x.shape[4]
    cdef Py_ssize_t cout = w.shape[0], kd = w.shape[2], kh = w.shape[3], kw = w.shape[4]
    cdef Py_ssize_t od = gout.shape[2], oh = gout.shape[3], ow = gout.shape[4]
    cdef Py_ssize_t i, o, c, z, y, xk, a, b, cc, iz, iy, ix
    cdef real g
    for i in range(n):
        for o in range(cout):
            for z in range(od):
                for y in range(oh):
                    for xk in range(ow):
                        g = gout[i, o, z, y, xk]
                        for c in range(cin):
                            for a in range(kd):
                                iz = z * stride + a - pad
                                if iz < 0 or iz >= d:
                                    continue
                                for b in range(kh):
                                    iy = y * stride + b - pad
                                    if iy < 0 or iy >= h:
                                        continue
                                    for cc in range(kw):
                                        ix = xk * stride + cc - pad
                                        if ix < 0 or ix >= wd:
                                            continue
                                        gx[i, c, iz, iy, ix] += g * w[o, c, a, b, cc]
                                        gw[o, c, a, b, cc] += g * x[i, c, iz, iy, ix]


def conv3d_transpose_forward(x, w, bias, int stride, int pad):
    xc = np.ascontiguousarray(x)
    wc = np.ascontiguousarray(w)
    od = (x.shape[2] - 1) * stride + w.shape[2] - 2 * pad
    oh = (x.shape[3] - 1) * stride + w.shape[3] - 2 * pad
    ow = (x.shape[4] - 1) * stride + w.shape[4] - 2 * pad
    out = np.zeros((x.shape[0], w.shape[1], od, oh, ow), dtype=x.dtype)
    if xc.dtype == np.float32:
        _convt_forward[float](xc, wc, out, stride, pad)
    else:
        _convt_forward[double](xc, wc, out, stride, pad)
    if bias is not None:
        out += np.asarray(bias).reshape(1, -1, 1, 1, 1)
    return out


cdef void _convt_forward(real[:, :, :, :, ::1] x, real[:, :, :, :, ::1] w,
                         real[:, :, :, :, ::1] out, int stride, int pad) noexcept:
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1]
    cdef Py_ssize_t d = x.shape[2], h = x.shape[3], wd = x.shape[4]
    cdef Py_ssize_t cout = w.shape[1], kd = w.shape[2], kh = w.shape[3], kw = w.shape[4]
    cdef Py_ssize_t od = out.shape[2], oh = out.shape[3], ow = out.shape[4]
    cdef Py_ssize_t i, c, o, z, y, xk, a, b, cc, oz, oy, ox
    cdef real v
    for i in range(n):
        for c in range(cin):
            for z in range(d):
                for y in range(h):
                    for xk in range(wd):
                        v = x[i, c, z, y, xk]
                        for a in range(kd):
                            oz = z * stride + a - pad
                            if oz < 0 or oz >= od:
                                continue
                            for b in range(kh):
                                oy = y * stride + b - pad
                                if oy < 0 or oy >= oh:
                                    continue
                                for cc in range(kw):
                                    ox = xk * stride + cc - pad
                                    if ox < 0 or ox >= ow:
                                        continue
                                    for o in range(cout):
                                        out[i, o, oz, oy, ox] += v * w[c, o, a, b, cc]


def conv3d_transpose_backward(x, w, grad_out, int stride, int pad, bint need_bias):
    xc = np.ascontiguousarray(x)
    wc = np.ascontiguousarray(w)
    gc = np.ascontiguousarray(grad_out)
    gx = np.zeros_like(xc)
    gw = np.zeros_like(wc)
    if xc.dtype == np.float32:
        _convt_backward[float](xc, wc, gc, gx, gw, stride, pad)
    else:
        _convt_backward[double](xc, wc, gc, gx, gw, stride, pad)
    gb = gc.sum(axis=(0, 2, 3, 4)) if need_bias else None
    return gx, gw, gb


cdef void _convt_backward(real[:, :, :, :, ::1] x, real[:, :, :, :, ::1] w,
                          real[:, :, :, :, ::1] gout,
                          real[:, :, :, :, ::1] gx, real[:, :, :, :, ::1] gw,
                          int stride, int pad) noexcept:
    cdef Py_ssize_t n = x.shape[0], cin = x.shape[1]
    cdef Py_ssize_t d = x.shape[2], h = x.shape[3], wd = x.shape[4]
    cdef Py_ssize_t cout = w.shape[1], kd = w.shape[2], kh = w.shape[3], kw = w.shape[4]
    cdef Py_ssize_t od = gout.shape[2], oh = gout.shape[3], ow = gout.shape[4]
    cdef Py_ssize_t i, c, o, z, y, xk, a, b, cc, oz, oy, ox
    cdef real v, acc, g
    for i in range(n):
        for c in range(cin):
            for z in range(d):
                for y in range(h):
                    for xk in range(wd):
                        v = x[i, c, z, y, xk]
                        acc = 0
                        for a in range(kd):
                            oz = z * stride + a - pad
                            if oz < 0 or oz >= od:
                                continue
                            for b in range(kh):
                                oy = y * stride + b - pad
                                if oy < 0 or oy >= oh:
                                    continue
                                for cc in range(kw):
                                    ox = xk * stride + cc - pad
                                    if ox < 0 or ox >= ow:
                                        continue
                                    for o in range(cout):
                                        g = gout[i, o, oz, oy, ox]
                                        acc += g * w[c, o, a, b, cc]
                                        gw[c, o, a, b, cc] += v * g
                        gx[i, c, z, y, xk] = acc
