"""Convolution kernel backend selection.

Prefers the compiled Cython extension; falls back to the vectorized numpy
implementation when the extension is missing or PLANRET_FORCE_NUMPY=1.
Both backends implement identical contracts (see conv3d_numpy docstring);
`benchmarks/bench_conv3d.py` compares their throughput.
"""

import os

from . import conv3d_numpy

BACKEND = "numpy"
_impl = conv3d_numpy

if os.environ.get("PLANRET_FORCE_NUMPY", "") not in ("1", "true", "yes"):
    try:
        from . import _conv_ext

        _impl = _conv_ext
        BACKEND = "cython"
    except ImportError:
        pass

conv_out_extent = conv3d_numpy.conv_out_extent
convt_out_extent = conv3d_numpy.convt_out_extent

conv3d_forward = _impl.conv3d_forward
conv3d_backward = _impl.conv3d_backward
conv3d_transpose_forward = _impl.conv3d_transpose_forward
conv3d_transpose_backward = _impl.conv3d_transpose_backward
