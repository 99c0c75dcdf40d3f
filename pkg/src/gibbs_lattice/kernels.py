"""Backend selection for the hot loops.

The compiled extension ``_kernels`` is used when it imports; otherwise the
pure-Python ``_kernels_py`` takes over. Set ``GIBBS_LATTICE_PURE_PYTHON=1`` to
force the fallback. Wrappers normalise dtypes and contiguity so callers can
pass any integer/float arrays.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("GIBBS_LATTICE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = _impl.BACKEND


def _c(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype)


def batch_components(bits, eu, ev, n_vertices, impl=None):
    """Union-find over each row of a 0/1 edge matrix.

    Returns ``(labels, counts)``; labels are numbered by first appearance in
    vertex order so equal partitions give equal label rows.
    """
    impl = impl or _impl
    bits = _c(bits, np.uint8)
    if bits.ndim != 2:
        raise ValueError("bits must be a 2-d array")
    return impl.batch_components(bits, _c(eu, np.int32), _c(ev, np.int32), int(n_vertices))


def batch_windings(bits, eu, ev, shifts, n_vertices, impl=None):
    impl = impl or _impl
    return impl.batch_windings(
        _c(bits, np.uint8), _c(eu, np.int32), _c(ev, np.int32),
        _c(shifts, np.int64), int(n_vertices),
    )


def glauber_run(spins, indptr, nbr, coup, field, order, beta, uniforms, thinning, out, impl=None):
    (impl or _impl).glauber_run(
        spins, _c(indptr, np.int32), _c(nbr, np.int32), _c(coup, np.float64),
        _c(field, np.float64), _c(order, np.int32), float(beta),
        _c(uniforms, np.float64), int(thinning), out,
    )


def rc_run(bits, eu, ev, indptr, nbr, eid, p_edge, q, uniforms, thinning, out, impl=None):
    (impl or _impl).rc_run(
        bits, _c(eu, np.int32), _c(ev, np.int32), _c(indptr, np.int32), _c(nbr, np.int32),
        _c(eid, np.int32), _c(p_edge, np.float64), float(q), _c(uniforms, np.float64),
        int(thinning), out,
    )


def loop_run(eta, bptr, bedges, x, uniforms, thinning, out, impl=None):
    (impl or _impl).loop_run(
        eta, _c(bptr, np.int32), _c(bedges, np.int32), float(x),
        _c(uniforms, np.float64), int(thinning), out,
    )
