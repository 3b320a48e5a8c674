"""Kernel lane selection: compiled extension when available, numpy otherwise.

The compiled lane (framewalk._kernels, built from _kernels.pyx) covers the
per-node 3x3 hot loops; _kernels_np is the pure-numpy twin.  Selection
happens at import and can be forced with FRAMEWALK_KERNELS=python|compiled.
Public entry points accept arbitrarily-shaped (..., 3, 3) / (..., 3) arrays
and flatten node axes before dispatching.
"""

import os

import numpy as np

from . import _kernels_np

_choice = os.environ.get("FRAMEWALK_KERNELS", "auto").lower()
_compiled = None
if _choice in ("auto", "compiled"):
    try:
        from . import _kernels as _compiled  # noqa: F401
    except ImportError:
        _compiled = None
        if _choice == "compiled":
            raise ImportError(
                "FRAMEWALK_KERNELS=compiled but the framewalk._kernels "
                "extension is not built; run `python setup.py build_ext "
                "--inplace` or reinstall the package")

COMPILED = _compiled is not None
BACKEND = "compiled" if COMPILED else "python"


def _nodes33(a):
    return np.ascontiguousarray(a, dtype=float).reshape(-1, 3, 3)


def _nodes3(a):
    return np.ascontiguousarray(a, dtype=float).reshape(-1, 3)


def cayley_apply(p, omega, tau):
    """p @ Cay(tau*A(omega)) nodewise; p (..., 3, 3), omega (..., 3)."""
    p = np.asarray(p, dtype=float)
    if _compiled is not None:
        out = _compiled.cayley_apply(_nodes33(p), _nodes3(omega), float(tau))
        return out.reshape(p.shape)
    return _kernels_np.cayley_apply(p, np.asarray(omega, dtype=float), float(tau))


def gram_error(p):
    """max |p^T p - I| over all nodes and entries."""
    if _compiled is not None:
        return _compiled.gram_error(_nodes33(p))
    return _kernels_np.gram_error(np.asarray(p, dtype=float))


def det_error(p):
    """max |det p - 1| over all nodes."""
    if _compiled is not None:
        return _compiled.det_error(_nodes33(p))
    return _kernels_np.det_error(np.asarray(p, dtype=float))


def tangent_pairings(m, d):
    """V_k(m) . d Frobenius pairings, result (..., 3)."""
    m = np.asarray(m, dtype=float)
    if _compiled is not None:
        out = _compiled.tangent_pairings(_nodes33(m), _nodes33(d))
        return out.reshape(m.shape[:-2] + (3,))
    return _kernels_np.tangent_pairings(m, np.asarray(d, dtype=float))


def frame_times_skew(p, omega):
    """p @ A(omega) nodewise."""
    p = np.asarray(p, dtype=float)
    if _compiled is not None:
        out = _compiled.frame_times_skew(_nodes33(p), _nodes3(omega))
        return out.reshape(p.shape)
    return _kernels_np.frame_times_skew(p, np.asarray(omega, dtype=float))


cayley_factor = _kernels_np.cayley_factor
