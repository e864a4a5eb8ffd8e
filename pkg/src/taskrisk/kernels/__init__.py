"""Numeric kernel backend selection.

The compiled Cython extension is preferred; the NumPy implementation is the
fallback. Set ``TASKRISK_PURE=1`` to force the fallback (used by the
benchmark and by backend-parity tests).
"""

import os

from . import _pykernels

if os.environ.get("TASKRISK_PURE") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
jacobi_eigh = _impl.jacobi_eigh
pam_build = _impl.pam_build
pam_swap = _impl.pam_swap

__all__ = ["BACKEND", "jacobi_eigh", "pam_build", "pam_swap"]
