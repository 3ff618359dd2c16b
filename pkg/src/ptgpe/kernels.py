"""Backend selection for the shooting kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``PTGPE_PURE_PYTHON`` is set to a non-empty value, the
pure-Python module is used.  Both expose ``shoot_standard`` and
``shoot_continued``.
"""
import os

from . import _kernels_py

if os.environ.get("PTGPE_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

shoot_standard = _impl.shoot_standard
shoot_continued = _impl.shoot_continued

STATUS_OK = _kernels_py.STATUS_OK
STATUS_BLOWUP = _kernels_py.STATUS_BLOWUP
STATUS_UNDERFLOW = _kernels_py.STATUS_UNDERFLOW
