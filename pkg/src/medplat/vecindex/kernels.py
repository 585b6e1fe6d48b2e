"""Kernel selection: compiled extension when built, numpy fallback otherwise.

Set MEDPLAT_KERNEL=python to force the fallback (used by the benchmark and
the parity tests).
"""

import os

from . import _pykernels

if os.environ.get("MEDPLAT_KERNEL") == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
cosine_scores = _impl.cosine_scores
