"""Import-time selection of the pairwise-kernel implementation.

The compiled extension is preferred when present; setting the environment
variable ``STORMWEAVE_PURE_PYTHON=1`` forces the numpy fallback (useful for
benchmarking and for verifying backend agreement).
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("STORMWEAVE_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

pair_fields = _impl.pair_fields
raw_weights = _impl.raw_weights


def backend_name() -> str:
    return _impl.BACKEND_NAME


def available_backends():
    """All importable backends, keyed by name."""
    impls = {"python": _pykernels}
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        impls["compiled"] = _ckernels
    except ImportError:
        pass
    return impls
