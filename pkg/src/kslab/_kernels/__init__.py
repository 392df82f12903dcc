"""Hot-kernel backend selection.

Prefers the compiled Cython module when it is importable; falls back to the
pure-numpy implementation otherwise.  Set ``KSLAB_PURE_PYTHON=1`` to force
the fallback.  Both backends produce bitwise-identical results (covered by
the parity tests), so the choice only affects speed.
"""

import os

from . import _pykernels

if os.environ.get("KSLAB_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
pl_eval = _impl.pl_eval
pl_invert = _impl.pl_invert
ks_stat_sorted = _impl.ks_stat_sorted
