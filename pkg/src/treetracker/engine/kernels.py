"""Backend selection for the probe loops.

The compiled extension is used when it imports; set ``TREETRACKER_PURE=1``
to force the pure-Python loops.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

_compiled: ModuleType | None
try:
    from . import _ckernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

hj = _pykernels.hj
ttj = _pykernels.ttj
BACKEND = "python"


def use_backend(name: str) -> None:
    global hj, ttj, BACKEND
    try:
        mod = BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
    hj, ttj, BACKEND = mod.hj, mod.ttj, name


use_backend("cython" if _compiled is not None and not os.environ.get("TREETRACKER_PURE") else "python")
