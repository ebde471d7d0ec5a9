"""Kernel backend selection.

The hot numeric loops (ratio-of-affine evaluation, chord coordinate
statistics) exist twice: a compiled extension (cevarep._kernels) and a
plain numpy fallback (cevarep._kernels_py).  The extension is used when
it was built.  Set CEVAREP_KERNELS=python to force the fallback, or
CEVAREP_KERNELS=compiled to insist on the extension (ImportError when it
is missing).  Both backends compute the same quantities; the test suite
checks them against each other.
"""

import os

from cevarep import _kernels_py

_choice = os.environ.get("CEVAREP_KERNELS", "auto")
if _choice not in ("auto", "python", "compiled"):
    raise ValueError(
        f"CEVAREP_KERNELS must be auto, python or compiled, got {_choice!r}"
    )

if _choice == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from cevarep import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        _impl = _kernels_py
        BACKEND = "python"

eval_one = _impl.eval_one
eval_many = _impl.eval_many
seg_coord_one = _impl.seg_coord_one
chord_stats = _impl.chord_stats
