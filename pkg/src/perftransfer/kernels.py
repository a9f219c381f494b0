"""Backend selection for the tree kernels.

The compiled extension is used when it was built; otherwise, or when
``PERFTRANSFER_PURE_PYTHON=1`` is set, the numpy fallback is used. Both
produce bit-identical results.
"""
import os

from . import _pykernels

python_backend = _pykernels

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("PERFTRANSFER_PURE_PYTHON", "") not in ("1", "true"):
    _active = compiled_backend
    BACKEND = "compiled"
else:
    _active = _pykernels
    BACKEND = "python"


def split_scan(xs, ys, min_leaf):
    return _active.split_scan(xs, ys, min_leaf)


def tree_predict(feature, threshold, left, right, value, X):
    return _active.tree_predict(feature, threshold, left, right, value, X)


def use_backend(name):
    """Switch the active backend (``"compiled"`` or ``"python"``); returns the previous name."""
    global _active, BACKEND
    previous = BACKEND
    if name == "compiled":
        if compiled_backend is None:
            raise RuntimeError("compiled kernels are not built")
        _active = compiled_backend
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous
