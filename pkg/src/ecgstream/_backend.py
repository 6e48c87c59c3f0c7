"""Kernel backend selection.

The compiled extension is preferred when importable; set
``ECGSTREAM_BACKEND=pure`` (or ``compiled``) to force one explicitly.
"""

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:  # extension not built
    _kernels_cy = None


def available_backends() -> dict:
    """Name -> kernel module for every backend importable here."""
    out = {"pure": _kernels_py}
    if _kernels_cy is not None:
        out["compiled"] = _kernels_cy
    return out


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, env override, or default preference."""
    if name is None:
        name = os.environ.get("ECGSTREAM_BACKEND") or None
    backends = available_backends()
    if name is None:
        return backends.get("compiled", _kernels_py)
    try:
        return backends[name]
    except KeyError:
        raise ValueError(
            f"unknown kernel backend {name!r}; available: {sorted(backends)}"
        ) from None


def active_backend_name() -> str:
    return get_backend().name
