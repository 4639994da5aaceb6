"""Backend selection: compiled kernels when available, numpy fallback.

Set ``DUOSEC_SOLVER_BACKEND=reference`` (or ``native``) to force a backend.
"""

from __future__ import annotations

import os

from . import reference

_ENV_VAR = "DUOSEC_SOLVER_BACKEND"

try:
    from . import _kernels as _native
except ImportError:  # extension not built; pure-python fallback
    _native = None


def available_backends() -> tuple[str, ...]:
    return ("native", "reference") if _native is not None else ("reference",)


def get_backend(name: str | None = None):
    """Resolve a backend module by name; returns (name, module)."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or None
    if name in (None, "auto"):
        name = "native" if _native is not None else "reference"
    if name == "native":
        if _native is None:
            raise RuntimeError(
                "native solver backend requested but the compiled extension "
                "is not available; rebuild or set "
                f"{_ENV_VAR}=reference"
            )
        return "native", _native
    if name == "reference":
        return "reference", reference
    raise ValueError(f"unknown solver backend {name!r}")


def active_backend_name() -> str:
    return get_backend()[0]
