"""Backend selection: compiled trial kernels with a pure-NumPy fallback.

Both backends expose the same module-level functions with identical
signatures and identical draw-consumption contracts:

``kmc5d_trials``, ``kmc3d_trials``, ``stage1_pair_samples``, ``bd_trials``

The compiled backend is preferred when its extension module imported
successfully; ``get_backend("python")`` forces the fallback (used by the
cross-backend equality tests and as a safety hatch on platforms where the
extension cannot build).
"""

from __future__ import annotations

from types import ModuleType

from . import pure

try:  # pragma: no cover - exercised implicitly by which backend runs
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

__all__ = ["get_backend", "available_backends", "default_backend_name"]


def available_backends() -> dict[str, bool]:
    """Map of backend name to availability."""
    return {"compiled": _compiled is not None, "python": True}


def default_backend_name() -> str:
    """Name of the backend used when none is requested explicitly."""
    return "compiled" if _compiled is not None else "python"


def get_backend(name: str | None = None) -> ModuleType:
    """Return the backend module for ``name`` (default: best available).

    Parameters
    ----------
    name : str or None
        ``"compiled"``, ``"python"``, or None for the default.

    Raises
    ------
    ValueError
        If the name is unknown or the compiled backend was requested but
        is not available.
    """
    if name is None:
        name = default_backend_name()
    if name == "python":
        return pure
    if name == "compiled":
        if _compiled is None:
            raise ValueError(
                "compiled backend is not available; reinstall the package "
                "with build tools present or use backend='python'"
            )
        return _compiled
    raise ValueError(f"unknown backend {name!r}; expected 'compiled' or 'python'")
