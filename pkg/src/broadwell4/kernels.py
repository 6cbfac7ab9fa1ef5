"""Kernel backend selection: compiled extension if built, NumPy otherwise.

The two backends implement identical contracts (see _kernels_np for the
reference documentation); parity is covered by tests and the benchmark
module compares their throughput.
"""

from __future__ import annotations

from . import _kernels_np as _numpy_backend

try:
    from . import _kernels as _compiled_backend
except ImportError:  # extension not built: NumPy lane only
    _compiled_backend = None

_BACKENDS = {"numpy": _numpy_backend}
if _compiled_backend is not None:
    _BACKENDS["compiled"] = _compiled_backend

_active = "compiled" if _compiled_backend is not None else "numpy"


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return _active


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}"
        )
    _active = name


def set_num_threads(n: int) -> None:
    for mod in _BACKENDS.values():
        mod.set_num_threads(n)


def get_num_threads() -> int:
    return _BACKENDS[_active].get_num_threads()


def plain_integral(*args):
    return _BACKENDS[_active].plain_integral(*args)


def sigma_value(*args):
    return _BACKENDS[_active].sigma_value(*args)


def lattice_integral(*args):
    return _BACKENDS[_active].lattice_integral(*args)
