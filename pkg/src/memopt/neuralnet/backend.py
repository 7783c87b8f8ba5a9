"""Kernel backend selection.

The compiled extension is used when it imported cleanly; the numpy
fallback otherwise. ``MEMOPT_BACKEND=python|compiled`` (or
``set_backend``) forces a choice; forcing "compiled" without the
extension built is an error rather than a silent fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_choice = os.environ.get("MEMOPT_BACKEND", "auto")


def set_backend(name: str) -> None:
    global _choice
    if name not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and _ckernels is None:
        raise RuntimeError("compiled kernels are not available (extension not built)")
    _choice = name


def active_backend() -> str:
    if _choice == "python":
        return "python"
    if _choice == "compiled":
        return "compiled"
    return "compiled" if _ckernels is not None else "python"


def compiled_available() -> bool:
    return _ckernels is not None


def _mod(backend: str | None = None):
    name = backend or active_backend()
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available")
        return _ckernels
    return _pykernels


def make_trainer(Ws, bs, hidden_act, out_act, lr, beta1, beta2, eps, backend=None):
    mod = _mod(backend)
    return mod.PyTrainer(Ws, bs, hidden_act, out_act, lr, beta1, beta2, eps) \
        if mod is _pykernels else mod.CTrainer(Ws, bs, hidden_act, out_act, lr, beta1, beta2, eps)


def forward(Ws, bs, hidden_act, out_act, X, backend=None):
    return _mod(backend).forward(Ws, bs, hidden_act, out_act, X)
