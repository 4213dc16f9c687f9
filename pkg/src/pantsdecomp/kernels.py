"""Kernel selection: the compiled extension when built, numpy otherwise.

Set ``PANTSDECOMP_PURE_PYTHON=1`` to force the numpy versions.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("PANTSDECOMP_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels


class BudgetExceeded(RuntimeError):
    """An enumeration grew beyond its element cap."""


def min_abs_dot(X, N):
    return _impl.min_abs_dot(X, N)


def ball_bfs(pairings, center, cosh_radius, cell, budget):
    try:
        return _impl.ball_bfs(pairings, center, cosh_radius, cell, int(budget))
    except _impl.BudgetExceeded as exc:
        raise BudgetExceeded(str(exc)) from None
