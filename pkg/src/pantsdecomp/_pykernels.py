"""Pure numpy versions of the hot loops; used when the extension is missing."""
from __future__ import annotations

import numpy as np


class BudgetExceeded(RuntimeError):
    pass


def min_abs_dot(X, N):
    """For each point row of ``X``: min over rows of ``N`` of ``|<X, N>|`` and its index."""
    X = np.ascontiguousarray(X, dtype=float)
    N = np.ascontiguousarray(N, dtype=float)
    n = X.shape[0]
    best = np.full(n, np.inf)
    arg = np.full(n, -1, dtype=np.intp)
    if N.shape[0] == 0:
        return best, arg
    JN = N * np.array([-1.0, 1.0, 1.0])
    # chunk so the n x m block stays small
    step = max(1, 2_000_000 // max(n, 1))
    for j0 in range(0, N.shape[0], step):
        block = np.abs(X @ JN[j0 : j0 + step].T)
        k = np.argmin(block, axis=1)
        v = block[np.arange(n), k]
        better = v < best
        best[better] = v[better]
        arg[better] = k[better] + j0
    return best, arg


def _grid_keys(P, cell, shift):
    return np.floor(P / cell + shift).astype(np.int64)


def ball_bfs(pairings, center, cosh_radius, cell, budget):
    """Breadth-first search over tiles ``delta D`` with ``-<center, delta p> <= cosh_radius``.

    ``pairings`` are the SO(2,1) side-pairing matrices; neighbours of a tile
    ``delta`` are ``delta @ pairings[s]``.  Two tiles are the same when their
    images of ``p = (1, 0, 0)`` agree on a grid of size ``cell`` (orbit points
    are much further apart than ``cell``, rounding error much smaller).

    Returns ``(mats, parent, via)``; tile 0 is the identity.
    """
    pairings = np.ascontiguousarray(pairings, dtype=float)
    center = np.asarray(center, dtype=float)
    Jc = center * np.array([-1.0, 1.0, 1.0])
    shifts = [np.array([a, b]) for a in (0.0, 0.5) for b in (0.0, 0.5)]
    seen = [dict() for _ in shifts]

    def register(points, start):
        for g, sh in enumerate(shifts):
            keys = _grid_keys(points, cell, sh)
            d = seen[g]
            for i, k in enumerate(map(tuple, keys)):
                d.setdefault(k, start + i)

    def lookup(points):
        found = np.full(len(points), -1, dtype=np.intp)
        for g, sh in enumerate(shifts):
            keys = _grid_keys(points, cell, sh)
            d = seen[g]
            for i, k in enumerate(map(tuple, keys)):
                if found[i] < 0:
                    found[i] = d.get(k, -1)
        return found

    mats = [np.eye(3)[None]]
    parent = [np.array([-1])]
    via = [np.array([-1])]
    register(np.zeros((1, 2)), 0)
    total = 1
    frontier = np.eye(3)[None]
    frontier_idx = np.array([0])
    k = len(pairings)
    while len(frontier):
        cand = np.einsum("fij,sjk->fsik", frontier, pairings).reshape(-1, 3, 3)
        par = np.repeat(frontier_idx, k)
        sides = np.tile(np.arange(k), len(frontier))
        # -<center, delta p> = -Jc . delta[:, :, 0]
        val = -(cand[:, :, 0] @ Jc)
        keep = val <= cosh_radius
        cand, par, sides = cand[keep], par[keep], sides[keep]
        pts = cand[:, 1:, 0]
        old = lookup(pts)
        fresh = old < 0
        cand, par, sides, pts = cand[fresh], par[fresh], sides[fresh], pts[fresh]
        # dedupe inside the layer: first occurrence wins
        if len(cand):
            dup = np.zeros(len(cand), dtype=bool)
            pos = np.arange(len(cand))
            for sh in shifts:
                keys = _grid_keys(pts, cell, sh)
                _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
                dup |= first[inv.ravel()] < pos
            keep = ~dup
            cand, par, sides, pts = cand[keep], par[keep], sides[keep], pts[keep]
        if total + len(cand) > budget:
            raise BudgetExceeded("enumeration budget exceeded")
        idx = np.arange(total, total + len(cand))
        register(pts, total)
        mats.append(cand)
        parent.append(par)
        via.append(sides)
        total += len(cand)
        frontier, frontier_idx = cand, idx
    return (
        np.concatenate(mats),
        np.concatenate(parent).astype(np.intp),
        np.concatenate(via).astype(np.intp),
    )
