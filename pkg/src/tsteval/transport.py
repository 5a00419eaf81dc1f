"""Exact Earth Mover's Distance by the transportation simplex.

The solver starts from a northwest-corner basis, prices non-basic cells with
MODI potentials and pivots with Bland's rule (smallest entering index, smallest
leaving index among ties), so degenerate bases cannot cycle.
"""

from __future__ import annotations

from collections import deque
from typing import List, Sequence, Tuple

import numpy as np

MASS_TOL = 1e-9
PIVOT_TOL = 1e-12


def _as_distribution(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError(f"{name} must be finite and non-negative")
    if abs(arr.sum() - 1.0) > MASS_TOL:
        raise ValueError(f"{name} is not normalized (sum={float(arr.sum())!r})")
    return arr


def unit_ground_distance(n: int) -> np.ndarray:
    """0 on the diagonal, 1 elsewhere."""
    return 1.0 - np.eye(n)


def _northwest_corner(a: np.ndarray, b: np.ndarray):
    a, b = a.copy(), b.copy()
    n, m = len(a), len(b)
    flow = np.zeros((n, m))
    basis: List[Tuple[int, int]] = []
    i = j = 0
    while True:
        x = min(a[i], b[j])
        flow[i, j] = x
        basis.append((i, j))
        a[i] -= x
        b[j] -= x
        if i == n - 1 and j == m - 1:
            break
        if i == n - 1:
            j += 1
        elif j == m - 1 or a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return flow, basis


def _potentials(cost: np.ndarray, basis, n: int, m: int):
    # Tree nodes: rows 0..n-1, columns n..n+m-1.
    adj: List[List[Tuple[int, int]]] = [[] for _ in range(n + m)]
    for i, j in basis:
        adj[i].append((n + j, i * m + j))
        adj[n + j].append((i, i * m + j))
    pot = np.full(n + m, np.nan)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other, cell in adj[node]:
            if np.isnan(pot[other]):
                c = cost.flat[cell]
                pot[other] = c - pot[node]
                queue.append(other)
    return pot[:n], pot[n:], adj


def _tree_path(adj, start: int, goal: int) -> List[int]:
    """Cells (flat indices) along the unique tree path from ``start`` to ``goal``."""
    parent = {start: (None, None)}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for other, cell in adj[node]:
            if other not in parent:
                parent[other] = (node, cell)
                queue.append(other)
    path = []
    node = goal
    while node != start:
        node, cell = parent[node]
        path.append(cell)
    path.reverse()
    return path


def solve_transport(p, q, d) -> Tuple[float, np.ndarray]:
    """Return ``(cost, flow)`` of an optimal balanced transport plan."""
    p = _as_distribution(p, "p")
    q = _as_distribution(q, "q")
    d = np.asarray(d, dtype=np.float64)
    if d.shape != (len(p), len(q)):
        raise ValueError(f"ground distance shape {d.shape} != ({len(p)}, {len(q)})")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValueError("ground distance must be finite and non-negative")

    rows = np.flatnonzero(p > 0)
    cols = np.flatnonzero(q > 0)
    cost = d[np.ix_(rows, cols)]
    n, m = len(rows), len(cols)
    flow, basis = _northwest_corner(p[rows], q[cols])
    in_basis = np.zeros(n * m, dtype=bool)
    in_basis[[i * m + j for i, j in basis]] = True

    tol = PIVOT_TOL * max(1.0, float(cost.max(initial=0.0)))
    max_iter = 50 * (n * m + n + m) + 1000
    for _ in range(max_iter):
        u, v, adj = _potentials(cost, basis, n, m)
        reduced = (cost - u[:, None] - v[None, :]).ravel()
        candidates = np.flatnonzero((reduced < -tol) & ~in_basis)
        if candidates.size == 0:
            break
        enter = int(candidates[0])
        r, c = divmod(enter, m)
        # path row r -> column c closes the cycle with the entering cell
        path = _tree_path(adj, r, n + c)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow.flat[k] for k in minus)
        leave = min(k for k in minus if flow.flat[k] <= theta + PIVOT_TOL)
        for k in minus:
            flow.flat[k] -= theta
        for k in plus:
            flow.flat[k] += theta
        flow.flat[enter] += theta
        flow.flat[leave] = 0.0
        np.maximum(flow, 0.0, out=flow)
        in_basis[leave] = False
        in_basis[enter] = True
        basis = [divmod(int(k), m) for k in np.flatnonzero(in_basis)]
    else:
        raise RuntimeError("transportation simplex did not converge")

    full = np.zeros(d.shape)
    full[np.ix_(rows, cols)] = flow
    return float(np.sum(flow * cost)), full


def emd(p: Sequence[float], q: Sequence[float], d) -> float:
    """Earth Mover's Distance between normalized ``p`` and ``q`` under ``d``."""
    return solve_transport(p, q, d)[0]


def emd_binary(p1: float, q1: float) -> float:
    """Closed form for two-point distributions under unit ground distance."""
    for name, x in (("p1", p1), ("q1", q1)):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"{name}={x!r} is not a probability")
    return abs(p1 - q1)
