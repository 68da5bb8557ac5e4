"""Centreline extraction for thin (stroke-like) components.

The outline of a pen stroke has two sides; fitting primitives to it would
count every stroke twice.  Thin components are therefore thinned to a
one-pixel skeleton and walked as a graph into open or closed pixel paths.
"""
from __future__ import annotations

import numpy as np
from skimage.morphology import skeletonize

_ORTHO = ((0, 1), (1, 0), (0, -1), (-1, 0))
_DIAG = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _m_neighbours(pixels: set, p):
    """m-adjacency: diagonal steps only where no orthogonal two-step route
    exists, so the skeleton graph has no spurious triangles."""
    r, c = p
    out = [(r + dr, c + dc) for dr, dc in _ORTHO if (r + dr, c + dc) in pixels]
    for dr, dc in _DIAG:
        q = (r + dr, c + dc)
        if q in pixels and (r + dr, c) not in pixels and (r, c + dc) not in pixels:
            out.append(q)
    return sorted(out)


def _walk_graph(pixels: set):
    adj = {p: _m_neighbours(pixels, p) for p in pixels}
    nodes = sorted(p for p, ns in adj.items() if len(ns) != 2)
    seen = set()
    paths = []  # (list of pixels, closed)

    def walk(a, b):
        path = [a, b]
        seen.add(frozenset((a, b)))
        prev, cur = a, b
        while len(adj[cur]) == 2:
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            e = frozenset((cur, nxt))
            if e in seen:
                break
            seen.add(e)
            path.append(nxt)
            prev, cur = cur, nxt
        return path

    for n in nodes:
        if not adj[n]:
            paths.append(([n], False))
            continue
        for m in adj[n]:
            if frozenset((n, m)) not in seen:
                paths.append((walk(n, m), False))
    for p in sorted(pixels):
        if len(adj[p]) == 2 and frozenset((p, adj[p][0])) not in seen:
            path = walk(p, adj[p][0])
            if len(path) > 1 and path[-1] == path[0]:
                path.pop()
            paths.append((path, True))
    return adj, paths


def _merge_at_degree_two(paths):
    """Join open paths that meet end-to-end at a node shared by exactly two
    path ends (left behind after spur removal)."""
    changed = True
    while changed:
        changed = False
        ends = {}
        for i, (pts, closed) in enumerate(paths):
            if closed or len(pts) < 2:
                continue
            ends.setdefault(pts[0], []).append((i, 0))
            ends.setdefault(pts[-1], []).append((i, -1))
        for node in sorted(ends):
            inc = ends[node]
            if len(inc) != 2:
                continue
            (i, ei), (j, ej) = inc
            if i == j:
                pts = paths[i][0][:-1]
                paths[i] = (pts, len(pts) >= 3)
            else:
                a = paths[i][0] if ei == -1 else paths[i][0][::-1]
                b = paths[j][0] if ej == 0 else paths[j][0][::-1]
                merged = a + b[1:]
                paths = [p for k, p in enumerate(paths) if k not in (i, j)]
                paths.append((merged, False))
            changed = True
            break
    return paths


def skeleton_paths(comp: np.ndarray, spur_length: float = 0.0):
    """Centreline paths of one component mask.

    Returns a list of (points, closed) with points as (x, y) pixel indices.
    Side branches shorter than ``spur_length`` that end in a free tip are
    pruned.
    """
    skel = skeletonize(comp)
    rows, cols = np.nonzero(skel)
    pixels = set(zip(rows.tolist(), cols.tolist()))
    if not pixels:
        return []
    _, paths = _walk_graph(pixels)

    # pruning can expose new tips (a spur ending in a small fork), so repeat
    while len(paths) > 1:
        ends: dict = {}
        for pts, closed in paths:
            if not closed and len(pts) >= 2:
                for q in (pts[0], pts[-1]):
                    ends[q] = ends.get(q, 0) + 1

        def is_spur(pts, closed):
            if closed or len(pts) < 2:
                return False
            tips = (ends[pts[0]] == 1) + (ends[pts[-1]] == 1)
            return tips == 1 and len(pts) - 1 < spur_length

        kept = [p for p in paths if not is_spur(*p)]
        if len(kept) == len(paths) or not kept:
            break
        paths = _merge_at_degree_two(kept)

    return [([(c, r) for r, c in pts], closed) for pts, closed in paths]
