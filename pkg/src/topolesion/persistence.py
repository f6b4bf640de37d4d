"""Sublevel-set persistent homology of gray images.

Each pixel is a closed unit square entering the filtration at
``ceil(value)``; its edges and vertices enter with the first incident pixel.
Dimension 0 is computed with a union-find over 8-connected pixels using the
elder rule.  Dimension 1 is computed through duality: the holes of the white
sublevel set are the bounded 4-connected components of its black complement,
so a union-find run in decreasing value order, with one extra node standing
for everything outside the image, yields the same diagram.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .image_io import as_gray

try:
    from numba import njit as _jit
except ImportError:  # pragma: no cover - numba is optional

    def _jit(*args, **kwargs):
        return lambda fn: fn


ESSENTIAL_DEATH = 256


def essential_death_value() -> int:
    """Finite stand-in for an infinite death, one past the largest threshold."""
    return ESSENTIAL_DEATH


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Multiset of ``(birth, death)`` pairs in one homology dimension.

    ``points`` is an ``(n, 2)`` float array sorted lexicographically; essential
    classes have death ``inf``.
    """

    dim: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        if pts.size and not np.all(pts[:, 0] < pts[:, 1]):
            raise ValueError("every point must satisfy birth < death")
        if pts.size:
            pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(map(tuple, self.points.tolist()))

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.points, other.points)

    def __repr__(self):
        return f"PersistenceDiagram(dim={self.dim}, points={list(self)})"

    @property
    def births(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.points[:, 1]

    def finite_points(self, death_value: float = ESSENTIAL_DEATH) -> np.ndarray:
        """Points with infinite deaths replaced by ``death_value``."""
        pts = self.points.copy()
        pts[np.isinf(pts[:, 1]), 1] = death_value
        return pts

    def alive_count(self, t: float) -> int:
        return int(np.count_nonzero((self.births <= t) & (self.deaths > t)))


def entry_levels(img: np.ndarray) -> np.ndarray:
    """Integer threshold at which each pixel enters the sublevel filtration."""
    return np.ceil(as_gray(img)).astype(np.int64)


def filtration_levels(img: np.ndarray) -> np.ndarray:
    """Thresholds at which the sublevel set changes."""
    return np.unique(entry_levels(img))


@_jit(cache=True, nogil=True)
def _sweep(order, levels, h, w, holes):
    """Union-find sweep over pixels in ``order``; returns (births, deaths).

    Components: 8-connected pixels, elder = earlier in ``order``; the caller
    passes increasing order.  Holes: 4-connected pixels plus node ``h*w`` for
    the outside, which is the eldest; the caller passes decreasing order and
    the output pairs are (merge level, component top level).
    """
    n = h * w
    parent = np.arange(n + 1)
    rank = np.empty(n + 1, dtype=np.int64)
    rank[n] = -1
    for i in range(n):
        rank[order[i]] = i
    active = np.zeros(n + 1, dtype=np.bool_)
    active[n] = True
    births = np.empty(n, dtype=np.int64)
    deaths = np.empty(n, dtype=np.int64)
    count = 0
    nbrs = np.empty(9, dtype=np.int64)
    for i in range(n):
        p = order[i]
        active[p] = True
        level = levels[p]
        y = p // w
        x = p - y * w
        k = 0
        for dy in range(-1, 2):
            for dx in range(-1, 2):
                if dy == 0 and dx == 0:
                    continue
                if holes and dy != 0 and dx != 0:
                    continue
                yy = y + dy
                xx = x + dx
                if 0 <= yy < h and 0 <= xx < w:
                    nbrs[k] = yy * w + xx
                    k += 1
                elif holes:
                    nbrs[k] = n
                    k += 1
        for j in range(k):
            q = nbrs[j]
            if not active[q]:
                continue
            rp = p
            while parent[rp] != rp:
                parent[rp] = parent[parent[rp]]
                rp = parent[rp]
            rq = q
            while parent[rq] != rq:
                parent[rq] = parent[parent[rq]]
                rq = parent[rq]
            if rp == rq:
                continue
            if rank[rp] < rank[rq]:
                elder, younger = rp, rq
            else:
                elder, younger = rq, rp
            parent[younger] = elder
            if holes:
                # the black region rooted at `younger` is a hole for level <= t < its top level
                if level < levels[younger]:
                    births[count] = level
                    deaths[count] = levels[younger]
                    count += 1
            elif levels[younger] < level:
                births[count] = levels[younger]
                deaths[count] = level
                count += 1
    return births[:count], deaths[:count]


def _components_pairs(levels: np.ndarray) -> np.ndarray:
    h, w = levels.shape
    flat = levels.ravel()
    # stable sort: among equal levels the first pixel in row-major order is the elder
    order = np.argsort(flat, kind="stable")
    births, deaths = _sweep(order, flat, h, w, False)
    # every pixel is white at the top threshold, so exactly one class never dies
    essential = [[flat[order[0]], np.inf]]
    return np.vstack([np.column_stack([births, deaths]).astype(np.float64), essential])


def _hole_pairs(levels: np.ndarray) -> np.ndarray:
    h, w = levels.shape
    flat = levels.ravel()
    order = np.argsort(flat, kind="stable")[::-1].copy()
    births, deaths = _sweep(order, flat, h, w, True)
    return np.column_stack([births, deaths]).astype(np.float64)


def sublevel_persistence(img: np.ndarray) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Return the dimension-0 and dimension-1 diagrams of ``img``."""
    levels = entry_levels(img)
    return (
        PersistenceDiagram(0, _components_pairs(levels)),
        PersistenceDiagram(1, _hole_pairs(levels)),
    )


# -- serialization --------------------------------------------------------------


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def diagrams_to_csv(diagrams) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dim", "birth", "death"])
    for dgm in diagrams:
        for b, d in dgm:
            writer.writerow([dgm.dim, _fmt(b), _fmt(d)])
    return buf.getvalue()


def diagrams_from_csv(text: str, dims=(0, 1)) -> list[PersistenceDiagram]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != ["dim", "birth", "death"]:
        raise ValueError(f"unexpected header {reader.fieldnames}")
    points = {d: [] for d in dims}
    for row in reader:
        points.setdefault(int(row["dim"]), []).append((float(row["birth"]), float(row["death"])))
    return [PersistenceDiagram(d, np.array(points[d], dtype=np.float64)) for d in sorted(points)]


# -- bottleneck distance -----------------------------------------------------------


def _has_perfect_matching(allowed: np.ndarray) -> bool:
    n = allowed.shape[0]
    match_right = [-1] * n
    adj = [np.flatnonzero(row).tolist() for row in allowed]

    def augment(u, seen):
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    return all(augment(u, [False] * n) for u in range(n))


def _finite_bottleneck(p: np.ndarray, q: np.ndarray) -> float:
    m, n = len(p), len(q)
    if m + n == 0:
        return 0.0
    # rows: points of p, then diagonal slots for q; columns: points of q, then diagonal slots for p
    size = m + n
    cost = np.zeros((size, size))
    big = math.inf
    if m and n:
        cost[:m, :n] = np.max(np.abs(p[:, None, :] - q[None, :, :]), axis=2)
    cost[:m, n:] = big
    cost[m:, :n] = big
    if m:
        cost[np.arange(m), n + np.arange(m)] = (p[:, 1] - p[:, 0]) / 2
    if n:
        cost[m + np.arange(n), np.arange(n)] = (q[:, 1] - q[:, 0]) / 2
    # diagonal-to-diagonal pairs are free
    cost[m:, n:] = 0.0
    candidates = np.unique(cost[np.isfinite(cost)])
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck_distance(p: PersistenceDiagram, q: PersistenceDiagram, max_points: int = 10) -> float:
    """Exact bottleneck distance for small diagrams.

    Every candidate matching cost is tried in increasing order (by bisection)
    and accepted once a perfect matching using only cheaper edges exists.
    """
    if len(p) > max_points or len(q) > max_points:
        raise ValueError(f"diagrams with more than {max_points} points are not supported")
    p_inf = np.sort(p.births[np.isinf(p.deaths)])
    q_inf = np.sort(q.births[np.isinf(q.deaths)])
    if len(p_inf) != len(q_inf):
        return math.inf
    # essential points can only pair with each other; sorted order is optimal in 1-D
    essential = float(np.max(np.abs(p_inf - q_inf))) if len(p_inf) else 0.0
    finite = _finite_bottleneck(p.points[np.isfinite(p.deaths)], q.points[np.isfinite(q.deaths)])
    return max(essential, finite)
