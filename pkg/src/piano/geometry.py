"""Grid-canvas geometry: cell ownership, rectilinear regions, boundary segments.

The canvas is a (H, W) int32 matrix `owner[y, x]`. Cells are addressed as
(x, y) tuples in all public APIs. Owner values: real module ids start at 0,
blank modules (whitespace promoted to modules) start at BLANK_BASE, EMPTY
marks unowned cells and BORDER is the virtual owner outside the canvas.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

EMPTY = -1
BORDER = -2
BLANK_BASE = 10000

# 4-connectivity structuring element for component labelling
_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def is_blank(owner: int) -> bool:
    return owner >= BLANK_BASE


def new_canvas(width: int, height: int) -> np.ndarray:
    if width <= 0 or height <= 0:
        raise ValueError("canvas dimensions must be positive")
    return np.full((height, width), EMPTY, dtype=np.int32)


def region_mask(canvas: np.ndarray, owner: int) -> np.ndarray:
    return canvas == owner


def region_cells(canvas: np.ndarray, owner: int) -> list[tuple[int, int]]:
    """All cells of `owner` as (x, y) tuples in lexicographic (x, y) order."""
    ys, xs = np.nonzero(canvas == owner)
    order = np.lexsort((ys, xs))
    return list(zip(xs[order].tolist(), ys[order].tolist()))


def region_area(canvas: np.ndarray, owner: int) -> int:
    return int(np.count_nonzero(canvas == owner))


def region_bbox(canvas: np.ndarray, owner: int) -> tuple[int, int, int, int]:
    """(x0, y0, x1, y1) half-open bounding box of the region."""
    ys, xs = np.nonzero(canvas == owner)
    if xs.size == 0:
        raise ValueError(f"empty module region (owner {owner})")
    return int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1


def region_center(cells) -> tuple[float, float]:
    """Area centroid of a cell set (mean of cell centers).

    Accepts a boolean mask, an iterable of (x, y) tuples, or an Nx2 array.
    For a rectangle this equals the bounding-box center.
    """
    if isinstance(cells, np.ndarray) and cells.dtype == bool:
        ys, xs = np.nonzero(cells)
    else:
        arr = np.asarray(list(cells) if not isinstance(cells, np.ndarray) else cells)
        if arr.size == 0:
            raise ValueError("empty module region")
        xs, ys = arr[:, 0], arr[:, 1]
    if xs.size == 0:
        raise ValueError("empty module region")
    return float(xs.mean() + 0.5), float(ys.mean() + 0.5)


def owner_areas(canvas: np.ndarray) -> dict[int, int]:
    """Cell counts per owner (EMPTY excluded)."""
    vals, counts = np.unique(canvas, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts) if v >= 0}


def owner_centers(canvas: np.ndarray) -> dict[int, tuple[float, float]]:
    """Centroid of every owner's region in one pass."""
    flat = canvas.ravel()
    keep = np.nonzero(flat >= 0)[0]
    ids = flat[keep]
    if ids.size == 0:
        return {}
    w = canvas.shape[1]
    yy, xx = np.divmod(keep, w)
    # np.unique gives a dense relabeling so bincount stays small even though
    # blank ids start at BLANK_BASE
    uniq, inv = np.unique(ids, return_inverse=True)
    counts = np.bincount(inv)
    sx = np.bincount(inv, weights=xx)
    sy = np.bincount(inv, weights=yy)
    return {
        int(u): (float(sx[i] / counts[i] + 0.5), float(sy[i] / counts[i] + 0.5))
        for i, u in enumerate(uniq)
    }


def is_connected(mask: np.ndarray) -> bool:
    """True iff the boolean mask is one non-empty 4-connected component."""
    if not mask.any():
        return False
    _, n = ndimage.label(mask, structure=_STRUCT4)
    return n == 1


def connected_components(canvas: np.ndarray, predicate) -> list[list[tuple[int, int]]]:
    """4-connected components of cells matching `predicate`.

    `predicate` is either an owner value or a callable mapping the owner
    matrix to a boolean mask. Components are ordered by their
    lexicographically smallest (x, y) cell; cells within a component are in
    (x, y) order.
    """
    mask = predicate(canvas) if callable(predicate) else canvas == predicate
    labels, n = ndimage.label(mask, structure=_STRUCT4)
    comps = []
    for lab in range(1, n + 1):
        ys, xs = np.nonzero(labels == lab)
        order = np.lexsort((ys, xs))
        comps.append(list(zip(xs[order].tolist(), ys[order].tolist())))
    comps.sort(key=lambda cells: cells[0])
    return comps


def outline_segment_count(mask: np.ndarray) -> int:
    """Number of maximal straight segments of the region outline (regularity).

    Counts outline polygon vertices via 2x2 window patterns: windows holding
    1 or 3 region cells are corners; a diagonal pair counts twice (the
    outline touches itself there).
    """
    if not mask.any():
        raise ValueError("empty module region")
    m = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=np.int8)
    m[1:-1, 1:-1] = mask
    a, b, c, d = m[:-1, :-1], m[:-1, 1:], m[1:, :-1], m[1:, 1:]
    s = a + b + c + d
    corners = int(np.count_nonzero(s == 1) + np.count_nonzero(s == 3))
    diagonal = int(np.count_nonzero((s == 2) & (a == d) & (b == c) & (a != b)))
    return corners + 2 * diagonal


@dataclass(frozen=True)
class BoundarySegment:
    """Maximal run of shared unit faces between two owners.

    A vertical segment (axis 'v') lies on the grid line x=line and spans
    y in [start, start+length); `lo` owns the cells at x=line-1 and `hi`
    the cells at x=line. A horizontal segment (axis 'h') lies on y=line,
    spans x in [start, start+length); `lo` is below, `hi` above.
    """

    axis: str
    line: int
    start: int
    length: int
    lo: int
    hi: int

    def point_at(self, offset: float) -> tuple[float, float]:
        if self.axis == "v":
            return float(self.line), self.start + offset
        return self.start + offset, float(self.line)

    def midpoint(self) -> tuple[float, float]:
        return self.point_at(self.length / 2.0)

    def other(self, owner: int) -> int:
        return self.hi if self.lo == owner else self.lo


def _runs(xs, ys, lo, hi):
    """Group sorted faces into maximal runs; yields (x, y0, length, lo, hi).

    Faces must be sorted so that a run occupies consecutive indices with
    `ys` increasing by one.
    """
    n = xs.size
    if n == 0:
        return
    brk = np.ones(n, dtype=bool)
    brk[1:] = (
        (xs[1:] != xs[:-1])
        | (ys[1:] != ys[:-1] + 1)
        | (lo[1:] != lo[:-1])
        | (hi[1:] != hi[:-1])
    )
    starts = np.nonzero(brk)[0]
    ends = np.append(starts[1:], n)
    for s, e in zip(starts.tolist(), ends.tolist()):
        yield int(xs[s]), int(ys[s]), int(e - s), int(lo[s]), int(hi[s])


def shared_segments(canvas: np.ndarray, include_empty: bool = False):
    """All maximal boundary segments between distinct owners on the canvas.

    Returns dict mapping the unordered owner pair (a, b), a < b, to the list
    of BoundarySegments between them. Pairs involving EMPTY are skipped
    unless include_empty is set; the canvas border is never included.
    """
    h, w = canvas.shape
    out: dict[tuple[int, int], list[BoundarySegment]] = {}

    def _add(seg: BoundarySegment):
        key = (min(seg.lo, seg.hi), max(seg.lo, seg.hi))
        out.setdefault(key, []).append(seg)

    # vertical faces: between columns x-1 and x, run along y
    left, right = canvas[:, :-1], canvas[:, 1:]
    diff = left != right
    if not include_empty:
        diff &= (left != EMPTY) & (right != EMPTY)
    xi, yi = np.nonzero(diff.T)  # sorted by x then y
    lo, hi = left.T[xi, yi], right.T[xi, yi]
    for x, y0, length, lo_v, hi_v in _runs(xi, yi, lo, hi):
        _add(BoundarySegment("v", x + 1, y0, length, lo_v, hi_v))

    # horizontal faces: between rows y-1 and y, run along x
    below, above = canvas[:-1, :], canvas[1:, :]
    diff = below != above
    if not include_empty:
        diff &= (below != EMPTY) & (above != EMPTY)
    yi, xi = np.nonzero(diff)  # sorted by y then x
    lo, hi = below[yi, xi], above[yi, xi]
    for y, x0, length, lo_v, hi_v in _runs(yi, xi, lo, hi):
        _add(BoundarySegment("h", y + 1, x0, length, lo_v, hi_v))

    for segs in out.values():
        segs.sort(key=lambda s: (s.axis, s.line, s.start))
    return out


def boundary_segments(canvas: np.ndarray, owner: int) -> list[BoundarySegment]:
    """Maximal outline segments of one module, labelled with the neighbor
    across each (module, blank, EMPTY, or BORDER). Runs split where the
    neighbor changes, so each segment carries exactly one label.
    """
    if not (canvas == owner).any():
        raise ValueError(f"module {owner} is not placed")
    h, w = canvas.shape
    padded = np.full((h + 2, w + 2), BORDER, dtype=canvas.dtype)
    padded[1:-1, 1:-1] = canvas
    segs = []

    left, right = padded[:, :-1], padded[:, 1:]
    diff = (left == owner) ^ (right == owner)
    xi, yi = np.nonzero(diff.T)
    lo, hi = left.T[xi, yi], right.T[xi, yi]
    for x, y0, length, lo_v, hi_v in _runs(xi, yi, lo, hi):
        segs.append(BoundarySegment("v", x, y0 - 1, length, lo_v, hi_v))

    below, above = padded[:-1, :], padded[1:, :]
    diff = (below == owner) ^ (above == owner)
    yi, xi = np.nonzero(diff)
    lo, hi = below[yi, xi], above[yi, xi]
    for y, x0, length, lo_v, hi_v in _runs(yi, xi, lo, hi):
        segs.append(BoundarySegment("h", y, x0 - 1, length, lo_v, hi_v))

    segs.sort(key=lambda s: (s.axis, s.line, s.start))
    return segs


def adjacency_length(canvas: np.ndarray, i: int, j: int) -> int:
    """Total shared boundary length (unit faces) between modules i and j."""
    if i == j:
        return 0
    left, right = canvas[:, :-1], canvas[:, 1:]
    below, above = canvas[:-1, :], canvas[1:, :]
    n = np.count_nonzero(((left == i) & (right == j)) | ((left == j) & (right == i)))
    n += np.count_nonzero(((below == i) & (above == j)) | ((below == j) & (above == i)))
    return int(n)


def adjacent_pairs(canvas: np.ndarray) -> set[tuple[int, int]]:
    """All unordered owner pairs sharing at least one unit face."""
    pairs = set()
    mult = int(canvas.max()) + 2
    for a, b in ((canvas[:, :-1], canvas[:, 1:]), (canvas[:-1, :], canvas[1:, :])):
        diff = (a != b) & (a != EMPTY) & (b != EMPTY)
        av, bv = a[diff], b[diff]
        lo = np.minimum(av, bv).astype(np.int64)
        hi = np.maximum(av, bv).astype(np.int64)
        for k in np.unique(lo * mult + hi):
            pairs.add((int(k // mult), int(k % mult)))
    return pairs
