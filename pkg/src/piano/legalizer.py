"""Sequential grid legalization guided by wiremask and position-mask.

Modules are (re)placed in descending predefined-area order. For each one,
the position-mask marks every bottom-left anchor where its footprint fits
without overlap, and the wiremask gives the exact HPWL increase of placing
its center accordingly. The anchor minimizing (HPWL increase, squared
distance from the original anchor, row-major index) wins.
"""

import logging
import math

import numpy as np

from . import geometry
from .geometry import EMPTY
from .model import (
    FloorplanState,
    GridProblem,
    LegalizationError,
    ModuleRecord,
)

log = logging.getLogger(__name__)


def soft_footprint(
    area: int, aspect_lo: float, aspect_hi: float, max_w: int, max_h: int
) -> tuple[int, int]:
    """Smallest integer rectangle with w*h >= area and w/h within bounds.

    Ties in wasted area break toward aspect ratio 1, then smaller width.
    """
    best = None
    for w in range(1, max_w + 1):
        h = max(math.ceil(area / w), math.ceil(w / aspect_hi))
        h_cap = math.floor(w / aspect_lo) if aspect_lo > 0 else max_h
        if h > h_cap or h > max_h:
            continue
        key = (w * h - area, abs(w / h - 1.0), w)
        if best is None or key < best[0]:
            best = (key, (w, h))
    if best is None:
        raise LegalizationError(
            f"no integer rectangle with area >= {area} fits aspect "
            f"[{aspect_lo}, {aspect_hi}] inside {max_w}x{max_h}"
        )
    return best[1]


def module_footprint(m: ModuleRecord, max_w: int, max_h: int) -> tuple[int, int]:
    """Hard blocks keep their scaled dims; soft blocks get the best rectangle."""
    if not m.soft:
        return m.footprint
    return soft_footprint(m.area, m.aspect_lo, m.aspect_hi, max_w, max_h)


def compute_position_mask(occupied: np.ndarray, footprint: tuple[int, int]) -> np.ndarray:
    """Boolean (H, W) matrix: anchor (x, y) True iff the w x h footprint
    placed with bottom-left there stays in-canvas and overlaps nothing."""
    h_c, w_c = occupied.shape
    w, h = footprint
    feasible = np.zeros((h_c, w_c), dtype=bool)
    if w > w_c or h > h_c:
        return feasible
    s = np.zeros((h_c + 1, w_c + 1), dtype=np.int64)
    np.cumsum(np.cumsum(occupied, axis=0), axis=1, out=s[1:, 1:])
    window = s[h:, w:] - s[:-h, w:] - s[h:, :-w] + s[:-h, :-w]
    feasible[: h_c - h + 1, : w_c - w + 1] = window == 0
    return feasible


def compute_wiremask(
    problem: GridProblem,
    centers: dict[int, tuple[float, float]],
    module_id: int,
    footprint: tuple[int, int],
) -> np.ndarray:
    """Exact HPWL increment of anchoring `module_id` at each grid position.

    Only already-placed partners (present in `centers`) and terminals count;
    a net whose other endpoints are all unplaced contributes nothing. The
    per-net increment is separable per axis, so the mask is a row vector
    plus a column vector.
    """
    w_c, h_c = problem.width, problem.height
    w, h = footprint
    cx = np.arange(w_c, dtype=np.float64) + w / 2.0
    cy = np.arange(h_c, dtype=np.float64) + h / 2.0
    sx = np.zeros(w_c)
    sy = np.zeros(h_c)
    for net in problem.nets:
        if module_id not in net.modules:
            continue
        xs: list[float] = []
        ys: list[float] = []
        for mid in net.modules:
            if mid != module_id and mid in centers:
                px, py = centers[mid]
                xs.append(px)
                ys.append(py)
        for ti in net.terminals:
            xs.append(problem.terminals[ti].x)
            ys.append(problem.terminals[ti].y)
        if not xs:
            continue
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        sx += np.maximum(0.0, xlo - cx) + np.maximum(0.0, cx - xhi)
        sy += np.maximum(0.0, ylo - cy) + np.maximum(0.0, cy - yhi)
    return sy[:, None] + sx[None, :]


def _select_anchor(
    wire: np.ndarray, feasible: np.ndarray, origin: tuple[int, int]
) -> tuple[int, int] | None:
    """Lexicographic argmin over feasible anchors:
    (wiremask cost, squared distance from origin, row-major index)."""
    if not feasible.any():
        return None
    h_c, w_c = feasible.shape
    cand = feasible.copy()
    best_wire = wire[cand].min()
    cand &= wire == best_wire
    xs = np.arange(w_c) - origin[0]
    ys = np.arange(h_c) - origin[1]
    d2 = (ys * ys)[:, None] + (xs * xs)[None, :]
    best_d = d2[cand].min()
    cand &= d2 == best_d
    idx = int(np.argmax(cand))  # first True in row-major order
    return idx % w_c, idx // w_c


def legalize(state: FloorplanState) -> FloorplanState:
    """Produce an overlap-free floorplan; no-op if the input is already legal.

    Pre-placed modules must already sit on the canvas and are never moved.
    """
    if not state.needs_legalization:
        log.info("legalization skipped: input layout is already legal")
        return state
    problem = state.problem
    h_c, w_c = problem.height, problem.width

    pending = [m for m in problem.modules if not m.preplaced]
    fixed_cells = int(np.count_nonzero(state.canvas != EMPTY))
    demand = fixed_cells + sum(m.footprint[0] * m.footprint[1] for m in pending)
    if demand > w_c * h_c:
        raise LegalizationError(
            f"cannot legalize: insufficient area ({demand} cells needed, "
            f"{w_c * h_c} available)"
        )

    out = state.copy()
    out.needs_legalization = False
    # centers of pre-placed modules participate in every wiremask
    centers: dict[int, tuple[float, float]] = {}
    for m in problem.modules:
        if m.preplaced and out.placed(m.id):
            centers[m.id] = geometry.region_center(out.region_mask(m.id))

    pending.sort(key=lambda m: (-m.area, m.id))
    for m in pending:
        out.clear_owner(m.id)
        occupied = out.canvas != EMPTY
        feasible = compute_position_mask(occupied, m.footprint)
        wire = compute_wiremask(problem, centers, m.id, m.footprint)
        anchor = _select_anchor(wire, feasible, out.anchors.get(m.id, (0, 0)))
        if anchor is None:
            raise LegalizationError(
                f"cannot legalize: no feasible position for module {m.name} "
                f"({m.footprint[0]}x{m.footprint[1]})"
            )
        x, y = anchor
        out.place_rect(m.id, x, y, m.footprint[0], m.footprint[1])
        centers[m.id] = (x + m.footprint[0] / 2.0, y + m.footprint[1] / 2.0)
    return out


def random_initial(
    problem: GridProblem,
    trials: int,
    seed: int,
    base_state: FloorplanState | None = None,
) -> FloorplanState:
    """Best-of-N random floorplans, each repaired by `legalize`, by HPWL.

    The RNG stream is shared across trials so a larger `trials` value only
    extends the candidate set (best-of-n is monotone in n for a fixed seed).
    """
    from .metrics import hpwl  # local import to avoid a cycle

    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    best: tuple[float, FloorplanState] | None = None
    failures = 0
    for _ in range(trials):
        st = base_state.copy() if base_state is not None else FloorplanState.empty(problem)
        st.needs_legalization = True
        for m in problem.modules:
            if m.preplaced:
                continue
            w, h = m.footprint
            x = int(rng.integers(0, problem.width - w + 1))
            y = int(rng.integers(0, problem.height - h + 1))
            st.anchors[m.id] = (x, y)
        try:
            legal = legalize(st)
        except LegalizationError as e:
            failures += 1
            log.debug("random trial failed legalization: %s", e)
            continue
        score = hpwl(legal)
        if best is None or score < best[0]:
            best = (score, legal)
    if best is None:
        raise LegalizationError(
            f"all {trials} random initial floorplans failed legalization"
        )
    if failures:
        log.info("random_initial: %d/%d trials failed legalization", failures, trials)
    return best[1]
