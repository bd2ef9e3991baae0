"""Incremental optimization: whitespace removal plus simulated annealing
over three local operators driven by the current feedthrough paths.

All operators work on state copies and return None for an inapplicable or
constraint-violating move, so the SA loop can treat every proposal as
accept/reject without undo logic. Accepted states always satisfy: zero
overlap, zero whitespace, 4-connected regions, AVR within threshold,
segment counts within limit, pre-placed regions untouched.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, metrics as metrics_mod
from .geometry import BLANK_BASE, EMPTY
from .model import FloorplanState, TwoPinNet
from .netlist import clear_blank_modules
from .pin_graph import AssignmentResult, MaskGraph, assign_all, astar_path

log = logging.getLogger(__name__)

# global cap on SA re-assignment work: roughly (levels * moves * two-pin nets)
EVAL_BUDGET = 1_200_000


@dataclass
class SAConfig:
    t_init: float = 100.0
    t_end: float = 0.01
    cooling: float = 0.9
    moves_per_temperature: int | None = None      # None: max(10, ft nets), budget-capped
    weights: tuple[float, float, float, float] = metrics_mod.DEFAULT_WEIGHTS
    avr_threshold: float = 0.05
    max_edge_segments: int = 20
    beam_k: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.cooling < 1.0):
            raise ValueError("cooling factor must be in (0, 1)")
        if self.t_end >= self.t_init:
            raise ValueError("t_end must be below t_init")

    def temperatures(self) -> list[float]:
        out = []
        t = self.t_init
        while t >= self.t_end:
            out.append(t)
            t *= self.cooling
        return out


@dataclass
class TemperatureRecord:
    temperature: float
    best_objective: float
    acceptance_rate: float
    moves: int


# --------------------------------------------------------------------------
# Whitespace removal
# --------------------------------------------------------------------------

def _grow_side(canvas: np.ndarray, mid: int, side: str) -> bool:
    """Extend the module's bounding rectangle by one grid line on `side`
    if every cell of that strip is Empty. Returns True on growth."""
    h, w = canvas.shape
    x0, y0, x1, y1 = geometry.region_bbox(canvas, mid)
    if side == "left" and x0 > 0:
        strip = canvas[y0:y1, x0 - 1]
    elif side == "right" and x1 < w:
        strip = canvas[y0:y1, x1]
    elif side == "down" and y0 > 0:
        strip = canvas[y0 - 1, x0:x1]
    elif side == "up" and y1 < h:
        strip = canvas[y1, x0:x1]
    else:
        return False
    if (strip != EMPTY).any():
        return False
    strip[:] = mid
    return True


def remove_whitespace(
    state: FloorplanState,
    assignment: AssignmentResult | None,
    u: int,
    beam_k: int,
    two_pin_nets: list[TwoPinNet],
    max_edge_segments: int = 20,
) -> FloorplanState:
    """Allocate every Empty cell to a real module.

    Phase 1 grows each module's bounding rectangle line by line into fully
    empty strips, visiting modules by unplaced-pin count (desc), then
    predefined area (desc), then id. Phase 2 merges each leftover Empty
    component into the adjacent non-preplaced module whose merge minimizes
    the re-assigned FTlen (ties: smaller id). Pre-placed modules neither
    grow nor absorb.
    """
    out = clear_blank_modules(state)
    if out.empty_count() == 0:
        return out
    unplaced = assignment.unplaced_per_module if assignment else {}
    order = sorted(
        (m for m in state.problem.modules if not m.preplaced),
        key=lambda m: (-unplaced.get(m.id, 0), -m.area, m.id),
    )
    for m in order:
        while True:
            grew = False
            for side in ("left", "down", "right", "up"):
                grew |= _grow_side(out.canvas, m.id, side)
            if not grew:
                break

    comps = geometry.connected_components(out.canvas, EMPTY)
    for cells in comps:
        xs = np.array([c[0] for c in cells])
        ys = np.array([c[1] for c in cells])
        cand = set()
        canvas = out.canvas
        h, w = canvas.shape
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx, ny = xs + dx, ys + dy
            ok = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
            owners = canvas[ny[ok], nx[ok]]
            cand.update(int(o) for o in owners if 0 <= o < BLANK_BASE)
        cand = sorted(
            c for c in cand if not state.problem.modules[c].preplaced
        )
        if not cand:
            # pocket walled in by pre-placed modules: nearest movable module
            centers = out.centers()
            cx, cy = float(xs.mean() + 0.5), float(ys.mean() + 0.5)
            movable = [
                m.id for m in state.problem.modules if not m.preplaced and m.id in centers
            ]
            chosen = min(
                movable,
                key=lambda i: (math.hypot(centers[i][0] - cx, centers[i][1] - cy), i),
            )
            log.warning(
                "whitespace pocket adjacent only to pre-placed modules; "
                "merged into nearest module %d", chosen,
            )
        elif len(cand) == 1:
            chosen = cand[0]
        else:
            scored = []
            for c in cand:
                trial = out.copy()
                trial.canvas[ys, xs] = c
                segs = geometry.outline_segment_count(trial.region_mask(c))
                ftlen = assign_all(trial, two_pin_nets, u, beam_k).ftlen
                scored.append((segs > max_edge_segments, ftlen, c))
            scored.sort()
            chosen = scored[0][2]
        out.canvas[ys, xs] = chosen
    assert out.empty_count() == 0
    return out


# --------------------------------------------------------------------------
# Operators
# --------------------------------------------------------------------------

def _pair_segments(canvas: np.ndarray, i: int, j: int) -> list[geometry.BoundarySegment]:
    """Shared boundary segments between i and j, computed on the union bbox."""
    mask = (canvas == i) | (canvas == j)
    if not mask.any():
        return []
    ys, xs = np.nonzero(mask)
    x0, x1 = int(xs.min()), int(xs.max()) + 1
    y0, y1 = int(ys.min()), int(ys.max()) + 1
    crop = canvas[y0:y1, x0:x1]
    key = (i, j) if i < j else (j, i)
    segs = []
    for seg in geometry.shared_segments(crop).get(key, []):
        if seg.axis == "v":
            segs.append(
                geometry.BoundarySegment("v", seg.line + x0, seg.start + y0, seg.length, seg.lo, seg.hi)
            )
        else:
            segs.append(
                geometry.BoundarySegment("h", seg.line + y0, seg.start + x0, seg.length, seg.lo, seg.hi)
            )
    return segs


def _regions_ok(state: FloorplanState, ids, max_edge_segments: int) -> bool:
    for mid in ids:
        mask = state.region_mask(mid)
        if not geometry.is_connected(mask):
            return False
        if geometry.outline_segment_count(mask) > max_edge_segments:
            return False
    return True


def op_random_exchange(
    state: FloorplanState, i: int, j: int, avr_threshold: float = 0.05
) -> FloorplanState | None:
    """Operator 1: swap the two modules' occupied regions wholesale.

    Valid only if both modules' area variation stays within threshold after
    inheriting each other's cell count.
    """
    if i == j:
        return None
    mods = state.problem.modules
    if mods[i].preplaced or mods[j].preplaced:
        return None
    mask_i = state.region_mask(i)
    mask_j = state.region_mask(j)
    if not mask_i.any() or not mask_j.any():
        return None
    new_area_i = int(mask_j.sum())
    new_area_j = int(mask_i.sum())
    if (mods[i].area - new_area_i) / mods[i].area > avr_threshold:
        return None
    if (mods[j].area - new_area_j) / mods[j].area > avr_threshold:
        return None
    out = state.copy()
    out.canvas[mask_i] = j
    out.canvas[mask_j] = i
    return out


def op_adjacent_exchange(
    state: FloorplanState, i: int, j: int, max_edge_segments: int = 20
) -> FloorplanState | None:
    """Operator 2: swap two adjacent modules, then rebalance whole boundary
    slices from the now-larger to the now-smaller module until both recover
    their pre-swap areas exactly."""
    if i == j:
        return None
    mods = state.problem.modules
    if mods[i].preplaced or mods[j].preplaced:
        return None
    mask_i = state.region_mask(i)
    mask_j = state.region_mask(j)
    if not mask_i.any() or not mask_j.any():
        return None
    if geometry.adjacency_length(state.canvas, i, j) == 0:
        return None
    area_i = int(mask_i.sum())
    area_j = int(mask_j.sum())

    out = state.copy()
    out.canvas[mask_i] = j
    out.canvas[mask_j] = i

    need = abs(area_j - area_i)
    if need:
        donor, recip = (i, j) if area_j > area_i else (j, i)
        while need > 0:
            segs = _pair_segments(out.canvas, donor, recip)
            moved = False
            for seg in sorted(segs, key=lambda s: (s.axis, s.line, s.start)):
                if seg.length > need:
                    continue
                # whole donor-side slice across this segment
                if seg.axis == "v":
                    x = seg.line if seg.hi == donor else seg.line - 1
                    sl = out.canvas[seg.start : seg.start + seg.length, x]
                else:
                    y = seg.line if seg.hi == donor else seg.line - 1
                    sl = out.canvas[y, seg.start : seg.start + seg.length]
                assert (sl == donor).all()
                sl[:] = recip
                need -= seg.length
                moved = True
                break
            if not moved:
                return None    # cannot restore areas with whole slices only
    assert out.area(i) == area_i and out.area(j) == area_j
    if not _regions_ok(out, (i, j), max_edge_segments):
        return None
    return out


def op_p2p_enhance(
    state: FloorplanState,
    i: int,
    j: int,
    rng: np.random.Generator,
    max_edge_segments: int = 20,
) -> FloorplanState | None:
    """Operator 3: lengthen the shared boundary by slotting it.

    The middle third of the longest straight shared segment is displaced
    perpendicular by its own length into one module (direction picked by
    rng); the adjacent third is displaced the same depth into the other
    module, which restores both areas exactly. Each participant gains four
    outline segments. See docs/geometry.md.
    """
    if i == j:
        return None
    mods = state.problem.modules
    if mods[i].preplaced or mods[j].preplaced:
        return None
    segs = _pair_segments(state.canvas, i, j)
    if not segs:
        return None
    seg = max(segs, key=lambda s: (s.length, s.axis, -s.line, -s.start))
    if seg.length < 3:
        return None
    t = seg.length // 3
    into_lo = bool(rng.integers(0, 2))  # which module the notch digs into

    h, w = state.canvas.shape
    m1 = seg.start + t            # middle third [m1, m1+t)
    for bump_start in (seg.start + 2 * t, seg.start):  # prefer the third after
        out = state.copy()
        cv = out.canvas
        if seg.axis == "v":
            x = seg.line
            if into_lo:
                notch = cv[m1 : m1 + t, x - t : x] if x - t >= 0 else None
                bump = cv[bump_start : bump_start + t, x : x + t] if x + t <= w else None
                n_from, b_from = seg.lo, seg.hi
            else:
                notch = cv[m1 : m1 + t, x : x + t] if x + t <= w else None
                bump = cv[bump_start : bump_start + t, x - t : x] if x - t >= 0 else None
                n_from, b_from = seg.hi, seg.lo
        else:
            y = seg.line
            if into_lo:
                notch = cv[y - t : y, m1 : m1 + t] if y - t >= 0 else None
                bump = cv[y : y + t, bump_start : bump_start + t] if y + t <= h else None
                n_from, b_from = seg.lo, seg.hi
            else:
                notch = cv[y : y + t, m1 : m1 + t] if y + t <= h else None
                bump = cv[y - t : y, bump_start : bump_start + t] if y - t >= 0 else None
                n_from, b_from = seg.hi, seg.lo
        if notch is None or bump is None:
            continue
        if not (notch == n_from).all() or not (bump == b_from).all():
            continue
        notch[:] = b_from
        bump[:] = n_from
        if not _regions_ok(out, (i, j), max_edge_segments):
            continue
        assert out.area(i) == state.area(i) and out.area(j) == state.area(j)
        return out
    return None


# --------------------------------------------------------------------------
# Simulated annealing
# --------------------------------------------------------------------------

def _evaluate(
    state: FloorplanState,
    two_pin_nets: list[TwoPinNet],
    u: int,
    cfg: SAConfig,
) -> tuple[AssignmentResult, metrics_mod.LayoutMetrics, float]:
    assign = assign_all(state, two_pin_nets, u, cfg.beam_k)
    m = metrics_mod.LayoutMetrics(
        hpwl=metrics_mod.hpwl(state),
        ftlen=assign.ftlen,
        ftnum=assign.ftnum,
        unplaced=assign.unplaced,
        hpwl_pins=assign.hpwl_pins,
    )
    return assign, m, metrics_mod.objective(m, cfg.weights)


def _neighbor_toward(
    state: FloorplanState, anchor: int, goal: int
) -> int | None:
    """Among modules adjacent to `anchor`, the one whose center is nearest
    to `goal`'s center (excluding goal itself and pre-placed modules)."""
    centers = state.centers()
    gx, gy = centers[goal]
    best = None
    for a, b in geometry.adjacent_pairs(state.canvas):
        if anchor not in (a, b):
            continue
        other = b if a == anchor else a
        if other == goal or other >= BLANK_BASE:
            continue
        if state.problem.modules[other].preplaced:
            continue
        ox, oy = centers[other]
        key = (math.hypot(ox - gx, oy - gy), other)
        if best is None or key < best[0]:
            best = (key, other)
    return best[1] if best else None


def _op3_gains_capacity(state: FloorplanState, a: int, b: int, u: int) -> bool:
    """True iff slotting the pair's longest straight segment would raise its
    slot count. The notch turns one length-L run into four t-length pieces
    plus one 2t piece (t = L//3); per-segment flooring can make that a net
    loss when t < u."""
    segs = _pair_segments(state.canvas, a, b)
    if not segs:
        return False
    length = max(s.length for s in segs)
    if length < 3:
        return False
    t = length // 3
    return 4 * (t // u) + (2 * t) // u > length // u


def _widen_route(
    state: FloorplanState,
    assignment: AssignmentResult,
    src: int,
    dst: int,
    rng: np.random.Generator,
    cfg: SAConfig,
    u: int,
) -> FloorplanState | None:
    """Route src->dst on the capacity-free adjacency graph and apply
    Operator 3 to every exhausted edge along that route (one compound
    proposal), so an unroutable net gains all the boundary capacity it is
    missing at once."""
    centers = state.centers()
    adj: dict[int, list[tuple[int, float]]] = {}
    for a, b in geometry.adjacent_pairs(state.canvas):
        if a >= BLANK_BASE or b >= BLANK_BASE:
            continue
        w = math.hypot(centers[a][0] - centers[b][0], centers[a][1] - centers[b][1])
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
    for lst in adj.values():
        lst.sort(key=lambda t: t[0])
    route = astar_path(MaskGraph(centers, adj), src, dst)
    if route is None:
        return None
    blocked = [
        (a, b)
        for a, b in zip(route[:-1], route[1:])
        if assignment.graph.capacity(a, b) == 0
    ]
    if not blocked:
        return None
    # compound proposal: the route only opens if every blocked edge gains
    # capacity, so partial widenings are not worth an evaluation
    out = state
    for a, b in blocked:
        if not _op3_gains_capacity(out, a, b, u):
            return None
        nxt = op_p2p_enhance(out, a, b, rng, cfg.max_edge_segments)
        if nxt is None:
            return None
        out = nxt
    return out


def _propose(
    state: FloorplanState,
    assignment: AssignmentResult,
    path: tuple[int, ...],
    rng: np.random.Generator,
    cfg: SAConfig,
    u: int,
) -> FloorplanState | None:
    """One move aimed at a feedthrough path or an unplaced net's endpoint
    pair: pull the endpoints together with Operators 1/2 while they are
    apart, add boundary capacity with Operator 3 once they touch (or, for
    unroutable nets, along their unconstrained route)."""
    src, dst = path[0], path[-1]
    if geometry.adjacency_length(state.canvas, src, dst) > 0:
        if not _op3_gains_capacity(state, src, dst, u):
            return None
        return op_p2p_enhance(state, src, dst, rng, cfg.max_edge_segments)
    if len(path) > 2:
        choice = int(rng.integers(0, 4))
        if choice == 0:
            return op_adjacent_exchange(state, src, path[1], cfg.max_edge_segments)
        if choice == 1:
            return op_adjacent_exchange(state, dst, path[-2], cfg.max_edge_segments)
        if choice == 2:
            return op_random_exchange(state, src, path[-2], cfg.avr_threshold)
        return op_random_exchange(state, dst, path[1], cfg.avr_threshold)
    # unplaced net: either widen the saturated edges along its free route,
    # or steer an endpoint through its neighborhood
    choice = int(rng.integers(0, 4))
    if choice in (0, 1):
        return _widen_route(state, assignment, src, dst, rng, cfg, u)
    if bool(rng.integers(0, 2)):
        src, dst = dst, src
    step = _neighbor_toward(state, src, dst)
    if step is None:
        return None
    if choice == 2:
        return op_adjacent_exchange(state, src, step, cfg.max_edge_segments)
    return op_random_exchange(state, dst, step, cfg.avr_threshold)


def moves_per_level(cfg: SAConfig, ft_count: int, two_pin_count: int) -> int:
    if cfg.moves_per_temperature is not None:
        return cfg.moves_per_temperature
    levels = len(cfg.temperatures())
    cap = max(2, EVAL_BUDGET // (levels * max(1, two_pin_count)))
    return min(max(10, ft_count), cap)


def _target_pool(
    assignment: AssignmentResult, by_id: dict[int, TwoPinNet]
) -> list[tuple[int, ...]]:
    """Round-robin move targets: feedthrough paths, plus unplaced nets as
    degenerate (src, dst) pairs so capacity gets created where they need it."""
    pool: list[tuple[int, ...]] = [p for _, p in assignment.paths]
    for o in assignment.outcomes:
        if o.kind == "unplaced":
            n = by_id[o.net_id]
            pool.append((n.src, n.dst))
    return pool


def sa_optimize(
    state: FloorplanState,
    assignment: AssignmentResult,
    two_pin_nets: list[TwoPinNet],
    u: int,
    cfg: SAConfig,
) -> tuple[FloorplanState, AssignmentResult, metrics_mod.LayoutMetrics, list[TemperatureRecord]]:
    """Metropolis refinement returning the best-seen state, its assignment
    and metrics, plus one progress record per temperature level."""
    cur_assign, cur_m, cur_obj = (
        assignment,
        metrics_mod.LayoutMetrics(
            hpwl=metrics_mod.hpwl(state),
            ftlen=assignment.ftlen,
            ftnum=assignment.ftnum,
            unplaced=assignment.unplaced,
            hpwl_pins=assignment.hpwl_pins,
        ),
        0.0,
    )
    cur_obj = metrics_mod.objective(cur_m, cfg.weights)
    cur_state = state
    best = (cur_obj, cur_state, cur_assign, cur_m)
    by_id = {n.id: n for n in two_pin_nets}
    pool = _target_pool(cur_assign, by_id)
    if not pool:
        log.info("sa_optimize: no feedthrough paths; nothing to do")
        return cur_state, cur_assign, cur_m, []

    rng = np.random.default_rng(cfg.seed)
    temps = cfg.temperatures()
    moves = moves_per_level(cfg, len(pool), len(two_pin_nets))
    log.info(
        "sa_optimize: %d levels x %d moves (targets: %d ft + %d unplaced)",
        len(temps), moves, len(cur_assign.paths), len(pool) - len(cur_assign.paths),
    )
    records: list[TemperatureRecord] = []
    rr = 0
    n_infeasible = n_evals = n_accepted = 0
    for t in temps:
        attempted = accepted = 0
        for _ in range(moves):
            if not pool:
                break
            path = pool[rr % len(pool)]
            rr += 1
            attempted += 1
            cand = _propose(cur_state, cur_assign, path, rng, cfg)
            if cand is None:
                n_infeasible += 1
                continue
            cand_assign, cand_m, cand_obj = _evaluate(cand, two_pin_nets, u, cfg)
            n_evals += 1
            delta = cand_obj - cur_obj
            if delta <= 0 or rng.random() < math.exp(-delta / t):
                cur_state, cur_assign, cur_m, cur_obj = cand, cand_assign, cand_m, cand_obj
                pool = _target_pool(cur_assign, by_id)
                accepted += 1
                if cur_obj < best[0]:
                    best = (cur_obj, cur_state, cur_assign, cur_m)
        n_accepted += accepted
        records.append(
            TemperatureRecord(t, best[0], accepted / attempted if attempted else 0.0, attempted)
        )
    log.info(
        "sa_optimize: %d evals (%d infeasible proposals), %d accepted; "
        "best objective %.1f (unplaced %d)",
        n_evals, n_infeasible, n_accepted, best[0], best[3].unplaced,
    )
    return best[1], best[2], best[3], records
