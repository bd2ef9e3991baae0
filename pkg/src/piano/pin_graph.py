"""Graph-based pin assignment.

Builds the boundary-capacity resource graph over modules (real and blank),
routes every two-pin net with A* over the positive-capacity distance view,
picks physical pin chains with beam search, and aggregates the feedthrough
and unplaced-pin metrics.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field

from . import geometry
from .model import FloorplanState, GridProblem, PianoError, TwoPinNet

log = logging.getLogger(__name__)


class StalePathError(PianoError):
    """A chosen path crosses an edge whose capacity has been exhausted."""


@dataclass
class EdgeState:
    """Pin slots on the shared boundary of one module pair.

    Slots sit at the midpoints of consecutive u-length intervals, anchored
    at each segment's lexicographically smaller end, so same-segment slots
    are exactly u apart.
    """

    slots: list[tuple[float, float]]
    used: list[bool]
    free: int
    length: int                       # pooled shared length (AvailEdge)
    centroid: tuple[float, float]     # length-weighted midpoint of the boundary

    def free_indices(self) -> list[int]:
        return [i for i, u in enumerate(self.used) if not u]

    def take(self, idx: int) -> tuple[float, float]:
        if self.used[idx]:
            raise StalePathError(f"slot {idx} already consumed")
        self.used[idx] = True
        self.free -= 1
        return self.slots[idx]


@dataclass
class ResourceGraph:
    nodes: list[int]
    edges: dict[tuple[int, int], EdgeState]
    adjacent: set[tuple[int, int]]    # all geometric adjacencies, even slotless
    spacing: int

    def edge(self, a: int, b: int) -> EdgeState | None:
        return self.edges.get((a, b) if a < b else (b, a))

    def capacity(self, a: int, b: int) -> int:
        e = self.edge(a, b)
        return e.free if e else 0


def pin_space(problem: GridProblem, two_pin_nets: list[TwoPinNet]) -> int:
    """PinSpace u: mean module footprint perimeter over mean incident
    two-pin-net count, rounded, floored at one cell."""
    mods = problem.modules
    if not mods:
        return 1
    mean_perim = sum(2 * (m.footprint[0] + m.footprint[1]) for m in mods) / len(mods)
    counts = {m.id: 0 for m in mods}
    for net in two_pin_nets:
        counts[net.src] += 1
        counts[net.dst] += 1
    mean_cnt = sum(counts.values()) / len(mods)
    if mean_cnt == 0:
        log.warning("pin_space: no two-pin nets; defaulting spacing to 1")
        return 1
    return max(1, int(mean_perim / mean_cnt + 0.5))


def build_resource_graph(state: FloorplanState, u: int) -> ResourceGraph:
    """One node per canvas owner, one edge per adjacent pair with >= 1 slot."""
    segs = geometry.shared_segments(state.canvas)
    edges: dict[tuple[int, int], EdgeState] = {}
    for pair, seglist in segs.items():
        slots: list[tuple[float, float]] = []
        total = 0
        wx = wy = 0.0
        for seg in seglist:
            total += seg.length
            mx, my = seg.midpoint()
            wx += mx * seg.length
            wy += my * seg.length
            for t in range(seg.length // u):
                slots.append(seg.point_at(u * (t + 0.5)))
        if slots:
            edges[pair] = EdgeState(
                slots, [False] * len(slots), len(slots), total, (wx / total, wy / total)
            )
    ids = geometry.owner_areas(state.canvas).keys()
    return ResourceGraph(sorted(ids), edges, set(segs.keys()), u)


# --------------------------------------------------------------------------
# Routing view + A*
# --------------------------------------------------------------------------

@dataclass
class MaskGraph:
    """Distance-weighted view of the resource graph, positive capacity only."""

    centers: dict[int, tuple[float, float]]
    adj: dict[int, list[tuple[int, float]]] = field(default_factory=dict)

    def has(self, node: int) -> bool:
        return node in self.centers

    def neighbors(self, node: int):
        return self.adj.get(node, ())


class _LiveMaskView:
    """Mask-graph semantics evaluated against live edge capacities, so the
    per-net rebuild in the assignment loop is just a filter."""

    def __init__(self, g: ResourceGraph, centers: dict[int, tuple[float, float]]):
        self.centers = centers
        self._g = g
        adj: dict[int, list[tuple[int, float, EdgeState]]] = {n: [] for n in g.nodes}
        for (a, b), e in g.edges.items():
            ax, ay = centers[a]
            bx, by = centers[b]
            w = math.hypot(ax - bx, ay - by)
            adj[a].append((b, w, e))
            adj[b].append((a, w, e))
        for lst in adj.values():
            lst.sort(key=lambda t: t[0])
        self._adj = adj

    def has(self, node: int) -> bool:
        return node in self.centers

    def neighbors(self, node: int):
        for nbr, w, e in self._adj.get(node, ()):
            if e.free > 0:
                yield nbr, w


def build_mask_graph(g: ResourceGraph, state: FloorplanState) -> MaskGraph:
    """Static snapshot of the positive-capacity, center-distance view."""
    centers = state.centers()
    mg = MaskGraph(centers, {n: [] for n in g.nodes})
    for (a, b), e in g.edges.items():
        if e.free <= 0:
            continue
        ax, ay = centers[a]
        bx, by = centers[b]
        w = math.hypot(ax - bx, ay - by)
        mg.adj[a].append((b, w))
        mg.adj[b].append((a, w))
    for lst in mg.adj.values():
        lst.sort(key=lambda t: t[0])
    return mg


def astar_path(graph, src: int, dst: int) -> list[int] | None:
    """Shortest path by summed center distances; straight-line heuristic.

    Ties break toward fewer hops, then the lexicographically smallest node
    sequence; both are encoded in the heap key, and the heuristic is
    consistent, so the first goal pop is exact.
    """
    if not graph.has(src) or not graph.has(dst):
        raise KeyError(f"unknown node id in ({src}, {dst})")
    if src == dst:
        raise ValueError("src and dst must differ")
    dx, dy = graph.centers[dst]

    def h(n: int) -> float:
        px, py = graph.centers[n]
        return math.hypot(px - dx, py - dy)

    heap = [(h(src), 0, (src,), 0.0)]
    closed: set[int] = set()
    while heap:
        _, hops, path, g_cost = heapq.heappop(heap)
        node = path[-1]
        if node == dst:
            return list(path)
        if node in closed:
            continue
        closed.add(node)
        for nbr, w in graph.neighbors(node):
            if nbr in closed:
                continue
            ng = g_cost + w
            heapq.heappush(heap, (ng + h(nbr), hops + 1, path + (nbr,), ng))
    return None


# --------------------------------------------------------------------------
# Pin chains
# --------------------------------------------------------------------------

@dataclass
class PinChain:
    points: list[tuple[float, float]]      # one pin per consecutive pair
    slot_indices: list[int]
    physical_length: float                 # src center -> pins -> dst center


def beam_assign(
    path: list[int],
    g: ResourceGraph,
    k: int,
    centers: dict[int, tuple[float, float]],
) -> PinChain:
    """Choose one free slot per consecutive pair along `path`, minimizing the
    physical polyline length within a top-k beam, and consume the slots.

    Starts from the signal-generating end (path[0]). Raises StalePathError
    if any pair has no free capacity; the caller must re-run A* then.
    """
    if len(path) < 3:
        raise ValueError("beam_assign needs a path with at least one intermediate")
    if k < 1:
        raise ValueError("beam width must be >= 1")
    pairs = list(zip(path[:-1], path[1:]))
    edges: list[EdgeState] = []
    for a, b in pairs:
        e = g.edge(a, b)
        if e is None or e.free < 1:
            raise StalePathError(f"stale path: no capacity between {a} and {b}")
        edges.append(e)

    src_pt = centers[path[0]]
    dst_pt = centers[path[-1]]
    # beam entries: (length, slot index tuple, last point)
    beam: list[tuple[float, tuple[int, ...], tuple[float, float]]] = [(0.0, (), src_pt)]
    for e in edges:
        options = e.free_indices()
        grown = [
            (length + math.hypot(px - sx, py - sy), idxs + (i,), (sx, sy))
            for (length, idxs, (px, py)) in beam
            for i in options
            for (sx, sy) in (e.slots[i],)
        ]
        grown.sort(key=lambda t: (t[0], t[1]))
        beam = grown[:k]

    final = min(
        (
            (length + math.hypot(px - dst_pt[0], py - dst_pt[1]), idxs)
            for (length, idxs, (px, py)) in beam
        ),
        key=lambda t: (t[0], t[1]),
    )
    total, chosen = final
    points = [edges[i].take(idx) for i, idx in enumerate(chosen)]
    return PinChain(points, list(chosen), total)


# --------------------------------------------------------------------------
# Full assignment pass
# --------------------------------------------------------------------------

@dataclass
class NetOutcome:
    net_id: int
    kind: str                              # direct | feedthrough | unplaced
    path: tuple[int, ...] = ()
    ft_len: float = 0.0
    ft_num: int = 0


@dataclass
class AssignmentResult:
    outcomes: list[NetOutcome]
    ftlen: float
    ftnum: float
    unplaced: int
    direct_count: int
    feedthrough_count: int
    unplaced_per_module: dict[int, int]
    pins: list[tuple[int, int, float, float]]   # (net, module, x, y)
    paths: list[tuple[int, tuple[int, ...]]]    # feedthrough nets only
    hpwl_pins: float
    graph: ResourceGraph
    spacing: int


def assign_all(
    state: FloorplanState, two_pin_nets: list[TwoPinNet], u: int, k: int
) -> AssignmentResult:
    """Assign pins for every two-pin net in three passes.

    1) nets with geometrically adjacent endpoints and free capacity on their
       shared edge get a direct pin; 2) adjacent nets that missed out go
    through A* + beam feedthrough; 3) non-adjacent nets likewise. Within a
    pass, nets run in ascending id. ft_len sums center distances along the
    module path; an unroutable net counts as an unplaced pin.
    """
    centers = state.centers()
    g = build_resource_graph(state, u)
    view = _LiveMaskView(g, centers)

    nets = sorted(two_pin_nets, key=lambda n: n.id)
    adjacent_nets = []
    far_nets = []
    for n in nets:
        key = (n.src, n.dst) if n.src < n.dst else (n.dst, n.src)
        (adjacent_nets if key in g.adjacent else far_nets).append(n)

    outcomes: list[NetOutcome] = []
    pins: list[tuple[int, int, float, float]] = []
    unplaced_per_module: dict[int, int] = {}
    hpwl_pins = 0.0
    deferred: list[TwoPinNet] = []

    def _dist(p, q):
        return math.hypot(p[0] - q[0], p[1] - q[1])

    # pass 1: direct assignment on adjacent edges with free capacity
    for n in adjacent_nets:
        e = g.edge(n.src, n.dst)
        if e is None or e.free < 1:
            deferred.append(n)
            continue
        free = e.free_indices()
        cx, cy = e.centroid
        idx = min(free, key=lambda i: (_dist(e.slots[i], (cx, cy)), i))
        px, py = e.take(idx)
        outcomes.append(NetOutcome(n.id, "direct", (n.src, n.dst)))
        pins.append((n.id, n.src, px, py))
        pins.append((n.id, n.dst, px, py))

    # passes 2 and 3: feedthrough routing
    for group in (deferred, far_nets):
        for n in group:
            path = astar_path(view, n.src, n.dst)
            if path is None:
                outcomes.append(NetOutcome(n.id, "unplaced"))
                unplaced_per_module[n.src] = unplaced_per_module.get(n.src, 0) + 1
                unplaced_per_module[n.dst] = unplaced_per_module.get(n.dst, 0) + 1
                continue
            chain = beam_assign(path, g, k, centers)
            ft_len = sum(
                _dist(centers[a], centers[b]) for a, b in zip(path[:-1], path[1:])
            )
            outcomes.append(
                NetOutcome(n.id, "feedthrough", tuple(path), ft_len, len(path) - 2)
            )
            for (a, b), pt in zip(zip(path[:-1], path[1:]), chain.points):
                pins.append((n.id, a, pt[0], pt[1]))
                pins.append((n.id, b, pt[0], pt[1]))
            xs = [p[0] for p in chain.points]
            ys = [p[1] for p in chain.points]
            hpwl_pins += (max(xs) - min(xs)) + (max(ys) - min(ys))

    outcomes.sort(key=lambda o: o.net_id)
    ft = [o for o in outcomes if o.kind == "feedthrough"]
    n_unplaced = sum(1 for o in outcomes if o.kind == "unplaced")
    return AssignmentResult(
        outcomes=outcomes,
        ftlen=sum(o.ft_len for o in ft) / len(ft) if ft else 0.0,
        ftnum=sum(o.ft_num for o in ft) / len(ft) if ft else 0.0,
        unplaced=n_unplaced,
        direct_count=sum(1 for o in outcomes if o.kind == "direct"),
        feedthrough_count=len(ft),
        unplaced_per_module=unplaced_per_module,
        pins=pins,
        paths=[(o.net_id, o.path) for o in ft],
        hpwl_pins=hpwl_pins,
        graph=g,
        spacing=u,
    )
