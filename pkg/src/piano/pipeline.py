"""Pipeline orchestration: scaling, the three stages, and run products.

plan:     random initial floorplans -> legalize -> pin assignment ->
          whitespace removal -> simulated annealing.
refine:   same from a provided layout (legalizing only if needed), with
          optional pre-placed module marking.
evaluate: pin assignment and metrics only; geometry untouched except blank
          registration.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry, metrics as metrics_mod
from .legalizer import legalize, random_initial, soft_footprint
from .model import (
    FloorplanState,
    GridProblem,
    LayoutError,
    ModuleRecord,
    NetRecord,
    PianoError,
    ProblemInstance,
    Terminal,
    TwoPinNet,
)
from .netlist import decompose_nets, register_blank_modules
from .optimizer import SAConfig, TemperatureRecord, remove_whitespace, sa_optimize
from .pin_graph import AssignmentResult, assign_all, pin_space

log = logging.getLogger(__name__)

# fraction of the canvas budgeted for predefined module area; the rest is
# legalization slack that whitespace removal later hands back to modules
AREA_UTILIZATION = 0.70


@dataclass
class RunConfig:
    grid: int = 224
    seed: int = 0
    trials: int = 8
    pinspace: int | None = None
    avr: float = 0.05
    max_segments: int = 20
    beam_k: int = 5
    t_init: float = 100.0
    t_end: float = 0.01
    cooling: float = 0.9
    weights: tuple[float, float, float, float] = metrics_mod.DEFAULT_WEIGHTS
    moves_per_temp: int | None = None

    def sa_config(self) -> SAConfig:
        return SAConfig(
            t_init=self.t_init,
            t_end=self.t_end,
            cooling=self.cooling,
            moves_per_temperature=self.moves_per_temp,
            weights=self.weights,
            avr_threshold=self.avr,
            max_edge_segments=self.max_segments,
            beam_k=self.beam_k,
            seed=self.seed,
        )


@dataclass
class RunResult:
    problem: GridProblem
    state: FloorplanState
    assignment: AssignmentResult
    metrics: metrics_mod.LayoutMetrics
    objective: float
    initial_metrics: metrics_mod.LayoutMetrics | None
    initial_objective: float | None
    sa_records: list[TemperatureRecord] = field(default_factory=list)
    spacing: int = 1
    legalization_skipped: bool = False
    ppm_ids: list[int] = field(default_factory=list)

    def hpwl_bench(self) -> float:
        return self.metrics.hpwl / self.problem.scale if self.problem.scale else 0.0


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def build_grid_problem(
    inst: ProblemInstance, grid: int = 224, utilization: float = AREA_UTILIZATION
) -> GridProblem:
    """Scale a benchmark instance onto the cell grid.

    Uniform linear scale s maps benchmark lengths to cells so that the
    summed footprint area stays below the utilization budget; predefined
    areas round to the nearest cell with a floor of one.
    """
    w = h = grid
    total = sum(m.area if m.soft else m.width * m.height for m in inst.modules)
    if total <= 0:
        raise PianoError(f"instance {inst.name} has no module area")
    s = math.sqrt(utilization * w * h / total)
    for _ in range(200):
        mods: list[ModuleRecord] = []
        for i, bm in enumerate(inst.modules):
            if bm.soft:
                a = max(1, _round_half_up(bm.area * s * s))
                fp = soft_footprint(a, bm.aspect_lo, bm.aspect_hi, w, h)
            else:
                fw = max(1, _round_half_up(bm.width * s))
                fh = max(1, _round_half_up(bm.height * s))
                a, fp = fw * fh, (fw, fh)
            mods.append(
                ModuleRecord(i, bm.name, a, bm.soft, bm.aspect_lo, bm.aspect_hi, fp)
            )
        footprint_area = sum(m.footprint[0] * m.footprint[1] for m in mods)
        if footprint_area <= 0.95 * w * h:
            break
        s *= 0.98
    else:
        raise PianoError(f"instance {inst.name}: cannot fit modules on a {grid} grid")

    terminals: list[Terminal] = []
    term_index: dict[str, int] = {}
    dropped = 0
    for t in inst.terminals:
        if t.x is None or t.y is None:
            dropped += 1
            continue
        term_index[t.name] = len(terminals)
        terminals.append(
            Terminal(t.name, min(max(t.x * s, 0.0), w), min(max(t.y * s, 0.0), h))
        )
    if dropped:
        log.info("%d terminals without coordinates excluded from HPWL", dropped)

    mod_index = {m.name: m.id for m in mods}
    nets: list[NetRecord] = []
    for i, bn in enumerate(inst.nets):
        mids = [mod_index[p] for p in bn.pins if p in mod_index]
        tids = [term_index[p] for p in bn.pins if p in term_index]
        nets.append(NetRecord(i, bn.name, mids, tids, mids[0] if mids else None))
    return GridProblem(inst.name, w, h, mods, nets, terminals, s)


def full_metrics(
    state: FloorplanState, assignment: AssignmentResult
) -> metrics_mod.LayoutMetrics:
    return metrics_mod.LayoutMetrics(
        hpwl=metrics_mod.hpwl(state),
        ftlen=assignment.ftlen,
        ftnum=assignment.ftnum,
        unplaced=assignment.unplaced,
        whitespace_ratio=metrics_mod.whitespace_ratio(state),
        max_avr=metrics_mod.max_avr(state),
        max_segments=metrics_mod.max_segment_count(state),
        hpwl_pins=assignment.hpwl_pins,
    )


def _optimize_stages(
    problem: GridProblem, state: FloorplanState, cfg: RunConfig
) -> RunResult:
    """Stages 2 and 3 on a legal state."""
    two_pin, _ = decompose_nets(problem.nets)
    u = cfg.pinspace if cfg.pinspace else pin_space(problem, two_pin)
    log.info("pin spacing u=%d over %d two-pin nets", u, len(two_pin))

    with_blanks = register_blank_modules(state)
    a0 = assign_all(with_blanks, two_pin, u, cfg.beam_k)
    m0 = full_metrics(with_blanks, a0)
    obj0 = metrics_mod.objective(m0, cfg.weights)
    log.info(
        "pre-optimization: hpwl=%.1f ftlen=%.2f ftnum=%.2f unplaced=%d objective=%.1f",
        m0.hpwl, m0.ftlen, m0.ftnum, m0.unplaced, obj0,
    )

    filled = remove_whitespace(with_blanks, a0, u, cfg.beam_k, two_pin, cfg.max_segments)
    a1 = assign_all(filled, two_pin, u, cfg.beam_k)
    best_state, best_assign, _, records = sa_optimize(
        filled, a1, two_pin, u, cfg.sa_config()
    )
    m = full_metrics(best_state, best_assign)
    obj = metrics_mod.objective(m, cfg.weights)
    log.info(
        "final: hpwl=%.1f ftlen=%.2f ftnum=%.2f unplaced=%d objective=%.1f",
        m.hpwl, m.ftlen, m.ftnum, m.unplaced, obj,
    )
    return RunResult(
        problem=problem,
        state=best_state,
        assignment=best_assign,
        metrics=m,
        objective=obj,
        initial_metrics=m0,
        initial_objective=obj0,
        sa_records=records,
        spacing=u,
    )


def plan(problem: GridProblem, cfg: RunConfig) -> RunResult:
    """Full pipeline from the raw netlist."""
    state = random_initial(problem, cfg.trials, cfg.seed)
    return _optimize_stages(problem, state, cfg)


def select_ppms(problem: GridProblem, spec: str, seed: int) -> list[int]:
    """Resolve a --ppm argument: comma-separated module names/ids, or an
    area fraction picked deterministically from the seed."""
    try:
        frac = float(spec)
        is_frac = 0.0 < frac < 1.0
    except ValueError:
        is_frac = False
    if not is_frac:
        ids = []
        for tok in spec.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if tok.isdigit():
                ids.append(int(tok))
            else:
                ids.append(problem.module_by_name(tok).id)
        return sorted(set(ids))
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(problem.modules))
    target = frac * problem.total_module_area()
    picked: list[int] = []
    acc = 0
    for idx in order:
        if acc >= target:
            break
        picked.append(int(idx))
        acc += problem.modules[int(idx)].area
    return sorted(picked)


def refine(
    problem: GridProblem,
    initial: FloorplanState,
    cfg: RunConfig,
    ppm: str | None = None,
) -> RunResult:
    """Legalize (only if needed), then run stages 2 and 3."""
    ppm_ids: list[int] = []
    if ppm:
        ppm_ids = select_ppms(problem, ppm, cfg.seed)
        log.info("pre-placed modules: %s", ppm_ids)
        for mid in ppm_ids:
            problem.modules[mid].preplaced = True

    state = initial
    if state.needs_legalization:
        raw = getattr(state, "raw_regions", None)
        if raw is not None:
            # rebuild: pre-placed claims go on the canvas verbatim, the rest
            # re-place from their anchors
            rebuilt = FloorplanState.empty(problem)
            rebuilt.anchors = dict(state.anchors)
            rebuilt.needs_legalization = True
            for mid in ppm_ids:
                rows = raw.get(mid, [])
                if not rows:
                    raise LayoutError(f"pre-placed module {mid} has no region in the layout")
                for y, x0, ln in rows:
                    seg = rebuilt.canvas[y, x0 : x0 + ln]
                    if (seg != geometry.EMPTY).any():
                        raise LayoutError("pre-placed regions overlap in the input layout")
                    seg[:] = mid
            state = rebuilt
        state = legalize(state)
        skipped = False
    else:
        log.info("legalization skipped: input layout is already legal")
        skipped = True

    result = _optimize_stages(problem, state, cfg)
    result.legalization_skipped = skipped
    result.ppm_ids = ppm_ids
    return result


def evaluate(problem: GridProblem, state: FloorplanState, cfg: RunConfig) -> RunResult:
    """Stage 2 only: assign pins and report metrics on the given layout."""
    if state.needs_legalization:
        raise LayoutError(
            "layout has overlaps or unplaced modules; run `piano refine` first"
        )
    for m in problem.modules:
        if not state.placed(m.id):
            raise LayoutError(f"module {m.name} is not placed; run `piano refine` first")
    two_pin, _ = decompose_nets(problem.nets)
    u = cfg.pinspace if cfg.pinspace else pin_space(problem, two_pin)
    with_blanks = register_blank_modules(state)
    assignment = assign_all(with_blanks, two_pin, u, cfg.beam_k)
    m = full_metrics(with_blanks, assignment)
    return RunResult(
        problem=problem,
        state=with_blanks,
        assignment=assignment,
        metrics=m,
        objective=metrics_mod.objective(m, cfg.weights),
        initial_metrics=None,
        initial_objective=None,
        spacing=u,
    )
