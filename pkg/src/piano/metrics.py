"""Layout quality metrics: HPWL, area variation, regularity, SA objective.

HPWL uses module centers plus fixed terminal points over the original
(pre-decomposition) netlist. Feedthrough metrics come from the pin
assignment stage and are only aggregated here.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry
from .model import FloorplanState, LayoutError, NetRecord

DEFAULT_WEIGHTS = (1.0, 50.0, 2000.0, 100.0)  # HPWL : FTlen : FTnum : Unplacepin


@dataclass
class LayoutMetrics:
    hpwl: float
    ftlen: float
    ftnum: float
    unplaced: int
    whitespace_ratio: float = 0.0
    max_avr: float = 0.0
    max_segments: int = 0
    hpwl_pins: float = 0.0           # HPWL over assigned pin positions, for analysis


def hpwl(state: FloorplanState, nets: list[NetRecord] | None = None) -> float:
    """Sum of net bounding-box half-perimeters over the original netlist."""
    if nets is None:
        nets = state.problem.nets
    centers = state.centers()
    terms = state.problem.terminals
    total = 0.0
    for net in nets:
        xs: list[float] = []
        ys: list[float] = []
        for mid in net.modules:
            if mid not in centers:
                raise LayoutError(f"net {net.id}: module {mid} is not placed")
            cx, cy = centers[mid]
            xs.append(cx)
            ys.append(cy)
        for ti in net.terminals:
            xs.append(terms[ti].x)
            ys.append(terms[ti].y)
        if len(xs) >= 2:
            total += (max(xs) - min(xs)) + (max(ys) - min(ys))
    return total


def avr(state: FloorplanState, module_id: int) -> float:
    """Area variation rate: positive means the module shrank below a_i."""
    return state.avr(module_id)


def regularity(state: FloorplanState, module_id: int) -> int:
    """Number of maximal straight outline segments of the module's region."""
    mask = state.region_mask(module_id)
    if not mask.any():
        raise LayoutError(f"module {module_id} is not placed")
    return geometry.outline_segment_count(mask)


def whitespace_ratio(state: FloorplanState) -> float:
    """Fraction of cells owned by no real module (Empty or blank-owned)."""
    free = np.count_nonzero(
        (state.canvas == geometry.EMPTY) | (state.canvas >= geometry.BLANK_BASE)
    )
    return free / state.canvas.size


def max_avr(state: FloorplanState) -> float:
    return max(avr(state, m.id) for m in state.problem.modules)


def max_segment_count(state: FloorplanState) -> int:
    return max(regularity(state, m.id) for m in state.problem.modules)


def objective(m: LayoutMetrics, weights=DEFAULT_WEIGHTS) -> float:
    w_hpwl, w_ftlen, w_ftnum, w_unplaced = weights
    return w_hpwl * m.hpwl + w_ftlen * m.ftlen + w_ftnum * m.ftnum + w_unplaced * m.unplaced
