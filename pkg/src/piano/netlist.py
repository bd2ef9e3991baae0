"""Netlist reorganization: multi-pin decomposition and blank modules.

Multi-pin nets become driver->sink two-pin nets so signals fan out in
parallel. Every connected whitespace component is promoted to a blank
module so that pins always land on a module-module boundary.
"""

import logging
from dataclasses import dataclass

from . import geometry
from .geometry import BLANK_BASE, EMPTY
from .model import FloorplanState, NetRecord, TwoPinNet

log = logging.getLogger(__name__)


@dataclass
class DecomposeReport:
    children: int = 0
    skipped_small: int = 0     # nets with fewer than 2 module pins
    dropped_self: int = 0      # (driver, driver) pairs from repeated pins


def decompose_nets(nets: list[NetRecord]) -> tuple[list[TwoPinNet], DecomposeReport]:
    """Split each net into (driver, sink) pairs, preserving sink order.

    A p-pin net yields p-1 children; duplicate sinks stay distinct children
    (each demands its own pin). Terminal pins do not take part.
    """
    report = DecomposeReport()
    out: list[TwoPinNet] = []
    for net in sorted(nets, key=lambda n: n.id):
        if net.driver is None or len(net.modules) < 2:
            report.skipped_small += 1
            continue
        driver = net.driver
        seen_driver = False
        for mid in net.modules:
            if mid == driver and not seen_driver:
                seen_driver = True          # first occurrence is the driver itself
                continue
            if mid == driver:
                report.dropped_self += 1
                continue
            out.append(TwoPinNet(len(out), net.id, driver, mid))
            report.children += 1
    if report.skipped_small:
        log.warning("decompose_nets: %d nets with <2 module pins skipped", report.skipped_small)
    return out, report


def register_blank_modules(state: FloorplanState) -> FloorplanState:
    """Promote each 4-connected Empty component to a blank module.

    Blank ids are assigned from BLANK_BASE upward in order of each
    component's lexicographically smallest cell.
    """
    out = state.copy()
    comps = geometry.connected_components(out.canvas, EMPTY)
    for k, cells in enumerate(comps):
        bid = BLANK_BASE + k
        for x, y in cells:
            out.canvas[y, x] = bid
    if comps:
        log.debug("registered %d blank modules", len(comps))
    return out


def clear_blank_modules(state: FloorplanState) -> FloorplanState:
    """Inverse of register_blank_modules: blank cells become Empty again."""
    out = state.copy()
    out.canvas[out.canvas >= BLANK_BASE] = EMPTY
    return out
