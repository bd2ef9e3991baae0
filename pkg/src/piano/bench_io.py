"""Benchmark and layout I/O.

Reads the GSRC floorplan text formats (.blocks / .nets / .pl), reads and
writes the JSON layout interchange document, and formats the metrics CSV.
MCNC instances are expected in their GSRC-converted form.
"""

import json
import re

import numpy as np

from . import geometry
from .geometry import EMPTY
from .model import (
    BenchModule,
    BenchNet,
    BenchTerminal,
    FloorplanState,
    GridProblem,
    LayoutError,
    ModuleRecord,
    ParseError,
    ProblemInstance,
    Terminal,
)

LAYOUT_FORMAT = "piano-layout-1"
METRICS_HEADER = "instance,hpwl,ftlen,ftnum,unplacepin,runtime_s,seed,hpwl_grid,hpwl_bench"
NET_CSV_HEADER = "net_id,outcome,path,ft_len,ft_num"

_COORD_RE = re.compile(r"\(\s*([-\d.eE+]+)\s*,\s*([-\d.eE+]+)\s*\)")


def _clean_lines(text: str):
    """Yield (line_number, stripped_line) skipping blanks, comments, headers."""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("UCSC") or line.startswith("UCLA"):
            continue
        yield no, line


def parse_blocks(text: str) -> tuple[list[BenchModule], list[str]]:
    """Parse a .blocks file -> (modules, terminal names)."""
    modules: list[BenchModule] = []
    terminals: list[str] = []
    for no, line in _clean_lines(text):
        if ":" in line and line.split(":")[0].strip().startswith("Num"):
            continue  # NumSoftRectangularBlocks etc.
        tokens = line.split()
        if len(tokens) >= 2 and tokens[1] == "terminal":
            terminals.append(tokens[0])
            continue
        if len(tokens) >= 5 and tokens[1] == "softrectangular":
            try:
                area = float(tokens[2])
                lo, hi = float(tokens[3]), float(tokens[4])
            except ValueError:
                raise ParseError(f"blocks line {no}: bad softrectangular fields: {line}")
            modules.append(BenchModule(tokens[0], True, area, lo, hi))
            continue
        if len(tokens) >= 3 and tokens[1] == "hardrectilinear":
            pts = _COORD_RE.findall(line)
            if len(pts) < 3:
                raise ParseError(f"blocks line {no}: hardrectilinear needs vertices: {line}")
            xs = [float(p[0]) for p in pts]
            ys = [float(p[1]) for p in pts]
            w, h = max(xs) - min(xs), max(ys) - min(ys)
            if w <= 0 or h <= 0:
                raise ParseError(f"blocks line {no}: degenerate hard block: {line}")
            modules.append(BenchModule(tokens[0], False, w * h, width=w, height=h))
            continue
        raise ParseError(f"blocks line {no}: unrecognized block line: {line}")
    return modules, terminals


def parse_nets(text: str) -> list[BenchNet]:
    nets: list[BenchNet] = []
    pending = 0
    current: list[str] | None = None
    current_name = ""
    for no, line in _clean_lines(text):
        head = line.split(":")[0].strip()
        if head in ("NumNets", "NumPins"):
            continue
        if head == "NetDegree":
            if current is not None and pending > 0:
                raise ParseError(f"nets line {no}: previous net is {pending} pins short")
            rest = line.split(":", 1)[1].split()
            if not rest:
                raise ParseError(f"nets line {no}: NetDegree without a count")
            try:
                pending = int(rest[0])
            except ValueError:
                raise ParseError(f"nets line {no}: bad NetDegree count: {line}")
            current_name = rest[1] if len(rest) > 1 else f"n{len(nets)}"
            current = []
            nets.append(BenchNet(current_name, current))
            continue
        if current is None:
            raise ParseError(f"nets line {no}: pin line before any NetDegree: {line}")
        if pending <= 0:
            raise ParseError(f"nets line {no}: more pins than declared degree: {line}")
        current.append(line.split()[0])
        pending -= 1
    if current is not None and pending > 0:
        raise ParseError(f"nets file ends with a net {pending} pins short")
    return nets


def parse_pl(text: str) -> dict[str, tuple[float, float]]:
    coords: dict[str, tuple[float, float]] = {}
    for no, line in _clean_lines(text):
        tokens = line.split()
        if len(tokens) < 3:
            raise ParseError(f"pl line {no}: expected 'name x y': {line}")
        try:
            coords[tokens[0]] = (float(tokens[1]), float(tokens[2]))
        except ValueError:
            raise ParseError(f"pl line {no}: bad coordinates: {line}")
    return coords


def parse_gsrc(
    blocks_text: str,
    nets_text: str,
    pl_text: str | None = None,
    name: str = "instance",
) -> ProblemInstance:
    """Parse the GSRC triple into a ProblemInstance (benchmark units)."""
    modules, terminal_names = parse_blocks(blocks_text)
    seen = set()
    for m in modules:
        if m.name in seen:
            raise ParseError(f"duplicate module name: {m.name}")
        seen.add(m.name)
    nets = parse_nets(nets_text)
    coords = parse_pl(pl_text) if pl_text else {}

    terminals = [
        BenchTerminal(t, *(coords.get(t) or (None, None))) for t in terminal_names
    ]
    known = seen | set(terminal_names)
    for net in nets:
        for pin in net.pins:
            if pin not in known:
                raise ParseError(f"net {net.name}: endpoint '{pin}' is not a declared block or terminal")

    hint = None
    if coords:
        placed = [coords[m.name] for m in modules if m.name in coords]
        if placed:
            hint = (max(p[0] for p in placed), max(p[1] for p in placed))
    return ProblemInstance(name, modules, nets, terminals, hint)


# --------------------------------------------------------------------------
# Layout JSON document
# --------------------------------------------------------------------------

def _f6(x: float) -> float:
    return round(float(x), 6)


def _region_rows(mask: np.ndarray) -> list[list[int]]:
    """Run-length encode a region as [y, x0, len] rows."""
    rows = []
    for y in np.nonzero(mask.any(axis=1))[0]:
        xs = np.nonzero(mask[y])[0]
        brk = np.nonzero(np.diff(xs) != 1)[0] + 1
        for run in np.split(xs, brk):
            rows.append([int(y), int(run[0]), int(run.size)])
    return rows


def save_layout(
    state: FloorplanState,
    assignment=None,
    metrics=None,
    hpwl_bench: float | None = None,
) -> str:
    """Serialize a state (plus optional assignment/metrics) to canonical JSON."""
    p = state.problem
    mods = []
    for m in p.modules:
        mask = state.region_mask(m.id)
        mods.append(
            {
                "id": m.id,
                "name": m.name,
                "area_cells": m.area,
                "soft": m.soft,
                "aspect": [_f6(m.aspect_lo), _f6(m.aspect_hi)],
                "footprint": [m.footprint[0], m.footprint[1]],
                "preplaced": m.preplaced,
                "rows": _region_rows(mask),
            }
        )
    doc = {
        "format": LAYOUT_FORMAT,
        "instance": p.name,
        "grid": {"width": p.width, "height": p.height},
        "scale": _f6(p.scale),
        "modules": mods,
        "terminals": [
            {"name": t.name, "x": _f6(t.x), "y": _f6(t.y)} for t in p.terminals
        ],
        "needs_legalization": state.needs_legalization,
    }
    if assignment is not None:
        doc["pins"] = [
            {"net": n, "module": m, "x": _f6(x), "y": _f6(y)}
            for (n, m, x, y) in assignment.pins
        ]
        doc["paths"] = [
            {"net": n, "modules": list(path)} for n, path in assignment.paths
        ]
    if metrics is not None:
        doc["metrics"] = {
            "hpwl": _f6(metrics.hpwl),
            "ftlen": _f6(metrics.ftlen),
            "ftnum": _f6(metrics.ftnum),
            "unplacepin": metrics.unplaced,
            "whitespace_ratio": _f6(metrics.whitespace_ratio),
            "max_avr": _f6(metrics.max_avr),
            "max_segments": metrics.max_segments,
            "hpwl_pins": _f6(metrics.hpwl_pins),
        }
        if hpwl_bench is not None:
            doc["metrics"]["hpwl_bench"] = _f6(hpwl_bench)
    return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=1)


def load_layout(json_text: str, problem: GridProblem | None = None) -> FloorplanState:
    """Rebuild a FloorplanState from a layout document.

    With `problem` given, document modules are matched to the problem by
    name (unknown names are an error). Overlapping regions are tolerated:
    the state comes back with needs_legalization=True and per-module anchor
    hints instead of canvas ownership.
    """
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as e:
        raise LayoutError(f"layout JSON is not valid JSON: {e}")
    for key in ("format", "grid", "modules"):
        if key not in doc:
            raise LayoutError(f"layout document missing '{key}'")
    if doc["format"] != LAYOUT_FORMAT:
        raise LayoutError(f"unsupported layout format: {doc['format']}")
    gw, gh = int(doc["grid"]["width"]), int(doc["grid"]["height"])

    if problem is None:
        problem = GridProblem(
            name=doc.get("instance", "layout"),
            width=gw,
            height=gh,
            modules=[
                ModuleRecord(
                    id=i,
                    name=d["name"],
                    area=int(d["area_cells"]),
                    soft=bool(d.get("soft", True)),
                    aspect_lo=float(d.get("aspect", [1, 1])[0]),
                    aspect_hi=float(d.get("aspect", [1, 1])[1]),
                    footprint=tuple(d.get("footprint", [1, 1])),
                    preplaced=bool(d.get("preplaced", False)),
                )
                for i, d in enumerate(doc["modules"])
            ],
            nets=[],
            terminals=[
                Terminal(t["name"], float(t["x"]), float(t["y"]))
                for t in doc.get("terminals", [])
            ],
            scale=float(doc.get("scale", 1.0)),
        )
    elif (gw, gh) != (problem.width, problem.height):
        raise LayoutError(
            f"layout grid {gw}x{gh} does not match problem grid "
            f"{problem.width}x{problem.height}"
        )

    name_to_id = {m.name: m.id for m in problem.modules}
    canvas = geometry.new_canvas(problem.width, problem.height)
    anchors: dict[int, tuple[int, int]] = {}
    overlap = False
    claims: dict[int, list[list[int]]] = {}
    for d in doc["modules"]:
        if d["name"] not in name_to_id:
            raise LayoutError(f"layout module '{d['name']}' is unknown to the netlist")
        mid = name_to_id[d["name"]]
        rows = d.get("rows", [])
        claims[mid] = rows
        if not rows:
            overlap = True  # unplaced module: needs (re)placement
            continue
        for y, x0, ln in rows:
            if y < 0 or y >= gh or x0 < 0 or x0 + ln > gw:
                raise LayoutError(
                    f"module '{d['name']}' has cells outside the {gw}x{gh} grid"
                )
            row = canvas[y, x0 : x0 + ln]
            if (row != EMPTY).any():
                overlap = True
            row[:] = mid
        ys = [r[0] for r in rows]
        xs = [r[1] for r in rows]
        anchors[mid] = (min(xs), min(ys))
        if bool(d.get("preplaced", False)):
            problem.modules[mid].preplaced = True

    state = FloorplanState(problem, canvas, anchors, needs_legalization=overlap)
    if overlap:
        # ownership is ambiguous under overlaps; keep the raw claims around
        # and let the legalizer re-place from anchors/footprints
        state.raw_regions = claims  # type: ignore[attr-defined]
        state.canvas = geometry.new_canvas(problem.width, problem.height)
    return state


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

def metrics_csv_row(
    instance: str,
    metrics,
    runtime_s: float,
    seed: int,
    hpwl_bench: float,
) -> str:
    return (
        f"{instance},{metrics.hpwl:.6f},{metrics.ftlen:.6f},{metrics.ftnum:.6f},"
        f"{metrics.unplaced},{runtime_s:.3f},{seed},{metrics.hpwl:.6f},{hpwl_bench:.6f}"
    )


def per_net_csv(assignment) -> str:
    lines = [NET_CSV_HEADER]
    for out in assignment.outcomes:
        path = "-".join(str(m) for m in out.path) if out.path else ""
        lines.append(
            f"{out.net_id},{out.kind},{path},{out.ft_len:.6f},{out.ft_num}"
        )
    return "\n".join(lines) + "\n"
