"""Domain types: benchmark instances, grid problems, and floorplan state."""

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .geometry import BLANK_BASE, EMPTY


class PianoError(Exception):
    """Base for all pipeline errors."""


class ParseError(PianoError):
    pass


class LegalizationError(PianoError):
    pass


class LayoutError(PianoError):
    pass


# --------------------------------------------------------------------------
# Benchmark-unit layer (straight out of the parser)
# --------------------------------------------------------------------------

@dataclass
class BenchModule:
    name: str
    soft: bool
    area: float                      # benchmark units
    aspect_lo: float = 1.0           # soft blocks: w/h range
    aspect_hi: float = 1.0
    width: float = 0.0               # hard blocks only
    height: float = 0.0


@dataclass
class BenchNet:
    name: str
    pins: list[str]                  # module/terminal names, listed order


@dataclass
class BenchTerminal:
    name: str
    x: float | None = None           # from the .pl file when present
    y: float | None = None


@dataclass
class ProblemInstance:
    name: str
    modules: list[BenchModule]
    nets: list[BenchNet]
    terminals: list[BenchTerminal]
    canvas_hint: tuple[float, float] | None = None


# --------------------------------------------------------------------------
# Grid-unit layer (after scaling onto the cell canvas)
# --------------------------------------------------------------------------

@dataclass
class ModuleRecord:
    id: int
    name: str
    area: int                        # predefined area a_i in cells
    soft: bool
    aspect_lo: float
    aspect_hi: float
    footprint: tuple[int, int]       # (w, h) cells, chosen before legalization
    preplaced: bool = False


@dataclass
class Terminal:
    name: str
    x: float                         # grid coordinates
    y: float


@dataclass
class NetRecord:
    id: int
    name: str
    modules: list[int]               # module ids in listed pin order
    terminals: list[int]             # indices into problem.terminals
    driver: int | None               # first listed module pin


@dataclass(frozen=True)
class TwoPinNet:
    id: int
    parent: int                      # originating NetRecord id
    src: int                         # driver module
    dst: int


@dataclass
class GridProblem:
    name: str
    width: int
    height: int
    modules: list[ModuleRecord]
    nets: list[NetRecord]
    terminals: list[Terminal]
    scale: float                     # benchmark length units -> cells

    def module_by_name(self, name: str) -> ModuleRecord:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)

    def total_module_area(self) -> int:
        return sum(m.area for m in self.modules)


# --------------------------------------------------------------------------
# Floorplan state
# --------------------------------------------------------------------------

@dataclass
class FloorplanState:
    """One floorplan: ownership matrix plus bookkeeping.

    The owner matrix is the single source of truth for regions. `anchors`
    remembers each module's requested bottom-left corner (used by the
    legalizer's distance tie-break). States needing legalization carry the
    requested rectangles in `anchors` + footprints instead of canvas cells.
    """

    problem: GridProblem
    canvas: np.ndarray
    anchors: dict[int, tuple[int, int]] = field(default_factory=dict)
    needs_legalization: bool = False

    @classmethod
    def empty(cls, problem: GridProblem) -> "FloorplanState":
        return cls(problem, geometry.new_canvas(problem.width, problem.height))

    def copy(self) -> "FloorplanState":
        return FloorplanState(
            self.problem, self.canvas.copy(), dict(self.anchors), self.needs_legalization
        )

    # -- region queries ----------------------------------------------------

    def placed(self, module_id: int) -> bool:
        return bool((self.canvas == module_id).any())

    def region_mask(self, module_id: int) -> np.ndarray:
        return self.canvas == module_id

    def region_cells(self, module_id: int) -> list[tuple[int, int]]:
        return geometry.region_cells(self.canvas, module_id)

    def area(self, module_id: int) -> int:
        return geometry.region_area(self.canvas, module_id)

    def center(self, module_id: int) -> tuple[float, float]:
        mask = self.region_mask(module_id)
        if not mask.any():
            raise LayoutError(f"module {module_id} is not placed")
        return geometry.region_center(mask)

    def centers(self) -> dict[int, tuple[float, float]]:
        return geometry.owner_centers(self.canvas)

    def empty_count(self) -> int:
        return int(np.count_nonzero(self.canvas == EMPTY))

    def blank_ids(self) -> list[int]:
        ids = np.unique(self.canvas)
        return [int(i) for i in ids if i >= BLANK_BASE]

    def real_ids_on_canvas(self) -> list[int]:
        ids = np.unique(self.canvas)
        return [int(i) for i in ids if 0 <= i < BLANK_BASE]

    # -- mutation helpers ----------------------------------------------------

    def place_rect(self, module_id: int, x: int, y: int, w: int, h: int):
        h_c, w_c = self.canvas.shape
        if x < 0 or y < 0 or x + w > w_c or y + h > h_c:
            raise LayoutError(f"rect for module {module_id} out of canvas bounds")
        window = self.canvas[y : y + h, x : x + w]
        if (window != EMPTY).any():
            raise LayoutError(f"placement overlap for module {module_id}")
        window[:] = module_id
        self.anchors[module_id] = (x, y)

    def clear_owner(self, owner: int):
        self.canvas[self.canvas == owner] = EMPTY

    def avr(self, module_id: int) -> float:
        m = self.problem.modules[module_id]
        if m.area == 0:
            raise LayoutError(f"module {module_id} has zero predefined area")
        return (m.area - self.area(module_id)) / m.area
