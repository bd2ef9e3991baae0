#!/usr/bin/env python3
"""Generate the GSRC-format benchmark suite under benchmarks/.

The public GSRC/MCNC corpora are not redistributable with this repo, so we
ship deterministic synthetic stand-ins with the canonical module counts
(n10..n300 soft-block instances, ami33/ami49 hard-block instances) and
comparable netlist density. Regenerate with:  python3 tools/make_benchmarks.py
"""

import math
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "benchmarks"

# name -> (soft blocks, hard blocks, terminals, nets, seed)
INSTANCES = {
    "n10": (10, 0, 69, 118, 101),
    "n30": (30, 0, 212, 349, 103),
    "n50": (50, 0, 209, 485, 105),
    "n100": (100, 0, 334, 885, 107),
    "n200": (200, 0, 564, 1585, 109),
    "n300": (300, 0, 569, 1893, 111),
    "ami33": (0, 33, 42, 123, 113),
    "ami49": (0, 49, 22, 408, 115),
}

DEGREE_CHOICES = [2, 3, 4, 5]
DEGREE_WEIGHTS = [0.82, 0.12, 0.04, 0.02]


def _terminal_fraction(n_terminals: int, n_nets: int) -> float:
    # pad-heavy designs (n10: 69 terminals on 118 nets) wire many nets to
    # the ring; estimate the share of nets carrying one terminal pin
    return min(0.55, 1.15 * n_terminals / max(1, n_nets))


def _soft_blocks(rng, count):
    lines = []
    areas = np.exp(rng.uniform(math.log(1500), math.log(24000), size=count))
    for i, a in enumerate(areas):
        lines.append(f"sb{i} softrectangular {a:.0f} 0.333 3.0")
    return [f"sb{i}" for i in range(count)], lines, float(areas.sum())


def _hard_blocks(rng, count):
    lines = []
    total = 0.0
    names = []
    for i in range(count):
        w = float(rng.integers(40, 400))
        h = float(w * rng.uniform(0.4, 2.5))
        name = f"bk{i}"
        names.append(name)
        lines.append(
            f"{name} hardrectilinear 4 (0, 0) (0, {h:.0f}) ({w:.0f}, {h:.0f}) ({w:.0f}, 0)"
        )
        total += w * round(h)
    return names, lines, total


def _blocks_file(name, rng, n_soft, n_hard, n_term):
    parts = [
        "UCSC blocks 1.0",
        f"# synthetic stand-in for {name}",
        "",
        f"NumSoftRectangularBlocks : {n_soft}",
        f"NumHardRectilinearBlocks : {n_hard}",
        f"NumTerminals : {n_term}",
        "",
    ]
    total = 0.0
    names = []
    if n_soft:
        names, lines, total = _soft_blocks(rng, n_soft)
        parts.extend(lines)
    if n_hard:
        names, lines, total = _hard_blocks(rng, n_hard)
        parts.extend(lines)
    parts.append("")
    terms = [f"p{i + 1}" for i in range(n_term)]
    parts.extend(f"{t} terminal" for t in terms)
    return "\n".join(parts) + "\n", names, terms, total


def _nets_file(rng, blocks, terms, n_nets):
    stanzas = []
    n_pins = 0
    term_frac = _terminal_fraction(len(terms), n_nets)
    for _ in range(n_nets):
        degree = int(rng.choice(DEGREE_CHOICES, p=DEGREE_WEIGHTS))
        use_term = terms and rng.random() < term_frac
        n_blocks = degree - (1 if use_term else 0)
        n_blocks = min(n_blocks, len(blocks))
        picked = [blocks[i] for i in rng.choice(len(blocks), size=n_blocks, replace=False)]
        pins = list(picked)
        if use_term:
            pins.insert(int(rng.integers(0, len(pins) + 1)), terms[int(rng.integers(0, len(terms)))])
        stanzas.append(f"NetDegree : {len(pins)}")
        stanzas.extend(f"{p} B" for p in pins)
        n_pins += len(pins)
    head = ["UCLA nets 1.0", "", f"NumNets : {n_nets}", f"NumPins : {n_pins}", ""]
    return "\n".join(head + stanzas) + "\n"


def _pl_file(rng, blocks, terms, total_area):
    # terminals ring the die outline; block rows are placeholder zeros
    die = math.sqrt(total_area / 0.85)
    lines = ["UCLA pl 1.0", ""]
    lines.extend(f"{b} 0 0" for b in blocks)
    for t in terms:
        edge = int(rng.integers(0, 4))
        pos = rng.uniform(0.0, die)
        x, y = [(pos, 0.0), (die, pos), (pos, die), (0.0, pos)][edge]
        lines.append(f"{t} {x:.1f} {y:.1f}")
    return "\n".join(lines) + "\n"


def generate(out_dir: Path = OUT):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, (n_soft, n_hard, n_term, n_nets, seed) in INSTANCES.items():
        rng = np.random.default_rng(seed)
        blocks_text, blocks, terms, total = _blocks_file(name, rng, n_soft, n_hard, n_term)
        nets_text = _nets_file(rng, blocks, terms, n_nets)
        pl_text = _pl_file(rng, blocks, terms, total)
        (out_dir / f"{name}.blocks").write_text(blocks_text)
        (out_dir / f"{name}.nets").write_text(nets_text)
        (out_dir / f"{name}.pl").write_text(pl_text)
        print(f"{name}: {len(blocks)} blocks, {len(terms)} terminals, {n_nets} nets")


if __name__ == "__main__":
    generate(Path(sys.argv[1]) if len(sys.argv) > 1 else OUT)
