"""Initial swarm layouts: random, boxed, linear and collinear.

All layouts place agents on distinct lattice slots, so any two agents start at
least one unit apart and no two share a position.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import Point2
from .protocol import SwarmConfig, SwarmState, make_rng

BOX_SIZE = 10
LINE_SLOTS = 35
LINE_HEIGHT = 20
MAX_ATTEMPTS = 10**6


class CapacityError(ValueError):
    """The requested population cannot be placed by this layout."""


class BoxPlacement(str, Enum):
    CORNER_NE = "corner-NE"
    CORNER_NW = "corner-NW"
    CORNER_SE = "corner-SE"
    CORNER_SW = "corner-SW"
    SIDE_E = "side-E"
    SIDE_W = "side-W"
    TOP = "top"
    BOTTOM = "bottom"
    CENTER = "center"


INIT_KINDS = ("random", "boxed", "linear", "collinear")


@dataclass(frozen=True)
class InitSpec:
    kind: str
    population: int
    seed: int = 0
    placement: Optional[BoxPlacement] = None

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ValueError(f"unknown init kind {self.kind!r}; expected one of {INIT_KINDS}")
        if int(self.population) != self.population or self.population < 1:
            raise ValueError(f"population must be a positive integer, got {self.population}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.kind == "boxed":
            if self.placement is None:
                raise ValueError("boxed initialisation needs a placement")
            object.__setattr__(self, "placement", BoxPlacement(self.placement))


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def contains(self, p) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax


def box_region(placement: BoxPlacement, cfg: SwarmConfig) -> Rect:
    h = cfg.field.half_extent
    half = BOX_SIZE / 2
    placement = BoxPlacement(placement)
    # (column, row) on a 3x3 grid: -1 flush low edge, 0 centred, +1 flush high edge
    col, row = {
        BoxPlacement.CORNER_NE: (1, 1),
        BoxPlacement.CORNER_NW: (-1, 1),
        BoxPlacement.CORNER_SE: (1, -1),
        BoxPlacement.CORNER_SW: (-1, -1),
        BoxPlacement.SIDE_E: (1, 0),
        BoxPlacement.SIDE_W: (-1, 0),
        BoxPlacement.TOP: (0, 1),
        BoxPlacement.BOTTOM: (0, -1),
        BoxPlacement.CENTER: (0, 0),
    }[placement]

    def span(k: int) -> tuple[float, float]:
        if k > 0:
            return h - BOX_SIZE, h
        if k < 0:
            return -h, -h + BOX_SIZE
        return -half, half

    xmin, xmax = span(col)
    ymin, ymax = span(row)
    return Rect(xmin, xmax, ymin, ymax)


def _state(cfg: SwarmConfig, positions, rng) -> SwarmState:
    return SwarmState(Point2(0.0, 0.0), np.asarray(positions, dtype=np.float64), rng)


def _sample_slots(slots: list, population: int, rng, what: str) -> list:
    if population > len(slots):
        raise CapacityError(f"{what} holds at most {len(slots)} agents, asked for {population}")
    idx = rng.choice(len(slots), size=population, replace=False)
    return [slots[i] for i in idx]


def _lattice_slots(xs, ys, cfg: SwarmConfig) -> list:
    """Lattice points at least the occupancy radius from the target (the origin)."""
    rho = cfg.field.occupancy_radius
    return [(x, y) for x, y in itertools.product(xs, ys) if math.hypot(x, y) >= rho]


def init_random(spec: InitSpec, cfg: SwarmConfig) -> SwarmState:
    rng = make_rng(spec.seed)
    n = int(math.floor(cfg.field.half_extent))
    rho = cfg.field.occupancy_radius
    if rho <= 1:
        slots = _lattice_slots(range(-n, n + 1), range(-n, n + 1), cfg)
        return _state(cfg, _sample_slots(slots, spec.population, rng, "the field lattice"), rng)

    # Wider exclusion radius: distinct lattice points are no longer enough.
    placed: list[tuple[int, int]] = []
    attempts = 0
    while len(placed) < spec.population:
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise CapacityError(
                f"placed {len(placed)} of {spec.population} agents before giving up "
                f"after {MAX_ATTEMPTS} attempts"
            )
        x, y = (int(v) for v in rng.integers(-n, n + 1, size=2))
        if math.hypot(x, y) < rho:
            continue
        if all(math.hypot(x - px, y - py) >= rho for px, py in placed):
            placed.append((x, y))
    return _state(cfg, placed, rng)


def box_slots(placement: BoxPlacement, cfg: SwarmConfig) -> list:
    """Centres of the 10x10 unit cells of a box."""
    box = box_region(placement, cfg)
    xs = [box.xmin + i + 0.5 for i in range(BOX_SIZE)]
    ys = [box.ymin + j + 0.5 for j in range(BOX_SIZE)]
    return [(x, y) for x, y in itertools.product(xs, ys)]


def init_boxed(spec: InitSpec, cfg: SwarmConfig, placement: Optional[BoxPlacement] = None) -> SwarmState:
    placement = BoxPlacement(placement or spec.placement)
    if spec.population > BOX_SIZE * BOX_SIZE:
        raise CapacityError(
            f"a {BOX_SIZE}x{BOX_SIZE} box holds at most {BOX_SIZE * BOX_SIZE} agents, "
            f"asked for {spec.population}"
        )
    rng = make_rng(spec.seed)
    slots = box_slots(placement, cfg)
    return _state(cfg, _sample_slots(slots, spec.population, rng, f"box {placement.value}"), rng)


def line_offsets(cfg: SwarmConfig, avoid_target: bool) -> list[int]:
    if not avoid_target:
        half = LINE_SLOTS // 2
        return list(range(-half, half + 1))
    rho = cfg.field.occupancy_radius
    # the LINE_SLOTS integer offsets nearest the target that keep clear of it
    reach = int(cfg.field.half_extent)
    usable = [k for k in range(-reach, reach + 1) if abs(k) >= rho]
    usable.sort(key=lambda k: (abs(k), k))
    return sorted(usable[:LINE_SLOTS])


def init_linear(spec: InitSpec, cfg: SwarmConfig) -> SwarmState:
    rng = make_rng(spec.seed)
    slots = [(float(x), float(LINE_HEIGHT)) for x in line_offsets(cfg, avoid_target=False)]
    return _state(cfg, _sample_slots(slots, spec.population, rng, "the horizontal line"), rng)


def init_collinear(spec: InitSpec, cfg: SwarmConfig) -> SwarmState:
    rng = make_rng(spec.seed)
    slots = [(0.0, float(y)) for y in line_offsets(cfg, avoid_target=True)]
    return _state(cfg, _sample_slots(slots, spec.population, rng, "the vertical line"), rng)


def build_state(spec: InitSpec, cfg: SwarmConfig) -> SwarmState:
    if spec.kind == "random":
        return init_random(spec, cfg)
    if spec.kind == "boxed":
        return init_boxed(spec, cfg, spec.placement)
    if spec.kind == "linear":
        return init_linear(spec, cfg)
    return init_collinear(spec, cfg)
