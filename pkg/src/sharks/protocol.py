"""Agent rules and the epoch loop.

Each epoch visits the agents in a fresh random order.  A visited agent first
steps away from its nearest neighbour (dispersion) and then toward or away
from the target (center), each move reading the live positions and being
skipped outright when the destination is occupied or off the field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import GeometryError, Point2, displace, heading_from_to, rotate_cw


class ProtocolError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    half_extent: float = 35.0
    occupancy_radius: float = 1.0

    def __post_init__(self):
        if not self.half_extent > 0:
            raise ConfigError(f"half_extent must be positive, got {self.half_extent}")
        if not self.occupancy_radius > 0:
            raise ConfigError(
                f"occupancy_radius must be positive, got {self.occupancy_radius}"
            )

    def contains(self, p) -> bool:
        return abs(p[0]) <= self.half_extent and abs(p[1]) <= self.half_extent


@dataclass(frozen=True)
class SwarmConfig:
    """Protocol parameters.

    ``delta`` is the preferred distance to the target and ``epsilon`` the
    allowed deviation; ``c`` and ``d`` are the per-epoch step lengths of the
    center and dispersion rules; ``r`` is the extra clockwise turn (degrees)
    added to the half-turn away from the nearest neighbour.
    """

    delta: float = 12.0
    epsilon: float = 4.0
    c: float = 1.0
    d: float = 0.75
    r: float = 20.0
    field: FieldSpec = field(default_factory=FieldSpec)
    max_epochs: int = 2000

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta >= self.epsilon):
            raise ConfigError(
                f"need delta >= epsilon > 0, got delta={self.delta}, epsilon={self.epsilon}"
            )
        if not self.c > 0:
            raise ConfigError(f"c must be positive, got {self.c}")
        if not self.d > 0:
            raise ConfigError(f"d must be positive, got {self.d}")
        if not 0 <= self.r < 360:
            raise ConfigError(f"r must lie in [0, 360), got {self.r}")
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be a positive integer, got {self.max_epochs}")
        if self.delta + self.epsilon > self.field.half_extent:
            raise ConfigError(
                f"band outer radius {self.delta + self.epsilon} exceeds field "
                f"half extent {self.field.half_extent}"
            )


@dataclass
class SwarmState:
    """Mutable swarm snapshot.  Agent ids are the row indices of ``positions``."""

    target: Point2
    positions: np.ndarray
    rng: np.random.Generator
    epoch: int = 0

    def __post_init__(self):
        self.target = Point2(float(self.target[0]), float(self.target[1]))
        self.positions = np.array(self.positions, dtype=np.float64).reshape(-1, 2)

    @property
    def n_agents(self) -> int:
        return self.positions.shape[0]

    @property
    def agents(self) -> dict[int, Point2]:
        return {i: Point2(float(x), float(y)) for i, (x, y) in enumerate(self.positions)}

    def position(self, agent: int) -> Point2:
        x, y = self.positions[agent]
        return Point2(float(x), float(y))

    def distances_to_target(self) -> np.ndarray:
        return np.hypot(self.positions[:, 0] - self.target.x, self.positions[:, 1] - self.target.y)

    def copy(self) -> "SwarmState":
        rng = np.random.Generator(type(self.rng.bit_generator)())
        rng.bit_generator.state = self.rng.bit_generator.state
        return SwarmState(self.target, self.positions.copy(), rng, self.epoch)


@dataclass(frozen=True)
class MoveOutcome:
    moved: bool
    new_position: Point2


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _distances_from(state: SwarmState, p) -> np.ndarray:
    pos = state.positions
    return np.hypot(pos[:, 0] - p[0], pos[:, 1] - p[1])


def nearest_neighbor(state: SwarmState, agent: int) -> int:
    if state.n_agents < 2:
        raise ProtocolError("nearest neighbour undefined for fewer than two agents")
    dists = _distances_from(state, state.positions[agent])
    dists[agent] = np.inf
    # argmin returns the first minimum, i.e. the smallest id on ties
    return int(np.argmin(dists))


def is_empty(state: SwarmState, candidate, mover: int, fieldspec: FieldSpec) -> bool:
    if not fieldspec.contains(candidate):
        return False
    dists = _distances_from(state, candidate)
    if 0 <= mover < dists.shape[0]:
        dists[mover] = np.inf
    return bool(np.all(dists >= fieldspec.occupancy_radius))


def can_move_to(state: SwarmState, candidate, mover: int, fieldspec: FieldSpec) -> bool:
    """``is_empty`` plus keeping clear of the target, which acts as an obstacle."""
    t = state.target
    if math.hypot(candidate[0] - t.x, candidate[1] - t.y) < fieldspec.occupancy_radius:
        return False
    return is_empty(state, candidate, mover, fieldspec)


def apply_center_rule(state: SwarmState, agent: int, cfg: SwarmConfig) -> MoveOutcome:
    p = state.position(agent)
    t = state.target
    dx, dy = p.x - t.x, p.y - t.y
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        raise ProtocolError(f"agent {agent} sits on the target; center bearing undefined")

    gap = cfg.delta - dist
    if gap > cfg.epsilon:
        step = cfg.c  # too close: back away along the target ray
    elif gap < -cfg.epsilon:
        step = -cfg.c
    else:
        return MoveOutcome(False, p)

    candidate = Point2(p.x + step * dx / dist, p.y + step * dy / dist)
    if can_move_to(state, candidate, agent, cfg.field):
        return MoveOutcome(True, candidate)
    return MoveOutcome(False, p)


def apply_dispersion_rule(state: SwarmState, agent: int, cfg: SwarmConfig) -> MoveOutcome:
    p = state.position(agent)
    q = state.position(nearest_neighbor(state, agent))
    try:
        heading = heading_from_to(p, q)
    except GeometryError as exc:
        raise ProtocolError(f"agent {agent} coincides with its nearest neighbour") from exc
    candidate = displace(p, rotate_cw(heading, 180.0 + cfg.r), cfg.d)
    if can_move_to(state, candidate, agent, cfg.field):
        return MoveOutcome(True, candidate)
    return MoveOutcome(False, p)


def step_epoch(state: SwarmState, cfg: SwarmConfig) -> SwarmState:
    """Advance ``state`` by one epoch in place and return it."""
    if state.n_agents < 2:
        raise ProtocolError("an epoch needs at least two agents")
    for agent in state.rng.permutation(state.n_agents):
        agent = int(agent)
        out = apply_dispersion_rule(state, agent, cfg)
        if out.moved:
            state.positions[agent] = out.new_position
        out = apply_center_rule(state, agent, cfg)
        if out.moved:
            state.positions[agent] = out.new_position
    state.epoch += 1
    return state


def is_stable(state: SwarmState, cfg: SwarmConfig) -> bool:
    if state.n_agents == 0:
        return True
    return bool(np.all(np.abs(state.distances_to_target() - cfg.delta) <= cfg.epsilon))


def run_until_stable(
    state: SwarmState,
    cfg: SwarmConfig,
    observer: Optional[Callable[[SwarmState], None]] = None,
) -> Optional[int]:
    """Step until every agent sits in the band; ``None`` if ``max_epochs`` runs out.

    ``observer`` is called with the initial state and after every epoch.
    """
    if observer is not None:
        observer(state)
    if is_stable(state, cfg):
        return 0
    while state.epoch < cfg.max_epochs:
        step_epoch(state, cfg)
        if observer is not None:
            observer(state)
        if is_stable(state, cfg):
            return state.epoch
    return None
