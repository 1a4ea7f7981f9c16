"""Seeded batch runs: single trials, repeated cells, and the two study sweeps.

Every trial seed is derived from ``(base_seed, cell key, placement, rep)``
with BLAKE2b, so a cell's seeds depend only on its own parameters.
"""

from __future__ import annotations

import hashlib
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .geometry import annulus_area
from .initializers import BoxPlacement, CapacityError, InitSpec, build_state
from .protocol import FieldSpec, SwarmConfig, run_until_stable


@dataclass(frozen=True)
class RatioPreset:
    label: str
    d: float
    c: float


RATIOS = {
    "1:1": RatioPreset("1:1", d=1.0, c=1.0),
    "3:4": RatioPreset("3:4", d=0.75, c=1.0),
}

BOX_CLASSES = {
    "Corners": (
        BoxPlacement.CORNER_NE,
        BoxPlacement.CORNER_NW,
        BoxPlacement.CORNER_SE,
        BoxPlacement.CORNER_SW,
    ),
    "Sides": (BoxPlacement.SIDE_E, BoxPlacement.SIDE_W),
    "Top/Bottom": (BoxPlacement.TOP, BoxPlacement.BOTTOM),
    "Center": (BoxPlacement.CENTER,),
}
ALL_BOXES = "all"

EFFICIENCY_POPULATIONS = (4, 8, 16, 32, 5, 10, 15, 20, 25)
CAPACITY_POPULATIONS = (2, 3, 4, 8, 16, 32, 64, 128, 256)
CAPACITY_BANDS = tuple((delta, eps) for eps in (2.0, 4.0, 8.0) for delta in (8.0, 12.0, 16.0))
EFFICIENCY_BAND = (12.0, 4.0)
CAPACITY_RATIO = "3:4"
CAPACITY_ROTATION = 20.0
DEFAULT_REPS = 5
DEFAULT_BOXED_REPS = 2


def placement_members(placement: Optional[str]) -> tuple[Optional[BoxPlacement], ...]:
    """Expand a placement label (single box, class name or ``all``) to boxes."""
    if placement is None:
        return (None,)
    if placement == ALL_BOXES:
        return tuple(BoxPlacement)
    if placement in BOX_CLASSES:
        return BOX_CLASSES[placement]
    return (BoxPlacement(placement),)


@dataclass(frozen=True)
class Cell:
    """One table cell: a full parameterisation minus the repetition index."""

    study: str
    init: str
    placement: Optional[str]
    ratio: str
    r: float
    delta: float
    epsilon: float
    population: int

    def key(self) -> str:
        return (
            f"{self.study}|{self.init}|{self.placement or '-'}|{self.ratio}|{self.r!r}|"
            f"{self.delta!r}|{self.epsilon!r}|{self.population}"
        )

    @property
    def area(self) -> float:
        return annulus_area(self.delta, self.epsilon)

    def config(self, max_epochs: int = 2000, fieldspec: Optional[FieldSpec] = None,
               ratios: Optional[dict] = None) -> SwarmConfig:
        preset = (ratios or RATIOS)[self.ratio]
        return SwarmConfig(
            delta=self.delta,
            epsilon=self.epsilon,
            c=preset.c,
            d=preset.d,
            r=self.r,
            field=fieldspec or FieldSpec(),
            max_epochs=max_epochs,
        )


@dataclass(frozen=True)
class TrialResult:
    spec_id: str
    seed: int
    epochs: Optional[int]
    capacity_limited: bool = False
    placement: Optional[str] = None

    @property
    def stabilized(self) -> bool:
        return self.epochs is not None


@dataclass(frozen=True)
class AggregateResult:
    mean_epochs: float
    n_runs: int
    n_failures: int
    capacity_limited: bool = False
    trials: tuple[TrialResult, ...] = ()

    @property
    def median_epochs(self) -> Optional[float]:
        ok = [t.epochs for t in self.trials if t.epochs is not None]
        return statistics.median(ok) if ok else None


def derive_seed(base_seed: int, cell_key: str, rep: int) -> int:
    h = hashlib.blake2b(f"{base_seed}|{cell_key}|{rep}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def run_trial(init: InitSpec, cfg: SwarmConfig, placement: Optional[BoxPlacement] = None,
              spec_id: str = "") -> TrialResult:
    if placement is not None:
        init = replace(init, placement=BoxPlacement(placement))
    label = init.placement.value if init.placement is not None else None
    try:
        state = build_state(init, cfg)
    except CapacityError:
        return TrialResult(spec_id, init.seed, None, capacity_limited=True, placement=label)
    return TrialResult(spec_id, init.seed, run_until_stable(state, cfg), placement=label)


def stats(results: Sequence[TrialResult]) -> AggregateResult:
    """Mean over successful runs; 0 when every run failed."""
    if not results:
        raise ValueError("cannot aggregate an empty list of trials")
    ok = [t.epochs for t in results if t.epochs is not None]
    return AggregateResult(
        mean_epochs=statistics.fmean(ok) if ok else 0.0,
        n_runs=len(results),
        n_failures=len(results) - len(ok),
        capacity_limited=all(t.capacity_limited for t in results),
        trials=tuple(results),
    )


def cell_trials(cell: Cell, reps: int, base_seed: int) -> list[tuple[InitSpec, Optional[BoxPlacement]]]:
    """The (init spec, box) pairs of a cell, ``reps`` per member placement."""
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    jobs = []
    for member in placement_members(cell.placement if cell.init == "boxed" else None):
        sub_key = cell.key() if member is None else f"{cell.key()}|{member.value}"
        for rep in range(reps):
            seed = derive_seed(base_seed, sub_key, rep)
            jobs.append((InitSpec(cell.init, cell.population, seed, member), member))
    return jobs


def _run_job(job) -> TrialResult:
    init, cfg, member, spec_id = job
    return run_trial(init, cfg, member, spec_id)


def run_cells(cells: Sequence[Cell], reps_for, base_seed: int, max_epochs: int = 2000,
              fieldspec: Optional[FieldSpec] = None, ratios: Optional[dict] = None,
              workers: int = 1) -> list[AggregateResult]:
    """Run many cells; ``reps_for(cell)`` gives each cell's repetition count.

    Trials may run in a process pool; results are regrouped in submission
    order so the output never depends on completion order.
    """
    jobs, owners = [], []
    for i, cell in enumerate(cells):
        cfg = cell.config(max_epochs, fieldspec, ratios)
        for init, member in cell_trials(cell, reps_for(cell), base_seed):
            jobs.append((init, cfg, member, cell.key()))
            owners.append(i)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_job, jobs, chunksize=1))
    else:
        results = [_run_job(job) for job in jobs]
    grouped: list[list[TrialResult]] = [[] for _ in cells]
    for owner, res in zip(owners, results):
        grouped[owner].append(res)
    return [stats(g) for g in grouped]


def run_cell(cell: Cell, reps: int, base_seed: int, max_epochs: int = 2000,
             fieldspec: Optional[FieldSpec] = None, ratios: Optional[dict] = None) -> AggregateResult:
    return run_cells([cell], lambda _: reps, base_seed, max_epochs, fieldspec, ratios)[0]


@dataclass(frozen=True)
class SweepSpec:
    study: str
    inits: tuple[str, ...] = ("random", "boxed", "linear", "collinear")
    populations: Optional[tuple[int, ...]] = None
    ratios: Optional[tuple[str, ...]] = None
    rotations: Optional[tuple[float, ...]] = None
    bands: Optional[tuple[tuple[float, float], ...]] = None
    reps: int = DEFAULT_REPS
    boxed_reps: int = DEFAULT_BOXED_REPS
    base_seed: int = 0
    max_epochs: int = 2000
    placements: Optional[tuple[str, ...]] = None
    fieldspec: FieldSpec = field(default_factory=FieldSpec)
    workers: int = 1

    def __post_init__(self):
        if self.study not in ("efficiency", "capacity"):
            raise ValueError(f"study must be 'efficiency' or 'capacity', got {self.study!r}")
        if self.reps < 1 or self.boxed_reps < 1:
            raise ValueError("repetition counts must be positive")
        for ratio in self.ratios or ():
            if ratio not in RATIOS:
                raise ValueError(f"unknown ratio {ratio!r}; expected one of {sorted(RATIOS)}")
        capacity = self.study == "capacity"
        defaults = {
            "populations": CAPACITY_POPULATIONS if capacity else EFFICIENCY_POPULATIONS,
            "ratios": (CAPACITY_RATIO,) if capacity else ("3:4", "1:1"),
            "rotations": (CAPACITY_ROTATION,) if capacity else (0.0, 20.0),
            "bands": CAPACITY_BANDS if capacity else (EFFICIENCY_BAND,),
            "placements": (ALL_BOXES,) if capacity else tuple(BOX_CLASSES),
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, tuple(value))

    def cells(self) -> list[Cell]:
        out = []
        for init in self.inits:
            placements = self.placements if init == "boxed" else (None,)
            for placement in placements:
                for delta, eps in self.bands:
                    for ratio in self.ratios:
                        for r in self.rotations:
                            for pop in self.populations:
                                out.append(Cell(self.study, init, placement, ratio, float(r),
                                                float(delta), float(eps), int(pop)))
        return out

    def reps_for(self, cell: Cell) -> int:
        return self.boxed_reps if cell.init == "boxed" else self.reps


@dataclass(frozen=True)
class SweepRow:
    cell: Cell
    result: AggregateResult


def run_sweep(spec: SweepSpec, cells: Optional[Iterable[Cell]] = None) -> list[SweepRow]:
    cells = list(spec.cells() if cells is None else cells)
    results = run_cells(cells, spec.reps_for, spec.base_seed, spec.max_epochs,
                        spec.fieldspec, workers=spec.workers)
    return [SweepRow(c, r) for c, r in zip(cells, results)]


def efficiency_suite(spec: SweepSpec) -> list[SweepRow]:
    if spec.study != "efficiency":
        raise ValueError("efficiency_suite needs an efficiency sweep")
    return run_sweep(spec)


def capacity_suite(spec: SweepSpec) -> list[SweepRow]:
    if spec.study != "capacity":
        raise ValueError("capacity_suite needs a capacity sweep")
    return run_sweep(spec)
