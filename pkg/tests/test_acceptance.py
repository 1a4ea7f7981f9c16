"""Acceptance criteria 1-10, each checked at its stated tolerance.

Every test records a verdict; the session summary prints one PASS/FAIL line
per criterion. Medians treat a run that never stabilized as infinitely slow.
"""
import math
import statistics

import numpy as np
import pytest

from sharks import annulus_area
from sharks.experiments import (
    EFFICIENCY_POPULATIONS,
    Cell,
    SweepSpec,
    capacity_suite,
    cell_trials,
    run_cell,
)
from sharks.geometry import distance, heading_from_to, rotate_cw, unit_vector
from sharks.initializers import BoxPlacement, CapacityError, InitSpec, build_state, init_boxed, init_collinear, init_linear
from sharks.protocol import (
    FieldSpec,
    SwarmConfig,
    SwarmState,
    apply_center_rule,
    apply_dispersion_rule,
    is_stable,
    make_rng,
    run_until_stable,
    step_epoch,
)

SEEDS = 20
BASE = 0
CAP = 2000


def median_epochs(result):
    return statistics.median(math.inf if t.epochs is None else t.epochs for t in result.trials)


def efficiency_cell(init, ratio, r, pop, placement=None):
    return Cell("efficiency", init, placement, ratio, float(r), 12.0, 4.0, pop)


def test_c1_annulus_areas(verdict):
    published = {(8, 2): 201.06, (12, 2): 301.59, (8, 4): 402.12, (16, 2): 402.12, (12, 4): 603.19,
                 (8, 8): 804.25, (16, 4): 804.25, (12, 8): 1206.37, (16, 8): 1608.49}
    worst = max(abs(annulus_area(d, e) - a) for (d, e), a in published.items())
    ok = worst <= 0.01
    verdict("C1 annulus areas", ok, f"max |area - published| = {worst:.4f} (tol 0.01)")
    assert ok


@pytest.mark.slow
def test_c2_collinear_trap(verdict):
    cases = [("3:4", p) for p in (16, 32, 25)] + [("1:1", p) for p in EFFICIENCY_POPULATIONS]
    stabilized, drifted = [], []
    for ratio, pop in cases:
        cell = efficiency_cell("collinear", ratio, 0, pop)
        cfg = cell.config(CAP)
        for init, _ in cell_trials(cell, SEEDS, BASE):
            state = build_state(init, cfg)

            def watch(s, tag=(ratio, pop, init.seed)):
                if np.any(s.positions[:, 0] != 0.0):
                    drifted.append(tag)

            if run_until_stable(state, cfg, watch) is not None:
                stabilized.append((ratio, pop, state.epoch))
    ok = not stabilized and not drifted
    detail = f"{len(stabilized)} stabilized runs, {len(set(drifted))} runs left x=0"
    if stabilized:
        detail += f"; first stabilized: {stabilized[:4]}"
    verdict("C2 collinear trap", ok, detail)
    assert ok, detail


def test_c3_one_degree_suffices(verdict):
    agg = run_cell(efficiency_cell("collinear", "3:4", 1, 8), SEEDS, BASE, CAP)
    rate = 1 - agg.n_failures / agg.n_runs
    ok = rate >= 0.9
    verdict("C3 one degree suffices", ok, f"{rate:.0%} of {agg.n_runs} runs stabilized (need >= 90%)")
    assert ok


@pytest.mark.slow
def test_c4_ratio_ordering(verdict):
    parts, ok = [], True
    for pop in (16, 25):
        fast = median_epochs(run_cell(efficiency_cell("random", "3:4", 0, pop), SEEDS, BASE, CAP))
        slow = median_epochs(run_cell(efficiency_cell("random", "1:1", 0, pop), SEEDS, BASE, CAP))
        ok &= fast < 0.5 * slow
        parts.append(f"pop {pop}: 3:4 {fast} vs 1:1 {slow}")
    verdict("C4 ratio ordering", ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_c5_rotation_helps(verdict):
    turned = median_epochs(run_cell(efficiency_cell("random", "1:1", 20, 16), SEEDS, BASE, CAP))
    straight = median_epochs(run_cell(efficiency_cell("random", "1:1", 0, 16), SEEDS, BASE, CAP))
    ok = turned < straight
    verdict("C5 rotation helps 1:1", ok, f"median r=20 {turned} vs r=0 {straight}")
    assert ok


def at_most(a, b, margin=0.2):
    """a < b, or within the tie margin of b."""
    return a < b or abs(a - b) <= margin * max(a, b)


@pytest.mark.slow
def test_c6_placement_ordering(verdict):
    med = {}
    for cls, members in (("Center", 1), ("Top/Bottom", 2), ("Sides", 2), ("Corners", 4)):
        agg = run_cell(efficiency_cell("boxed", "3:4", 20, 16, cls), SEEDS // members, BASE, CAP)
        assert agg.n_runs == SEEDS
        med[cls] = median_epochs(agg)
    middle = ("Top/Bottom", "Sides")
    ok = all(at_most(med["Center"], med[m]) and at_most(med[m], med["Corners"]) for m in middle)
    verdict("C6 placement ordering", ok, ", ".join(f"{k} {v}" for k, v in med.items()))
    assert ok


def test_c7_capacity_limits(verdict):
    cfg = SwarmConfig()
    for kind, fn, limit in (("linear", init_linear, 35), ("collinear", init_collinear, 35)):
        assert fn(InitSpec(kind, limit), cfg).n_agents == limit
        with pytest.raises(CapacityError):
            fn(InitSpec(kind, limit + 1), cfg)
    for placement in BoxPlacement:
        assert init_boxed(InitSpec("boxed", 100, 0, placement), cfg).n_agents == 100
        with pytest.raises(CapacityError):
            init_boxed(InitSpec("boxed", 101, 0, placement), cfg)

    spec = SweepSpec("capacity", inits=("linear", "collinear", "boxed"), reps=1, boxed_reps=1, max_epochs=1,
                     populations=(32, 64, 100, 128, 256), bands=((8.0, 2.0), (16.0, 8.0)))
    limited = {(r.cell.init, r.cell.population) for r in capacity_suite(spec) if r.result.capacity_limited}
    expected = {(i, p) for i in ("linear", "collinear") for p in (64, 100, 128, 256)}
    expected |= {("boxed", 128), ("boxed", 256)}
    ok = limited == expected
    verdict("C7 capacity limits", ok, f"capacity-limited cells: {sorted(limited)}")
    assert ok


@pytest.mark.slow
def test_c8_crowding(verdict):
    def cell(pop):
        return Cell("capacity", "random", None, "3:4", 20.0, 8.0, 2.0, pop)

    small = median_epochs(run_cell(cell(8), SEEDS, BASE, CAP))
    large = median_epochs(run_cell(cell(64), SEEDS, BASE, CAP))
    crowded = run_cell(cell(128), SEEDS, BASE, CAP)
    fail_rate = crowded.n_failures / crowded.n_runs
    ratio = large / small
    ok = ratio >= 2 and fail_rate >= 0.8
    verdict("C8 crowding effect", ok,
            f"median 64 / median 8 = {large} / {small} = {ratio:.2f}x (need >= 2x); "
            f"population 128 failure rate {fail_rate:.0%} (need >= 80%)")
    assert ok


def random_swarm(rng, n=None):
    half = float(rng.integers(12, 40))
    eps = float(rng.uniform(0.5, 5))
    delta = float(rng.uniform(eps, max(eps, half - eps)))
    cfg = SwarmConfig(delta=delta, epsilon=eps, c=float(rng.uniform(0.1, 2 * eps)),
                      d=float(rng.uniform(0.1, 2)), r=float(rng.uniform(0, 360)),
                      field=FieldSpec(half_extent=half), max_epochs=50)
    n = n or int(rng.integers(2, 16))
    state = build_state(InitSpec("random", n, int(rng.integers(2**63))), cfg)
    return state, cfg


def min_separation(state):
    p = state.positions
    gaps = [math.hypot(*(p[i] - p[j])) for i in range(len(p)) for j in range(i + 1, len(p))]
    return min(gaps)


def test_c9_protocol_invariants(verdict):
    rng = np.random.default_rng(2024)
    failures = []
    for trial in range(1000):
        state, cfg = random_swarm(rng)
        rho, half = cfg.field.occupancy_radius, cfg.field.half_extent

        # one epoch keeps separation and bounds
        step_epoch(state, cfg)
        if min_separation(state) < rho - 1e-9:
            failures.append(("separation", trial))
        if np.any(np.abs(state.positions) > half + 1e-9):
            failures.append(("bounds", trial))

        # a single unblocked center move never leaves the agent farther from the band
        i = int(rng.integers(state.n_agents))
        p = state.position(i)
        before = abs(distance(p, state.target) - cfg.delta)
        out = apply_center_rule(state, i, cfg)
        if out.moved and abs(distance(out.new_position, state.target) - cfg.delta) > before + 1e-9:
            failures.append(("contraction", trial))

        # dispersion moves exactly d along the rotated away-heading
        i = int(rng.integers(state.n_agents))
        p = state.position(i)
        others = [(distance(p, state.position(j)), j) for j in range(state.n_agents) if j != i]
        nn = state.position(min(others)[1])
        out = apply_dispersion_rule(state, i, cfg)
        if out.moved:
            ux, uy = unit_vector(rotate_cw(heading_from_to(p, nn), 180 + cfg.r))
            want = (p.x + cfg.d * ux, p.y + cfg.d * uy)
            if distance(out.new_position, want) > 1e-9 or abs(distance(p, out.new_position) - cfg.d) > 1e-9:
                failures.append(("dispersion", trial))

        # pre-stable start reports 0
        ring = [(cfg.delta * math.cos(a), cfg.delta * math.sin(a)) for a in np.linspace(0, 2 * math.pi, 4)[:3]]
        pre = SwarmState((0.0, 0.0), np.array(ring), make_rng(trial))
        if run_until_stable(pre, cfg) != 0:
            failures.append(("pre-stable", trial))

        # identical seeds give bit-identical trajectories
        a, a_cfg = random_swarm(np.random.default_rng(trial), 6)
        b, b_cfg = random_swarm(np.random.default_rng(trial), 6)
        for _ in range(3):
            step_epoch(a, a_cfg)
            step_epoch(b, b_cfg)
        if a.positions.tobytes() != b.positions.tobytes():
            failures.append(("determinism", trial))
    ok = not failures
    verdict("C9 protocol invariants", ok, f"1000 random configs, {len(failures)} violations {failures[:5]}")
    assert ok


def test_c10_stability_oracle(verdict):
    rng = np.random.default_rng(99)
    checked = disagreements = 0
    while checked < 100:
        eps = float(rng.uniform(2, 8))
        delta = float(rng.uniform(max(eps, 4), 26 - eps))
        cfg = SwarmConfig(delta=delta, epsilon=eps, c=1.0, d=0.75, r=20.0, max_epochs=400)
        state = build_state(InitSpec("random", int(rng.integers(2, 12)), int(rng.integers(2**63))), cfg)
        if run_until_stable(state, cfg) is None or not is_stable(state, cfg):
            continue
        checked += 1
        for x, y in state.positions.tolist():
            if not abs(math.hypot(x, y) - delta) <= eps:
                disagreements += 1
                break
    ok = disagreements == 0
    verdict("C10 stability oracle", ok, f"{checked} stable terminal states, {disagreements} disagreements")
    assert ok
