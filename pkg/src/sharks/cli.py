"""Command line front end: ``run``, ``table`` and ``sweep``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import yaml

from .experiments import RATIOS, SweepRow, SweepSpec, run_sweep
from .initializers import INIT_KINDS, BoxPlacement, CapacityError, InitSpec, build_state
from .protocol import ConfigError, SwarmConfig, run_until_stable

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_OUTPUT = 4

SWEEP_HEADER = [
    "study", "init", "placement", "ratio", "r", "delta", "epsilon", "area",
    "population", "mean_epochs", "n_runs", "n_failures", "capacity_limited",
]
TRACE_HEADER = ["epoch", "agent", "x", "y", "dist"]

# table id -> (study, init)
TABLES = {
    "I": ("efficiency", "random"),
    "II": ("efficiency", "boxed"),
    "III": ("efficiency", "linear"),
    "collinear": ("efficiency", "collinear"),
    "IV": ("capacity", "random"),
    "V": ("capacity", "boxed"),
    "VI": ("capacity", "linear"),
    "collinear-capacity": ("capacity", "collinear"),
}
TABLE_TITLES = {
    "I": "Random Initialization Results",
    "II": "Boxed Initialization Results",
    "III": "Linear Initialization Results",
    "collinear": "Collinear Initialization Results",
    "IV": "Random Population Capacity Results",
    "V": "Boxed Population Capacity Results",
    "VI": "Linear Population Capacity Results",
    "collinear-capacity": "Collinear Population Capacity Results",
}

RUN_KEYS = {"delta", "epsilon", "ratio", "d", "c", "rotation", "population", "init",
            "placement", "seed", "reps", "max_epochs"}
SWEEP_KEYS = {"study", "init", "placement", "ratio", "rotation", "population", "delta",
              "epsilon", "bands", "seed", "reps", "boxed_reps", "max_epochs", "d", "c"}


class UsageError(Exception):
    pass


def load_document(path: str, allowed: set) -> dict:
    try:
        doc = yaml.safe_load(Path(path).read_text()) or {}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise UsageError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError(f"config {path} must be a mapping of keys to values")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return doc


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def step_sizes(doc: dict) -> tuple[str, float, float]:
    """Resolve ``ratio`` or explicit ``d``/``c`` to (label, d, c)."""
    if "d" in doc or "c" in doc:
        if "ratio" in doc:
            raise UsageError("give either ratio or d/c, not both")
        if "d" not in doc or "c" not in doc:
            raise UsageError("d and c must be given together")
        d, c = float(doc["d"]), float(doc["c"])
        return f"{d:g}:{c:g}", d, c
    label = str(doc.get("ratio", "3:4"))
    if label not in RATIOS:
        raise UsageError(f"unknown ratio {label!r}; expected one of {sorted(RATIOS)}")
    preset = RATIOS[label]
    return label, preset.d, preset.c


def run_config(doc: dict) -> tuple[SwarmConfig, InitSpec]:
    _, d, c = step_sizes(doc)
    cfg = SwarmConfig(
        delta=float(doc.get("delta", 12.0)),
        epsilon=float(doc.get("epsilon", 4.0)),
        c=c,
        d=d,
        r=float(doc.get("rotation", 20.0)),
        max_epochs=int(doc.get("max_epochs", 2000)),
    )
    kind = str(doc.get("init", "random"))
    placement = doc.get("placement")
    if kind == "boxed" and placement is None:
        placement = "center"
    init = InitSpec(
        kind=kind,
        population=int(doc.get("population", 16)),
        seed=int(doc.get("seed", 0)),
        placement=BoxPlacement(placement) if kind == "boxed" else None,
    )
    return cfg, init


def sweep_spec(doc: dict, workers: int = 1) -> SweepSpec:
    if "study" not in doc:
        raise UsageError("sweep config needs a 'study' key (efficiency or capacity)")
    kw: dict = {"study": doc["study"], "workers": workers}
    if "init" in doc:
        kw["inits"] = tuple(str(v) for v in _as_list(doc["init"]))
    if "placement" in doc:
        kw["placements"] = tuple(str(v) for v in _as_list(doc["placement"]))
    if "population" in doc:
        kw["populations"] = tuple(int(v) for v in _as_list(doc["population"]))
    if "rotation" in doc:
        kw["rotations"] = tuple(float(v) for v in _as_list(doc["rotation"]))
    if "ratio" in doc:
        kw["ratios"] = tuple(str(v) for v in _as_list(doc["ratio"]))
    if "d" in doc or "c" in doc:
        raise UsageError("sweeps take named ratios; d/c apply to single runs only")
    if "bands" in doc:
        kw["bands"] = tuple((float(dl), float(ep)) for dl, ep in doc["bands"])
    elif "delta" in doc or "epsilon" in doc:
        deltas = _as_list(doc.get("delta", 12.0))
        epsilons = _as_list(doc.get("epsilon", 4.0))
        kw["bands"] = tuple((float(dl), float(ep)) for ep in epsilons for dl in deltas)
    for key, name in (("reps", "reps"), ("boxed_reps", "boxed_reps"), ("seed", "base_seed"),
                      ("max_epochs", "max_epochs")):
        if key in doc:
            kw[name] = int(doc[key])
    spec = SweepSpec(**kw)
    for init in spec.inits:
        if init not in INIT_KINDS:
            raise UsageError(f"unknown init {init!r}")
    for cell in spec.cells():
        cell.config(spec.max_epochs, spec.fieldspec)  # validates every band up front
    return spec


# -- rendering --------------------------------------------------------------


def _fmt_mean(row: SweepRow) -> str:
    res = row.result
    if res.capacity_limited or res.n_failures == res.n_runs:
        return "0"
    return f"{res.mean_epochs:.2f}"


def _grid(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    line = lambda r: " | ".join(v.rjust(w) for v, w in zip(r, widths))
    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([line(header), rule] + [line(r) for r in rows])


def render_table(table_id: str, rows: list[SweepRow]) -> str:
    study, _ = TABLES[table_id]
    pops: list[int] = []
    for row in rows:
        if row.cell.population not in pops:
            pops.append(row.cell.population)
    lookup = {}
    for row in rows:
        c = row.cell
        lookup[(c.placement, c.ratio, c.r, c.delta, c.epsilon, c.population)] = row

    keys = []
    for row in rows:
        c = row.cell
        k = (c.placement, c.ratio, c.r, c.delta, c.epsilon)
        if k not in keys:
            keys.append(k)

    out = []
    if study == "efficiency":
        boxed = table_id == "II"
        header = (["Box"] if boxed else []) + ["d:c", "r"] + [str(p) for p in pops]
        for placement, ratio, r, delta, eps in keys:
            cells = [_fmt_mean(lookup[(placement, ratio, r, delta, eps, p)]) for p in pops]
            out.append(([placement] if boxed else []) + [ratio, f"{r:g}"] + cells)
    else:
        header = ["epsilon", "delta", "a"] + [str(p) for p in pops]
        for placement, ratio, r, delta, eps in keys:
            cells = [_fmt_mean(lookup[(placement, ratio, r, delta, eps, p)]) for p in pops]
            area = lookup[(placement, ratio, r, delta, eps, pops[0])].cell.area
            out.append([f"{eps:g}", f"{delta:g}", f"{area:.2f}"] + cells)
    return f"{TABLE_TITLES[table_id]}\n{_grid(header, out)}\n"


def row_record(row: SweepRow) -> dict:
    c, res = row.cell, row.result
    return {
        **asdict(c),
        "area": round(c.area, 2),
        "mean_epochs": res.mean_epochs,
        "median_epochs": res.median_epochs,
        "n_runs": res.n_runs,
        "n_failures": res.n_failures,
        "capacity_limited": res.capacity_limited,
        "trials": [
            {"seed": t.seed, "epochs": t.epochs, "capacity_limited": t.capacity_limited,
             "placement": t.placement}
            for t in res.trials
        ],
    }


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        c, res = row.cell, row.result
        writer.writerow([
            c.study, c.init, c.placement or "", c.ratio, f"{c.r:g}", f"{c.delta:g}",
            f"{c.epsilon:g}", f"{c.area:.2f}", c.population, f"{res.mean_epochs:.2f}",
            res.n_runs, res.n_failures, "true" if res.capacity_limited else "false",
        ])
    return buf.getvalue()


def _write(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


# -- commands ---------------------------------------------------------------


def cmd_run(args) -> int:
    doc = load_document(args.config, RUN_KEYS) if args.config else {}
    for key in ("init", "population", "placement", "ratio", "rotation", "delta", "epsilon",
                "seed", "max_epochs"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    cfg, init = run_config(doc)
    try:
        state = build_state(init, cfg)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY

    observer = None
    trace_rows: list = []
    if args.trace:
        def observer(st):
            dists = st.distances_to_target()
            for agent, (x, y) in enumerate(st.positions.tolist()):
                trace_rows.append([st.epoch, agent, repr(x), repr(y), repr(float(dists[agent]))])

    epochs = run_until_stable(state, cfg, observer)
    if args.trace:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        writer.writerows(trace_rows)
        _write(args.trace, buf.getvalue())
    print("NOT-STABLE" if epochs is None else epochs)
    return EXIT_OK


def table_spec(table_id: str, args) -> SweepSpec:
    study, init = TABLES[table_id]
    kw = {"study": study, "inits": (init,), "base_seed": args.seed, "max_epochs": args.max_epochs,
          "workers": args.workers}
    if args.reps is not None:
        kw["reps"] = kw["boxed_reps"] = args.reps
    if args.populations:
        kw["populations"] = tuple(args.populations)
    return SweepSpec(**kw)


def cmd_table(args) -> int:
    rows = run_sweep(table_spec(args.table_id, args))
    if args.json:
        text = json.dumps([row_record(r) for r in rows], indent=2) + "\n"
    else:
        text = render_table(args.table_id, rows)
    _write(args.out, text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = load_document(args.config, SWEEP_KEYS)
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.reps is not None:
        doc["reps"] = doc["boxed_reps"] = args.reps
    if args.max_epochs is not None:
        doc["max_epochs"] = args.max_epochs
    spec = sweep_spec(doc, args.workers)
    if args.out is not None:
        out = Path(args.out)
        if not out.parent.is_dir():
            print(f"cannot write {out}: directory does not exist", file=sys.stderr)
            return EXIT_OUTPUT
    rows = run_sweep(spec)
    text = json.dumps([row_record(r) for r in rows], indent=2) + "\n" if args.json else sweep_csv(rows)
    _write(args.out, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sharks", description="Target-circling swarm simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one trial")
    run.add_argument("--config", help="YAML file with run parameters")
    run.add_argument("--init", choices=INIT_KINDS)
    run.add_argument("--population", type=int)
    run.add_argument("--placement", choices=[p.value for p in BoxPlacement])
    run.add_argument("--ratio", choices=sorted(RATIOS))
    run.add_argument("--rotation", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--epsilon", type=float)
    run.add_argument("--seed", type=int)
    run.add_argument("--max-epochs", dest="max_epochs", type=int)
    run.add_argument("--trace", help="write per-epoch positions as CSV")
    run.set_defaults(func=cmd_run)

    table = sub.add_parser("table", help="reproduce one results table")
    table.add_argument("table_id", choices=list(TABLES))
    table.add_argument("--reps", type=int, help="repetitions per cell (and per box placement)")
    table.add_argument("--seed", type=int, default=0)
    table.add_argument("--max-epochs", dest="max_epochs", type=int, default=2000)
    table.add_argument("--populations", type=int, nargs="+")
    table.add_argument("--workers", type=int, default=1)
    table.add_argument("--json", action="store_true", help="emit full records instead of a table")
    table.add_argument("--out")
    table.set_defaults(func=cmd_table)

    sweep = sub.add_parser("sweep", help="run a sweep described by a YAML file")
    sweep.add_argument("config")
    sweep.add_argument("--out")
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--reps", type=int)
    sweep.add_argument("--max-epochs", dest="max_epochs", type=int)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--json", action="store_true")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT


if __name__ == "__main__":
    sys.exit(main())
