"""Command-line front end.

Subcommands: generate, solve-newton, solve-anneal, brute, sweep,
statement.  Common flags: --seed, --config (JSON file whose keys mirror
the flag names; explicit flags win), --out, --threads.

Result files separate a deterministic "payload" (resolved config,
scenario reference, solution records) from a "meta" block holding
timestamps and wall time, so identical seeded runs produce identical
payloads.  Thread count affects scheduling only, never results, and is
deliberately left out of the payload.

Exit codes: 0 success; 2 validation or parse failure; 3 solver finished
without a converged/criteria-satisfying solution; 4 instance above an
enumeration size cap.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import annealer, ising, newton
from . import scenario as scenario_io
from . import statement
from .errors import QcppError, SizeCapError, ValidationError
from .quantum_core import (
    DensityMatrix,
    fidelity,
    outer_product,
    von_neumann_entropy,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_SIZE_CAP = 4

_NEWTON_STREAM = 1
_ANNEAL_STREAM = 2

# keys that shape execution but not results; kept out of result payloads
_EPHEMERAL_KEYS = ("threads",)


@dataclass(frozen=True)
class SolutionRecord:
    """One candidate solution evaluated against the true sources."""

    kind: str
    solution_index: int
    weights: tuple[float, ...] | None
    spins: tuple[int, ...] | None
    loss_or_energy: float
    fidelities: tuple[float, ...]
    matched_source: int
    matched_fidelity: float
    entropy: float
    min_eigenvalue: float
    detail: dict

    def __post_init__(self):
        if any(not 0.0 <= f <= 1.0 for f in self.fidelities):
            raise ValidationError("fidelities must lie in [0, 1]")
        if self.matched_source != int(np.argmax(self.fidelities)):
            raise ValidationError("matched_source must be the argmax fidelity")


def _derived_seed(seed: int, stream: int) -> int:
    """Solver seed decoupled from a scenario drawn with the same user seed."""
    ss = np.random.SeedSequence(entropy=[int(seed), int(stream)])
    return int(ss.generate_state(1, np.uint64)[0])


def _source_matrices(s: scenario_io.Scenario) -> list[DensityMatrix]:
    return [outer_product(p) for p in s.sources]


def _evaluate(rho_f: DensityMatrix, sources: Sequence[DensityMatrix]):
    """Fidelities to each source plus spectral diagnostics, all clamped
    so indefinite candidates are reportable rather than fatal."""
    fids = tuple(float(fidelity(rho_f, src, psd_tol=None)) for src in sources)
    matched = int(np.argmax(fids))
    return {
        "fidelities": fids,
        "matched_source": matched,
        "matched_fidelity": fids[matched],
        "entropy": float(von_neumann_entropy(rho_f, psd_tol=None)),
        "min_eigenvalue": float(rho_f.min_eigenvalue()),
    }


def _cross_fidelities(sources: Sequence[DensityMatrix]) -> dict[str, float]:
    out = {}
    for i in range(len(sources)):
        for j in range(i + 1, len(sources)):
            out[f"cross_fidelity_{i + 1}_{j + 1}"] = float(
                fidelity(sources[i], sources[j])
            )
    return out


def _scenario_reference(path: Path) -> dict:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return {"path": str(path), "sha256": digest}


def _embeddable(config: dict) -> dict:
    return {k: v for k, v in config.items() if k not in _EPHEMERAL_KEYS}


def _write_results(out, config, scenario_ref, records, started):
    payload = {
        "config": _embeddable(config),
        "scenario": scenario_ref,
        "records": [asdict(r) for r in records],
    }
    doc = {
        "payload": payload,
        "meta": {
            "timestamp_utc": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": time.monotonic() - started,
        },
    }
    Path(out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(out, config, fieldnames, rows):
    with open(out, "w", newline="") as fh:
        fh.write("# config " + json.dumps(_embeddable(config), sort_keys=True) + "\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------- commands


def cmd_generate(cfg: dict) -> int:
    s = scenario_io.generate_scenario(
        cfg["d"], cfg["n_sources"], cfg["m_detectors"], cfg["seed"],
        min_overlap=cfg["min_overlap"],
    )
    scenario_io.save_scenario(s, cfg["out"])
    sources = _source_matrices(s)
    print(
        f"scenario d={s.d} N={s.n_sources} M={s.m_detectors} "
        f"seed={s.seed} -> {cfg['out']}"
    )
    for i in range(len(sources)):
        for j in range(i + 1, len(sources)):
            print(
                f"F(rho_{i + 1}, rho_{j + 1}) = "
                f"{fidelity(sources[i], sources[j]):.6f}"
            )
    return EXIT_OK


def cmd_solve_newton(cfg: dict) -> int:
    started = time.monotonic()
    s = scenario_io.load_scenario(cfg["scenario"])
    sources = _source_matrices(s)
    solver_cfg = newton.NewtonConfig(
        loss_tol=cfg["loss_tol"], max_iterations=cfg["max_iterations"]
    )
    solutions = newton.multi_restart(
        s.detectors, cfg["restarts"], cfg["seed"], solver_cfg
    )
    converged = bool(solutions)
    if not converged:
        # surface the first restart as a diagnostic record
        child = np.random.SeedSequence(cfg["seed"]).spawn(1)[0]
        init = newton.sample_initial_weights(
            s.m_detectors, np.random.default_rng(child)
        )
        solutions = [newton.newton_solve(s.detectors, init, solver_cfg)]
    records = []
    for idx, report in enumerate(solutions):
        records.append(
            SolutionRecord(
                kind="newton",
                solution_index=idx,
                weights=tuple(float(x) for x in report.w_final.w),
                spins=None,
                loss_or_energy=float(report.loss_final),
                detail={
                    "converged": report.converged,
                    "iterations": report.iterations,
                },
                **_evaluate(report.rho_f, sources),
            )
        )
    _write_results(
        cfg["out"], cfg, _scenario_reference(cfg["scenario"]), records, started
    )
    print(
        f"{len(records)} solution(s), best loss {records[0].loss_or_energy:.3e}"
        f" -> {cfg['out']}"
    )
    return EXIT_OK if converged else EXIT_NO_CONVERGENCE


def _anneal_config(cfg: dict, seed: int) -> annealer.AnnealConfig:
    return annealer.AnnealConfig(
        initial_temperature=cfg["initial_temperature"],
        flips_per_epoch=cfg["flips_per_epoch"],
        max_epochs=cfg["max_epochs"],
        entropy_threshold=cfg["entropy_threshold"],
        psd_tolerance=cfg["psd_tolerance"],
        seed=seed,
        restarts=1,
        move_strategy=cfg["move_strategy"],
        track_best=not cfg["return_final_state"],
    )


def _trace_path(base: str, restart: int, restarts: int) -> str:
    if restarts == 1:
        return base
    p = Path(base)
    return str(p.with_name(f"{p.stem}.r{restart}{p.suffix}"))


def _write_trace(path: str, rows: Sequence[annealer.EpochTrace]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "epoch",
                "temperature",
                "energy",
                "entropy",
                "min_eigenvalue",
                "acceptance_rate",
            ],
        )
        writer.writeheader()
        writer.writerows(asdict(r) for r in rows)


def cmd_solve_anneal(cfg: dict) -> int:
    started = time.monotonic()
    s = scenario_io.load_scenario(cfg["scenario"])
    sources = _source_matrices(s)
    restarts = cfg["restarts"]
    chain_seeds = np.random.SeedSequence(cfg["seed"]).generate_state(
        restarts, np.uint64
    )

    def run(r: int) -> annealer.AnnealReport:
        return annealer.anneal(s.detectors, _anneal_config(cfg, int(chain_seeds[r])))

    if cfg["threads"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
            reports = list(pool.map(run, range(restarts)))
    else:
        reports = [run(r) for r in range(restarts)]

    records = []
    for r, report in enumerate(reports):
        trace_path = None
        if cfg["trace"]:
            trace_path = _trace_path(cfg["trace"], r, restarts)
            _write_trace(trace_path, report.trace)
        records.append(
            SolutionRecord(
                kind="anneal",
                solution_index=r,
                weights=None,
                spins=tuple(int(x) for x in report.spins_final.spins),
                loss_or_energy=float(report.energy_final),
                detail={
                    "chain_seed": int(chain_seeds[r]),
                    "stopped_by": report.stopped_by,
                    "epochs_run": report.epochs_run,
                    "trace_path": trace_path,
                },
                **_evaluate(report.rho_f, sources),
            )
        )
    _write_results(
        cfg["out"], cfg, _scenario_reference(cfg["scenario"]), records, started
    )
    met = sum(1 for r in reports if r.stopped_by == "criteria_met")
    best = min(records, key=lambda rec: rec.loss_or_energy)
    print(
        f"{met}/{restarts} chain(s) met the stopping criteria, "
        f"best energy {best.loss_or_energy:.6e} -> {cfg['out']}"
    )
    return EXIT_OK if met else EXIT_NO_CONVERGENCE


def cmd_brute(cfg: dict) -> int:
    started = time.monotonic()
    s = scenario_io.load_scenario(cfg["scenario"])
    sources = _source_matrices(s)
    spins, energy = ising.brute_force_ground_state(s.detectors)
    rho_f = annealer.reconstruct_density(spins, s.detectors)
    record = SolutionRecord(
        kind="brute",
        solution_index=0,
        weights=None,
        spins=tuple(int(x) for x in spins.spins),
        loss_or_energy=float(energy),
        detail={},
        **_evaluate(rho_f, sources),
    )
    _write_results(
        cfg["out"], cfg, _scenario_reference(cfg["scenario"]), [record], started
    )
    print(f"sector minimum {energy:.6e} -> {cfg['out']}")
    return EXIT_OK


def _sweep_cell(cfg: dict, m: int, seed: int) -> list[dict]:
    s = scenario_io.generate_scenario(cfg["d"], cfg["n_sources"], m, seed)
    sources = _source_matrices(s)
    cross = _cross_fidelities(sources)
    base = {"kind": cfg["kind"], "m": m, "seed": seed}
    rows = []
    if cfg["kind"] == "newton":
        solver_cfg = newton.NewtonConfig(
            loss_tol=cfg["loss_tol"], max_iterations=cfg["max_iterations"]
        )
        solutions = newton.multi_restart(
            s.detectors, cfg["restarts"], _derived_seed(seed, _NEWTON_STREAM),
            solver_cfg,
        )
        for idx, report in enumerate(solutions):
            ev = _evaluate(report.rho_f, sources)
            row = dict(base, solution_index=idx, **cross)
            for k, fid in enumerate(ev["fidelities"]):
                row[f"fidelity_{k + 1}"] = fid
            row["loss_or_energy"] = float(report.loss_final)
            rows.append(row)
    else:
        chain_seeds = np.random.SeedSequence(
            _derived_seed(seed, _ANNEAL_STREAM)
        ).generate_state(cfg["restarts"], np.uint64)
        reports = [
            annealer.anneal(s.detectors, _anneal_config(cfg, int(cs)))
            for cs in chain_seeds
        ]
        best = min(
            reports,
            key=lambda r: (r.stopped_by != "criteria_met", r.energy_final),
        )
        ev = _evaluate(best.rho_f, sources)
        row = dict(base, solution_index=0, **cross)
        for k, fid in enumerate(ev["fidelities"]):
            row[f"fidelity_{k + 1}"] = fid
        row["loss_or_energy"] = float(best.energy_final)
        rows.append(row)
    return rows


def cmd_sweep(cfg: dict) -> int:
    cells = [(m, seed) for m in cfg["m_list"] for seed in cfg["seeds"]]
    if cfg["threads"] > 1:
        with ThreadPoolExecutor(max_workers=cfg["threads"]) as pool:
            chunks = list(pool.map(lambda c: _sweep_cell(cfg, *c), cells))
    else:
        chunks = [_sweep_cell(cfg, *c) for c in cells]
    rows = [row for chunk in chunks for row in chunk]
    n = cfg["n_sources"]
    fieldnames = (
        ["kind", "m", "seed", "solution_index"]
        + [f"fidelity_{k + 1}" for k in range(n)]
        + [
            f"cross_fidelity_{i + 1}_{j + 1}"
            for i in range(n)
            for j in range(i + 1, n)
        ]
        + ["loss_or_energy"]
    )
    _write_csv(cfg["out"], cfg, fieldnames, rows)
    print(f"{len(rows)} row(s) -> {cfg['out']}")
    return EXIT_OK


def cmd_statement(cfg: dict) -> int:
    result = statement.statement_sweep(
        cfg["n_sources"],
        cfg["dim"],
        cfg["m_list"],
        cfg["trials"],
        cfg["seed"],
        target_k=cfg["target"],
        nested=not cfg["independent"],
    )
    rows = [asdict(r) for r in result.rows]
    _write_csv(cfg["out"], cfg, ["trial", "m", "inverse_m", "residual"], rows)
    for line in result.summary:
        print(
            f"M={line.m}: mean {line.mean_residual:.6f} "
            f"min {line.min_residual:.6f} max {line.max_residual:.6f}"
        )
    return EXIT_OK


# ------------------------------------------------------------ arg handling

_HANDLERS = {
    "generate": cmd_generate,
    "solve-newton": cmd_solve_newton,
    "solve-anneal": cmd_solve_anneal,
    "brute": cmd_brute,
    "sweep": cmd_sweep,
    "statement": cmd_statement,
}

_DEFAULTS: dict[str, dict] = {
    "generate": {
        "d": 8, "n_sources": 3, "m_detectors": 7, "seed": 0,
        "min_overlap": 1e-3, "out": None,
    },
    "solve-newton": {
        "scenario": None, "seed": 0, "restarts": 50, "loss_tol": 1e-12,
        "max_iterations": 1000, "out": None,
    },
    "solve-anneal": {
        "scenario": None, "seed": 0, "restarts": 1,
        "initial_temperature": 1.0, "flips_per_epoch": 12000,
        "max_epochs": 500, "entropy_threshold": 0.05, "psd_tolerance": 1e-6,
        "move_strategy": "pair_exchange", "return_final_state": False,
        "trace": None, "threads": 1, "out": None,
    },
    "brute": {"scenario": None, "out": None},
    "sweep": {
        "kind": None, "d": 8, "n_sources": 3, "m_list": None, "seeds": None,
        "restarts": None, "loss_tol": 1e-12, "max_iterations": 1000,
        "initial_temperature": 1.0, "flips_per_epoch": 12000,
        "max_epochs": 500, "entropy_threshold": 0.05, "psd_tolerance": 1e-6,
        "move_strategy": "pair_exchange", "return_final_state": False,
        "threads": 1, "out": None,
    },
    "statement": {
        "n_sources": 5, "dim": 8, "m_list": [5, 9, 13, 17, 21], "trials": 20,
        "seed": 0, "target": 0, "independent": False, "out": None,
    },
}

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcpp",
        description="Recover pure states from mixed-signal density matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, with_threads=False):
        sp.add_argument("--seed", type=int)
        sp.add_argument("--config", help="JSON file of defaults; flags override")
        sp.add_argument("--out", help="output path")
        if with_threads:
            sp.add_argument("--threads", type=int)

    g = sub.add_parser("generate", help="draw and save a seeded scenario")
    g.add_argument("--d", type=int)
    g.add_argument("--n-sources", type=int)
    g.add_argument("--m-detectors", type=int)
    g.add_argument("--min-overlap", type=float)
    common(g)

    sn = sub.add_parser("solve-newton", help="damped Newton from random restarts")
    sn.add_argument("scenario", nargs="?")
    sn.add_argument("--restarts", type=int)
    sn.add_argument("--loss-tol", type=float)
    sn.add_argument("--max-iterations", type=int)
    common(sn)

    sa = sub.add_parser("solve-anneal", help="simulated annealing over spin weights")
    sa.add_argument("scenario", nargs="?")
    sa.add_argument("--restarts", type=int)
    sa.add_argument("--initial-temperature", type=float)
    sa.add_argument("--flips-per-epoch", type=int)
    sa.add_argument("--max-epochs", type=int)
    sa.add_argument("--entropy-threshold", type=float)
    sa.add_argument("--psd-tolerance", type=float)
    sa.add_argument("--move-strategy", choices=("pair_exchange", "uniform_pair"))
    sa.add_argument(
        "--return-final-state", action=argparse.BooleanOptionalAction
    )
    sa.add_argument("--trace", help="per-epoch diagnostics CSV path")
    common(sa, with_threads=True)

    b = sub.add_parser("brute", help="exact sector minimum by enumeration")
    b.add_argument("scenario", nargs="?")
    common(b)

    sw = sub.add_parser("sweep", help="solver fidelities across M and seeds")
    sw.add_argument("--kind", choices=("newton", "anneal"))
    sw.add_argument("--d", type=int)
    sw.add_argument("--n-sources", type=int)
    sw.add_argument("--m-list", type=int, nargs="+")
    sw.add_argument("--seeds", type=int, nargs="+")
    sw.add_argument("--restarts", type=int)
    sw.add_argument("--loss-tol", type=float)
    sw.add_argument("--max-iterations", type=int)
    sw.add_argument("--initial-temperature", type=float)
    sw.add_argument("--flips-per-epoch", type=int)
    sw.add_argument("--max-epochs", type=int)
    sw.add_argument("--entropy-threshold", type=float)
    sw.add_argument("--psd-tolerance", type=float)
    sw.add_argument("--move-strategy", choices=("pair_exchange", "uniform_pair"))
    sw.add_argument(
        "--return-final-state", action=argparse.BooleanOptionalAction
    )
    common(sw, with_threads=True)

    st = sub.add_parser("statement", help="sign-vector residual sweep")
    st.add_argument("--n-sources", type=int)
    st.add_argument("--dim", type=int)
    st.add_argument("--m-list", type=int, nargs="+")
    st.add_argument("--trials", type=int)
    st.add_argument("--target", type=int)
    st.add_argument(
        "--independent",
        action=argparse.BooleanOptionalAction,
        help="redraw all signals at each M instead of nesting",
    )
    common(st)

    return parser


def _resolve(args: argparse.Namespace) -> dict:
    defaults = _DEFAULTS[args.command]
    file_cfg = {}
    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ValidationError(
                f"unknown config keys for {args.command}: {sorted(unknown)}"
            )
    may_stay_unset = {"trace"}
    if args.command == "sweep":
        may_stay_unset.add("restarts")
    cfg = {"command": args.command}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
        if cfg[key] is None and key not in may_stay_unset:
            raise ValidationError(f"missing required parameter: {key}")
    if args.command == "sweep" and cfg["restarts"] is None:
        cfg["restarts"] = 50 if cfg["kind"] == "newton" else 1
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](_resolve(args))
    except SizeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_CAP
    except (QcppError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
