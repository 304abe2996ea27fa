"""Command-line front end: ``validate``, ``evolve``, ``evaluate`` and ``compare``.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import ContractError, ErgoCodesignError, ParseError
from .evo.evolve import EvolutionConfig, evolve, stats_csv
from .evo.fitness import FitnessReport
from .evo.genes import design_key
from .jsonio import Diagnostic, dumps, read_json
from .model.io import design_model, diagnose_model, model_from_dict
from .model.model import HardwareParams
from .report import compare_reports
from .scenario import Scenario, embedded_scenario, load_scenario, parse_scenario, same_skeleton

__all__ = ["main", "MANIFEST_VERSION"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3
MANIFEST_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


class _Writer:
    """Serialized artifact writer that records content hashes."""

    def __init__(self, out: Path):
        self.out = out
        self.hashes: dict[str, str] = {}

    def write(self, rel: str, text: str) -> None:
        path = self.out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.hashes[rel] = _sha256(text)


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _apply_solver_tol(sc: Scenario, tol: float | None) -> Scenario:
    return sc if tol is None else sc.with_solver(tol=tol)


def _load_design(path: Path, sc: Scenario) -> tuple[HardwareParams, dict]:
    data = read_json(path)
    diags = diagnose_model(data)
    if diags:
        raise ParseError(str(diags[0]), source=str(path), field=diags[0].path or None)
    model = model_from_dict(data)
    if not same_skeleton(model, sc.robot):
        raise ContractError(f"design {path} does not match the robot skeleton of scenario {sc.name}")
    return HardwareParams.nominal(model), data


def _report_json(report: FitnessReport, params: HardwareParams, sc: Scenario) -> dict:
    return {"design_key": design_key(params), "design": params.to_dict(sc.robot), **report.to_dict()}


def _dump_solutions(writer: _Writer, report: FitnessReport, prefix: str = "solutions") -> None:
    for c in report.cases:
        body = {"human": c.human, "load": c.load, "status": c.status, "message": c.message}
        if c.solution is not None:
            body["solution"] = c.solution.to_dict()
        writer.write(f"{prefix}/{c.human}__{c.load}.json", dumps(body))


# validate -------------------------------------------------------------------


def _validate_diagnostics(path: Path) -> list[Diagnostic]:
    try:
        data = read_json(path)
    except ParseError as exc:
        return [Diagnostic("parse.syntax", str(exc))]
    if isinstance(data, dict) and "humans" in data and "robot" in data:
        try:
            parse_scenario(data, base=path.parent, source=str(path), text=path.read_text())
        except ErgoCodesignError as exc:
            return [Diagnostic("scenario.invalid", str(exc), getattr(exc, "field", None) or "")]
        return []
    return diagnose_model(data)


def cmd_validate(args) -> int:
    path = _require_file(args.file)
    diags = _validate_diagnostics(path)
    for d in diags:
        print(f"{path}: {d}")
    if not diags:
        print(f"{path}: ok")
    return EXIT_OK if not diags else EXIT_INVALID


# evolve ---------------------------------------------------------------------


def _evolve_inputs(args) -> tuple[Scenario, EvolutionConfig, str]:
    path = _require_file(args.scenario)
    data = read_json(path)
    if isinstance(data, dict) and "manifest_version" in data:
        if data.get("command") != "evolve":
            raise ParseError("manifest does not describe an evolve run", source=str(path), field="command")
        sc = parse_scenario(data["scenario"], source=f"{path}#scenario")
        sc = replace(sc, solver=replace(sc.solver, **data["solver"]))
        cfg = EvolutionConfig(**data["evolution"])
        default_out = str(path.parent)
    else:
        sc = load_scenario(path)
        cfg = sc.evolution
        default_out = sc.output_dir
    sc = _apply_solver_tol(sc, args.solver_tol)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.generations is not None:
        cfg = replace(cfg, max_generations=args.generations)
    return sc, cfg, args.out or default_out


def cmd_evolve(args) -> int:
    sc, cfg, out = _evolve_inputs(args)
    writer = _Writer(Path(out))

    def progress(st):
        log.info("generation %d max %.6g", st.generation, st.max_fitness)

    res = evolve(cfg, sc.gene_space, sc.evaluator(fail_fast=True), sc.warm_start, args.threads, progress)
    writer.write("stats.csv", stats_csv(res.stats))
    writer.write("best_design.json", dumps(design_model(sc.robot, res.best)))
    # re-evaluate the best design in full so every case has a solution dump
    best = sc.evaluator(keep_solutions=True)(res.best)
    writer.write("best_report.json", dumps(_report_json(best, res.best, sc)))
    _dump_solutions(writer, best)
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "tool": "ergocodesign",
        "version": __version__,
        "command": "evolve",
        "seed": cfg.seed,
        "evolution": cfg.to_dict(),
        "solver": sc.solver.to_dict(),
        "scenario": embedded_scenario(sc),
    }
    manifest["config_sha256"] = _sha256(dumps(manifest))
    manifest["result"] = {
        "generations": len(res.stats),
        "stopped_by_improvement": res.stopped,
        "best_fitness": res.best_fitness,
        "best_design_key": design_key(res.best),
        "evaluations": len(res.reports),
    }
    manifest["artifacts"] = dict(sorted(writer.hashes.items()))
    writer.write("manifest.json", dumps(manifest))
    print(f"best fitness {res.best_fitness!r} after {len(res.stats)} generations; artifacts in {out}")
    return EXIT_OK


# evaluate -------------------------------------------------------------------


def cmd_evaluate(args) -> int:
    sc = _apply_solver_tol(load_scenario(_require_file(args.scenario)), args.solver_tol)
    params, _ = _load_design(_require_file(args.design), sc)
    report = sc.evaluator(keep_solutions=True).run(params, args.threads)
    writer = _Writer(Path(args.out or sc.output_dir))
    writer.write("report.json", dumps(_report_json(report, params, sc)))
    _dump_solutions(writer, report)
    for c in report.cases:
        print(f"{c.human} {c.load}: {c.status}")
    print(f"fitness {report.fitness!r}")
    return EXIT_OK


# compare --------------------------------------------------------------------


def cmd_compare(args) -> int:
    sc = _apply_solver_tol(load_scenario(_require_file(args.scenario)), args.solver_tol)
    if args.human:
        data = read_json(_require_file(args.human))
        diags = diagnose_model(data)
        if diags:
            raise ParseError(str(diags[0]), source=args.human)
        model = model_from_dict(data)
        if model.agent != "human":
            raise ContractError(f"{args.human} is not a human model")
        sc = sc.with_humans([(model.name, model)])
    if args.load:
        loads = [l for l in sc.loads if l.name == args.load]
        if not loads:
            raise ContractError(f"scenario {sc.name} has no load named {args.load!r}")
        sc = sc.with_loads(loads)
    pa, _ = _load_design(_require_file(args.design_a), sc)
    pb, _ = _load_design(_require_file(args.design_b), sc)
    ev = sc.evaluator()
    ra = ev.run(pa, args.threads)
    rb = ra if design_key(pa) == design_key(pb) else ev.run(pb, args.threads)
    cmp = compare_reports(ra, rb, dict(sc.humans), sc.robot.n_joints)
    cmp.designs = {"A": {"file": args.design_a, "key": design_key(pa)}, "B": {"file": args.design_b, "key": design_key(pb)}}
    writer = _Writer(Path(args.out or sc.output_dir))
    writer.write("robot_torques.csv", cmp.robot_csv())
    writer.write("human_torques.csv", cmp.human_csv())
    writer.write("back_torques.csv", cmp.back_csv())
    writer.write("comparison.json", dumps(cmp.to_dict()))
    writer.write("robot_torques.gp", cmp.gnuplot_script())
    print(f"robot torque change A vs B: {cmp.robot_change_percent:+.2f} %")
    for joint, v in cmp.back_change_percent.items():
        print(f"{joint} torque change A vs B: {v:+.2f} %")
    return EXIT_OK


# entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ergocodesign", description="Robot hardware co-design for human-robot load lifting.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=False):
        sp.add_argument("--out", help="output directory (default: the scenario's output_dir)")
        sp.add_argument("--threads", type=_positive_int, default=1, help="worker processes")
        sp.add_argument("--solver-tol", type=_positive_float, help="inner solver optimality tolerance")
        if seed:
            sp.add_argument("--seed", type=_u64, help="root seed (overrides the scenario)")

    sp = sub.add_parser("validate", help="check a model or scenario file")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("evolve", help="run the genetic search (or replay a run manifest)")
    sp.add_argument("scenario", help="scenario file or manifest.json of an earlier run")
    sp.add_argument("--generations", type=_positive_int, help="generation cap (overrides the scenario)")
    common(sp, seed=True)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("evaluate", help="evaluate one design on a scenario")
    sp.add_argument("design", help="design (robot model) file")
    sp.add_argument("scenario")
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="compare two designs on a scenario")
    sp.add_argument("design_a")
    sp.add_argument("design_b")
    sp.add_argument("scenario")
    sp.add_argument("--human", help="human model replacing the scenario's humans")
    sp.add_argument("--load", help="restrict to the scenario load with this name")
    common(sp)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ContractError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ErgoCodesignError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
