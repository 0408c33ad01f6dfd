"""Command-line interface.

Commands: check, correspondence, pfvs, simulate, portrait, limit-net.
Exit codes: 0 success (or verdict one_to_one), 1 verdict partial,
2 unreadable input or syntax error, 3 semantic error, 4 verdict failed.
JSON output is canonical: sorted keys, floats at 12 significant digits,
so identical inputs and seed produce byte-identical files. The
SSMAP_THREADS environment variable caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correspondence import SolverConfig, correspondence_report, induced_network
from .discrete import (
    fixed_points,
    min_pfvs,
    phase_portrait,
    positive_cycles,
    wiring_diagram_continuous,
    wiring_diagram_discrete,
)
from .errors import ParseError, SemanticError, SsmapError
from .hill import eval_system, sample_range_supremum
from .modelfile import ModelDocument, parse_model
from .simulate import integrate_ode

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_FAILED = 4


def _canonical(obj):
    """Recursively normalize for byte-stable JSON output."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return [_canonical(obj.real), _canonical(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".12g"))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str) -> ModelDocument:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}", 0)
    return parse_model(text, name_hint=p.stem)


def _margins(arg: str | None, n_vars: int):
    if arg is None:
        return 0.05
    parts = [float(v) for v in arg.split(",") if v]
    if len(parts) == 1:
        return parts[0]
    if len(parts) != n_vars:
        raise SemanticError(f"--delta lists {len(parts)} margins for {n_vars} variables")
    return parts


def _state_list(state) -> list[int]:
    return [int(v) for v in state]


def cmd_check(args) -> int:
    doc = _load(args.model)
    levels = [m + 1 for m in doc.space.levels]
    if len(set(levels)) == 1:
        shape = f"{doc.space.n_vars} vars, {levels[0]} levels each, {doc.space.state_count} states"
    else:
        shape = (f"{doc.space.n_vars} vars, levels {'/'.join(map(str, levels))}, "
                 f"{doc.space.state_count} states")
    parts = [shape]
    if doc.has_hill:
        parts.append("hill equations")
        try:
            sys_ = doc.build_hill(args.n)
            sup = sample_range_supremum(sys_, seed=args.seed)
            parts.append(f"sampled sup of the map {_fmt(sup)}")
        except SemanticError:
            parts.append("exponent slots unassigned (set values, or pass --n)")
    if doc.table is not None:
        parts.append("truth table")
    print("; ".join(parts))
    return EXIT_OK


def cmd_correspondence(args) -> int:
    if args.format == "csv":
        raise SemanticError("correspondence reports support json or text output")
    doc = _load(args.model)
    hill = doc.build_hill(args.n)
    scheme = doc.scheme()
    margin = _margins(args.delta, doc.n_vars)
    cfg = SolverConfig(tol=args.tol) if args.tol else SolverConfig()
    report = correspondence_report(
        hill, scheme, margin=margin, audit=args.audit, cfg=cfg, seed=args.seed)

    payload = {
        "verdict": report.verdict,
        "induced_table": [
            {"input": _state_list(x), "output": _state_list(y)}
            for x, y in sorted(report.induced.table.items())
        ],
        "fixed_points": [_state_list(s) for s in report.discrete_fixed_points],
        "regions": [
            {"state": _state_list(s), "status": v.status}
            for s, v in sorted(report.region_verdicts.items())
        ],
        "steady_states": [
            {
                "point": rec.point,
                "residual": rec.residual,
                "eigenvalues": [[float(e.real), float(e.imag)] for e in rec.eigenvalues]
                if rec.eigenvalues is not None else None,
                "stability": rec.stability,
                "gershgorin_certified": rec.gershgorin_certified,
                "matched": _state_list(rec.matched_discrete_fixed_point)
                if rec.matched_discrete_fixed_point is not None else None,
                "distance_to_limit": rec.distance_to_limit,
            }
            for rec in report.steady_states
        ],
        "contraction": {
            "sup": report.contraction.sampled_sup_norm,
            "bound": report.contraction.bound,
            "passes": report.contraction.passes,
            "samples_per_box": report.contraction.samples_per_box,
            "method": report.contraction.method,
        },
        "excluded_measure": report.excluded_measure,
        "degenerate_states": [
            {"state": _state_list(s), "on_threshold": [int(v) + 1 for v in coords]}
            for s, coords in sorted(report.induced_warnings.items())
        ],
        "reasons": list(report.reasons),
    }
    if args.format == "text":
        lines = [f"verdict: {report.verdict}"]
        for rec in report.steady_states:
            lines.append(
                f"steady state {[_fmt(v) for v in rec.point]} in region "
                f"{_state_list(rec.region)}: {rec.stability}, residual {_fmt(rec.residual)}")
        lines.append(
            f"contraction: sup {_fmt(report.contraction.sampled_sup_norm)} vs bound "
            f"{_fmt(report.contraction.bound)} -> {'pass' if report.contraction.passes else 'fail'}")
        for r in report.reasons:
            lines.append(f"reason: {r}")
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(_dump_json(payload), args.out)
    return {"one_to_one": EXIT_OK, "partial": EXIT_PARTIAL}.get(report.verdict, EXIT_FAILED)


def cmd_pfvs(args) -> int:
    doc = _load(args.model)
    if doc.has_hill:
        hill = doc.build_hill(args.n) if args.n is not None else _structural_hill(doc)
        graph = wiring_diagram_continuous(hill)
    else:
        graph = wiring_diagram_discrete(doc.table)
    cycles = [c for c in positive_cycles(graph) if c.is_positive]
    result = min_pfvs(graph, doc.space)
    payload = {
        "pfvs": [v + 1 for v in result.vertices],
        "bound": result.bound,
        "positive_cycles": [
            {"vertices": [v + 1 for v in c.vertices], "sign": c.sign} for c in cycles
        ],
    }
    if args.format == "text":
        lines = [f"pfvs: {payload['pfvs']}", f"bound: {result.bound}",
                 f"positive cycles: {len(cycles)}"]
        _write("\n".join(lines) + "\n", args.out)
    else:
        _write(_dump_json(payload), args.out)
    return EXIT_OK


def _structural_hill(doc: ModelDocument):
    """Hill system for wiring analysis only; unassigned exponents do not
    matter for the structural scan, so default them to 2."""
    try:
        return doc.build_hill()
    except SemanticError:
        return doc.build_hill(2.0)


def cmd_simulate(args) -> int:
    doc = _load(args.model)
    hill = doc.build_hill(args.n)
    if args.x0 is None:
        raise SemanticError("simulate needs --x0 (comma-separated coordinates)")
    x0 = [float(v) for v in args.x0.split(",") if v]
    traj = integrate_ode(hill, x0, dt=args.dt, t_end=args.t_end)
    names = ",".join(doc.variables)
    rows = [f"t,{names}"]
    for t, p in zip(traj.times, traj.points):
        rows.append(",".join([_fmt(t)] + [_fmt(v) for v in p]))
    _write("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def _discrete_network(doc: ModelDocument, n_override):
    if doc.table is not None:
        return doc.table
    mn, _ = induced_network(_resolved_hill(doc, n_override), doc.scheme())
    return mn


def _resolved_hill(doc: ModelDocument, n_override):
    return doc.build_hill(n_override)


def cmd_portrait(args) -> int:
    doc = _load(args.model)
    mn = _discrete_network(doc, args.n)
    portrait = phase_portrait(mn)
    fps = set(portrait.fixed_points)
    header = (",".join(doc.variables) + ","
              + ",".join(f"f{v}" for v in doc.variables) + ",fixed")
    rows = [header]
    for x, y in portrait.arrows:
        rows.append(",".join(map(str, list(x) + list(y))) + ("," + ("1" if x in fps else "0")))
    _write("\n".join(rows) + "\n", args.out)

    if args.field_out:
        if doc.n_vars != 2:
            print("vector-field grid is only emitted for 2-variable models; skipped",
                  file=sys.stderr)
            return EXIT_OK
        hill = doc.build_hill(args.n)
        decay = np.asarray(hill.decay)
        axis = np.linspace(0.0, 1.0, args.grid)
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
        vals = eval_system(hill, pts, check_range=False)
        deriv = decay[None, :] * (vals - pts)
        lines = [",".join(doc.variables) + "," + ",".join(f"d{v}" for v in doc.variables)]
        for p, d in zip(pts, deriv):
            lines.append(",".join(_fmt(v) for v in (*p, *d)))
        Path(args.field_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_limit_net(args) -> int:
    doc = _load(args.model)
    hill = doc.build_hill(args.n)
    mn, flags = induced_network(hill, doc.scheme())
    if args.format == "json":
        payload = {
            "rows": [
                {
                    "input": _state_list(x),
                    "output": _state_list(y),
                    "on_threshold": [v + 1 for v in flags.get(x, ())],
                }
                for x, y in sorted(mn.table.items())
            ],
            "fixed_points": [_state_list(s) for s in fixed_points(mn)],
        }
        _write(_dump_json(payload), args.out)
    else:
        lines = []
        for x, y in sorted(mn.table.items()):
            line = " ".join(map(str, x)) + " -> " + " ".join(map(str, y))
            if x in flags:
                names = ", ".join(doc.variables[i] for i in flags[x])
                line += f"   # limit on threshold: {names}"
            lines.append(line)
        _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("model", help="path to a model file")
    p.add_argument("--n", type=float, default=None,
                   help="uniform exponent override applied to every slot")
    p.add_argument("--delta", default=None,
                   help="inset margin, one value or a comma list per variable (default 0.05)")
    p.add_argument("--tol", type=float, default=None, help="solver residual tolerance")
    p.add_argument("--audit", action="store_true",
                   help="also search boxes whose state is not a discrete fixed point")
    p.add_argument("--seed", type=int, default=0, help="seed for sampling")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssmap",
        description="Steady-state correspondence between sigmoidal systems "
                    "and multistate networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a model file")
    _add_common(p)
    p.set_defaults(fn=cmd_check, fmt_default="text")

    p = sub.add_parser("correspondence", help="full steady-state correspondence report")
    _add_common(p)
    p.set_defaults(fn=cmd_correspondence, fmt_default="json")

    p = sub.add_parser("pfvs", help="positive feedback vertex set and steady-state bound")
    _add_common(p)
    p.set_defaults(fn=cmd_pfvs, fmt_default="json")

    p = sub.add_parser("simulate", help="integrate the continuous system, CSV output")
    _add_common(p)
    p.add_argument("--x0", default=None, help="initial point, comma-separated")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=100.0, dest="t_end")
    p.set_defaults(fn=cmd_simulate, fmt_default="csv")

    p = sub.add_parser("portrait", help="discrete phase portrait (and 2-D vector field)")
    _add_common(p)
    p.add_argument("--field-out", default=None, dest="field_out",
                   help="write a vector-field grid CSV here (2-variable models)")
    p.add_argument("--grid", type=int, default=21, help="vector-field points per axis")
    p.set_defaults(fn=cmd_portrait, fmt_default="csv")

    p = sub.add_parser("limit-net", help="print the induced truth table")
    _add_common(p)
    p.set_defaults(fn=cmd_limit_net, fmt_default="text")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.fmt_default
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SsmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
