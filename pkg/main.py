from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from errors import DegenerateSystem
from formatters import format_complex, format_gram, format_result, format_values
from greedy import GreedyConfig, PolarGrid, poafd
from kernels import ParameterTuple
from nbest import NBestConfig, objective, solve
from ortho import gram_schmidt, lic_check
from pdf_reports import PDFReportGenerator
from probes import (
    DEFAULT_DEPTH,
    bvc_probe,
    dbvc_probe,
    probe_rows,
    radial_sequence,
    vanishing_probe,
)
from rational import admissible, blaschke_form_of, tm_to_rational
from results import (
    ApproxResult,
    build_result,
    complex_to_json,
    float_from_json,
    load_json,
    parameters_from_result_dict,
    result_to_dict,
    space_from_dict,
    space_to_dict,
    write_csv,
    write_json,
)
from settings import load_defaults
from space import SpaceSpec, norm
from targets import BUILTIN_TARGETS, TargetSpec

logger = logging.getLogger("nbest-cli")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEGENERATE = 3


def _complex_arg(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"numero complesso non valido: '{text}'") from exc


def _grid_arg(text: str) -> PolarGrid:
    try:
        return PolarGrid.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser(defaults: dict[str, Any]) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", choices=("hardy", "bergman"), default="hardy")
    common.add_argument("--alpha", type=float, default=0.0)
    common.add_argument("--truncation", type=int, default=defaults["truncation"])
    common.add_argument("--rmax", type=float, default=defaults["rmax"])
    common.add_argument("--target", choices=sorted(BUILTIN_TARGETS), default="f1",
                        help="funzione del corpus (ignorata se --input contiene un target)")
    common.add_argument("--input", type=Path, help="JSON con il target o con un risultato precedente")
    common.add_argument("--output", type=Path, help="file di uscita (JSON, PDF per 'report')")
    common.add_argument("--csv", type=Path, help="traccia o valori in CSV")
    common.add_argument("--seed", type=int, default=defaults["seed"])
    common.add_argument("--verbose", action="store_true")

    default_grid = f"{defaults['grid_radial']}x{defaults['grid_angular']}"
    parser = argparse.ArgumentParser(prog="nbest", description="Approssimazione n-best con nuclei riproducenti.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("poafd", parents=[common], help="rho-Weak-POAFD greedy")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--grid", type=_grid_arg, default=_grid_arg(default_grid))
    p.add_argument("--no-refine", action="store_true")

    p = sub.add_parser("nbest", parents=[common], help="approssimazione n-best multi-start")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--starts", type=int, default=defaults["starts"])
    p.add_argument("--grid", type=_grid_arg, default=_grid_arg("16x32"), help="griglia della discesa per coordinate")
    p.add_argument("--greedy-grid", type=_grid_arg, default=_grid_arg(default_grid))
    p.add_argument("--tol", type=float, default=defaults["tol"])
    p.add_argument("--max-cycles", type=int, default=defaults["max_cycles"])
    p.add_argument("--workers", type=int, default=defaults["workers"])

    p = sub.add_parser("probe", parents=[common], help="sonde DBVC / BVC / annullamento")
    p.add_argument("kind", choices=("dbvc", "bvc", "vanishing"))
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--z", type=_complex_arg, default=0j)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--params", type=_complex_arg, nargs="*", default=[])

    p = sub.add_parser("check", parents=[common], help="verifica n-LIC")
    p.add_argument("kind", choices=("lic",))
    p.add_argument("--params", type=_complex_arg, nargs="+", required=True)

    p = sub.add_parser("eval", parents=[common], help="ricalcola A(f; a)")
    p.add_argument("--params", type=_complex_arg, nargs="*", default=None)

    p = sub.add_parser("to-rational", parents=[common], help="forma p/q della proiezione (Hardy)")
    p.add_argument("--params", type=_complex_arg, nargs="*", default=None)

    sub.add_parser("report", parents=[common], help="report PDF di un risultato JSON")
    return parser


# ------------------------------------------------------------------ #
#  Input                                                              #
# ------------------------------------------------------------------ #

def _space(args: argparse.Namespace) -> SpaceSpec:
    return SpaceSpec(kind=args.space, alpha=args.alpha, truncation=args.truncation, r_max=args.rmax)


def _document(args: argparse.Namespace) -> dict[str, Any] | None:
    return load_json(args.input) if args.input else None


def _target(args: argparse.Namespace, doc: dict[str, Any] | None) -> TargetSpec:
    if doc is None:
        return TargetSpec.builtin(args.target)
    return TargetSpec.from_dict(doc["target"] if "target" in doc else doc)


def _parameters(args: argparse.Namespace, doc: dict[str, Any] | None) -> ParameterTuple:
    if args.params:
        return ParameterTuple(tuple(args.params))
    if doc is not None and "result" in doc:
        return parameters_from_result_dict(doc["result"])
    raise ValueError("params: specificare --params oppure un risultato con --input.")


def _emit(args: argparse.Namespace, document: dict[str, Any]) -> None:
    if args.output:
        write_json(args.output, document)
        logger.info("scritto %s", args.output)


def _result_document(
    spec: SpaceSpec, target: TargetSpec, config: dict[str, Any], result: ApproxResult
) -> dict[str, Any]:
    return {
        "space": space_to_dict(spec),
        "target": target.to_dict(),
        "config": config,
        "result": result_to_dict(result),
    }


def _write_trace(args: argparse.Namespace, result: ApproxResult) -> None:
    if args.csv:
        write_csv(args.csv, ("step", "value"), enumerate(result.objective_trace))


# ------------------------------------------------------------------ #
#  Sottocomandi                                                       #
# ------------------------------------------------------------------ #

def _cmd_poafd(args: argparse.Namespace, defaults: dict[str, Any]) -> int:
    spec = _space(args)
    doc = _document(args)
    target = _target(args, doc)
    cfg = GreedyConfig(
        rho=args.rho,
        grid=args.grid,
        n_terms=args.n,
        delta=defaults["delta"],
        refine=not args.no_refine,
        lic_floor=defaults["lic_floor"],
    )
    result = poafd(target.expand(spec), spec, cfg)
    config = {
        "method": "poafd",
        "n": cfg.n_terms,
        "rho": cfg.rho,
        "grid": f"{cfg.grid_radial}x{cfg.grid_angular}",
        "refine": cfg.refine,
    }
    _emit(args, _result_document(spec, target, config, result))
    _write_trace(args, result)
    print(format_result(result, f"POAFD rho={cfg.rho:g} su {target.describe()}, {spec.describe()}"))
    return EXIT_OK


def _cmd_nbest(args: argparse.Namespace, defaults: dict[str, Any]) -> int:
    spec = _space(args)
    doc = _document(args)
    target = _target(args, doc)
    cfg = NBestConfig(
        n=args.n,
        starts=args.starts,
        grid=args.grid,
        greedy_grid=args.greedy_grid,
        tol_obj=args.tol,
        max_cycles=args.max_cycles,
        fd_step=defaults["fd_step"],
        delta=defaults["delta"],
        seed=args.seed,
        workers=args.workers,
        lic_floor=defaults["lic_floor"],
    )
    result = solve(target.expand(spec), spec, cfg)
    config = {
        "method": "nbest",
        "n": cfg.n,
        "starts": cfg.starts,
        "grid": f"{cfg.grid.radial}x{cfg.grid.angular}",
        "greedy_grid": f"{args.greedy_grid.radial}x{args.greedy_grid.angular}",
        "tol": cfg.tol_obj,
        "max_cycles": cfg.max_cycles,
        "seed": cfg.seed,
    }
    _emit(args, _result_document(spec, target, config, result))
    _write_trace(args, result)
    print(format_result(result, f"n-best n={cfg.n} su {target.describe()}, {spec.describe()}"))
    return EXIT_OK


def _cmd_probe(args: argparse.Namespace) -> int:
    spec = _space(args)
    # raggi limitati a r_max, come i parametri
    seq = radial_sequence(args.theta, args.depth, cap=spec.r_max)
    if args.kind == "dbvc":
        values = dbvc_probe(spec, args.z, seq)
    else:
        doc = _document(args)
        f = _target(args, doc).expand(spec)
        if args.kind == "bvc":
            values = bvc_probe(f, spec, seq)
        else:
            values = vanishing_probe(f, spec, ParameterTuple(tuple(args.params)), seq)

    rows = probe_rows(seq, values)
    if args.csv:
        write_csv(args.csv, ("j", "radius", "value"), rows)
    _emit(args, {
        "space": space_to_dict(spec),
        "probe": args.kind,
        "theta": args.theta,
        "values": [[j, r, v] for j, r, v in rows],
    })
    print(format_values(rows, ("j", "|w_j|", args.kind)))
    return EXIT_OK


def _cmd_check(args: argparse.Namespace, defaults: dict[str, Any]) -> int:
    spec = _space(args)
    params = ParameterTuple(tuple(args.params))
    params.check_domain(spec)
    value = lic_check(spec, params)
    passed = value > defaults["lic_floor"]
    _emit(args, {
        "space": space_to_dict(spec),
        "parameters": [complex_to_json(a) for a in params],
        "gram_min_eig": value,
        "passed": passed,
    })
    print(f"autovalore minimo Gram: {format_gram(value)} ({'ok' if passed else 'dipendenza numerica'})")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    doc = _document(args)
    spec = space_from_dict(doc["space"]) if doc is not None and "space" in doc else _space(args)
    target = _target(args, doc)
    params = _parameters(args, doc)
    f = target.expand(spec)
    value = objective(f, spec, params)
    result = build_result(f, gram_schmidt(spec, params), [norm(f, spec), value], {"method": "eval"})
    _emit(args, _result_document(spec, target, {"method": "eval"}, result))
    print(format_result(result, f"A(f; a) su {target.describe()}, {spec.describe()}"))
    if doc is not None and isinstance(doc.get("result"), dict) and "residual_norm" in doc["result"]:
        reported = float_from_json(doc["result"]["residual_norm"], "result.residual_norm")
        print(f"residuo riportato {reported:.6e}, differenza {abs(reported - value):.3e}")
    return EXIT_OK


def _cmd_to_rational(args: argparse.Namespace) -> int:
    doc = _document(args)
    spec = space_from_dict(doc["space"]) if doc is not None and "space" in doc else _space(args)
    target = _target(args, doc)
    params = _parameters(args, doc)
    form = blaschke_form_of(target.expand(spec), spec, params)
    rational = tm_to_rational(form)
    report = admissible(rational, form.n)
    _emit(args, {
        "space": space_to_dict(spec),
        "parameters": [complex_to_json(a) for a in params],
        "p": [complex_to_json(c) for c in rational.p],
        "q": [complex_to_json(c) for c in rational.q],
        "n_degenerate": form.n_degenerate,
        "admissibility": {
            "admissible": report.admissible,
            "coprime": report.coprime,
            "resultant": report.resultant,
            "zero_free": report.zero_free,
            "degree_ok": report.degree_ok,
            "failures": list(report.failures),
        },
    })
    print("p(z) coefficienti: " + ", ".join(format_complex(c) for c in rational.p))
    print("q(z) coefficienti: " + ", ".join(format_complex(c) for c in rational.q))
    print("ammissibile" if report.admissible else "non ammissibile: " + "; ".join(report.failures))
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    doc = _document(args)
    if doc is None:
        raise ValueError("input: specificare il risultato JSON con --input.")
    generator = PDFReportGenerator(output_dir=args.output.parent if args.output else None)
    path = generator.generate_result_report(doc, str(args.output) if args.output else None)
    print(f"report scritto in {path}")
    return EXIT_OK


def run(argv: Sequence[str] | None = None) -> int:
    try:
        defaults = load_defaults()
        args = build_parser(defaults).parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"errore: {exc}", file=sys.stderr)
        return EXIT_INVALID

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="[%(name)s] %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.command == "poafd":
            return _cmd_poafd(args, defaults)
        if args.command == "nbest":
            return _cmd_nbest(args, defaults)
        if args.command == "probe":
            return _cmd_probe(args)
        if args.command == "check":
            return _cmd_check(args, defaults)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "to-rational":
            return _cmd_to_rational(args)
        return _cmd_report(args)
    except DegenerateSystem as exc:
        logger.error("sistema degenere: %s", exc)
        print(f"errore: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, KeyError) as exc:
        print(f"errore: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
