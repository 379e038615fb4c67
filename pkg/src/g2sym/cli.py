"""Command-line entry point.

    g2sym table1
    g2sym algebra betti "(0,0,e^{12},e^{13},e^{23},e^{15}+e^{24},e^{16}+e^{34})"
    g2sym algebra check @row3
    g2sym g2 verify --algebra @row1 --seed 0 --attempts 10000 --json
    g2sym g2 metric --algebra abelian7 --phi @phi0
    g2sym torus --amp-a 1 --amp-b 1 --amp-c 0

Exit codes: 0 success, 1 input or math error, 2 search found nothing.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .exterior import FormParseError, format_form, parse_form
from .g2core import G2Error, PHI0_TEXT, metric_from_phi, torsion_report
from .liealg import (BUILTINS, TABLE1, TABLE1_B2, LieAlgebra, betti, builtin, is_unimodular,
                     load_algebras, parse_salamon)
from .liealg import closed_forms_basis
from .symmetry import (NotFound, search_positive_combination, symmetry_algebra,
                       verify_theorem_bounds)
from .torusfield import FD_STEP, torus_report

EXIT_OK, EXIT_ERROR, EXIT_NOT_FOUND = 0, 1, 2


class CommandError(Exception):
    pass


def resolve_algebras(spec: str, check: bool = True) -> list[LieAlgebra]:
    """``@name`` or bare built-in name, a Salamon tuple, or a file of ``name: tuple`` lines."""
    key = spec.strip()
    if key.lstrip("@") in BUILTINS:
        name = key.lstrip("@")
        return [parse_salamon(BUILTINS[name], name=name, check=check)]
    if key.startswith("@"):
        raise CommandError(f"unknown built-in {key}; choose from {', '.join(BUILTINS)}")
    if key.startswith("("):
        return [parse_salamon(key, check=check)]
    path = Path(key)
    if path.is_file():
        algebras = load_algebras(path, check=check)
        if not algebras:
            raise CommandError(f"{path}: no algebras")
        return algebras
    raise CommandError(f"cannot read algebra {spec!r}: not a built-in, tuple or file")


def resolve_phi(spec: str | None, dim: int = 7):
    if spec is None:
        return None
    if spec.strip() == "@phi0":
        return parse_form(PHI0_TEXT, dim, exact=True)
    return parse_form(spec, dim, exact=True, degree=3)


# ---------------------------------------------------------------- commands

def cmd_algebra(args) -> dict:
    outputs = []
    for L in resolve_algebras(args.input, check=False):
        entry = {"name": L.name, "tuple": str(L), "dim": L.dim}
        L.verify_jacobi()
        entry["jacobi"] = True
        if args.subcmd == "check":
            entry["unimodular"] = is_unimodular(L)
        else:
            b = betti(L)
            entry["betti"] = list(b.b)
            entry["b2"] = b[2]
        outputs.append(entry)
    return {"algebras": outputs}


def _search(L: LieAlgebra, seed: int, attempts: int) -> tuple:
    basis = closed_forms_basis(L, 3)
    phi, index = search_positive_combination(basis, seed, attempts)
    return phi, {"z3_dim": len(basis), "attempt": index, "seed": seed}


def cmd_g2(args) -> dict:
    L = resolve_algebras(args.algebra)[0]
    phi = resolve_phi(args.phi, L.dim)
    search = None
    if phi is None:
        if args.subcmd not in ("find-closed", "verify"):
            raise CommandError(f"g2 {args.subcmd} needs --phi")
        phi, search = _search(L, args.seed, args.attempts)
    out: dict = {"algebra": L.name or str(L), "phi": format_form(phi)}
    if search is not None:
        out["search"] = search
    if args.subcmd == "metric":
        out["metric"] = metric_from_phi(phi).summary()
    elif args.subcmd == "torsion":
        out["torsion"] = torsion_report(L, phi).to_dict()
    elif args.subcmd == "symmetry":
        out["symmetry"] = symmetry_algebra(L, phi).to_dict()
    elif args.subcmd == "find-closed":
        out["torsion"] = torsion_report(L, phi).to_dict()
    elif args.subcmd == "verify":
        rep = verify_theorem_bounds(L, phi)
        out["verification"] = rep.to_dict()
        if not rep.confirmed:
            raise CommandError("theorem check failed on this instance")
    return out


def cmd_table1(args) -> dict:
    rows = []
    start = time.perf_counter()
    for name, text in TABLE1.items():
        b2 = betti(builtin(name))[2]
        rows.append({"name": name, "tuple": text, "b2": b2, "b2_expected": TABLE1_B2[name],
                     "status": "PASS" if b2 == TABLE1_B2[name] else "FAIL"})
    out = {"rows": rows, "all_pass": all(r["status"] == "PASS" for r in rows),
           "seconds": round(time.perf_counter() - start, 3)}
    if not out["all_pass"]:
        raise CommandError("b2 mismatch on the built-in table", out)
    return out


def cmd_torus(args) -> dict:
    for amp in (args.amp_a, args.amp_b, args.amp_c):
        if amp < 0:
            raise CommandError("amplitudes must be nonnegative")
    return torus_report(args.amp_a, args.amp_b, args.amp_c, args.grid, args.h).to_dict()


# ---------------------------------------------------------------- output

def _text(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(pad + _scalar(value))
    return lines


def _flat_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    # json.dumps gives the same digits as the JSON output
    return v if isinstance(v, str) else json.dumps(v)


def emit(report: dict, as_json: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if as_json:
        stream.write(json.dumps(report, indent=2) + "\n")
    else:
        stream.write("\n".join(_text(report)) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="g2sym", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("algebra", parents=[common], help="Jacobi/unimodularity check or Betti numbers")
    p.add_argument("subcmd", choices=["check", "betti"])
    p.add_argument("input", help="@name, Salamon tuple, or file of 'name: tuple' lines")
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("g2", parents=[common], help="G2-structure computations on an algebra")
    p.add_argument("subcmd", choices=["metric", "torsion", "symmetry", "find-closed", "verify"])
    p.add_argument("--algebra", required=True)
    p.add_argument("--phi", help="3-form in e^{ijk} notation, or @phi0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attempts", type=int, default=10_000)
    p.set_defaults(func=cmd_g2)

    p = sub.add_parser("table1", parents=[common], help="b2 of the four built-in nilpotent algebras")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("torus", parents=[common], help="closed G2-structure on T^7")
    p.add_argument("--amp-a", type=float, default=1.0)
    p.add_argument("--amp-b", type=float, default=1.0)
    p.add_argument("--amp-c", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--h", type=float, default=FD_STEP)
    p.set_defaults(func=cmd_torus)
    return parser


def _inputs(args) -> dict:
    skip = {"func", "json", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command if not getattr(args, "subcmd", None) else f"{args.command} {args.subcmd}"
    report = {"command": command, "inputs": _inputs(args), "outputs": {}, "status": "ok"}
    code = EXIT_OK
    try:
        report["outputs"] = args.func(args)
    except NotFound as exc:
        report.update(status="not_found", error=str(exc), outputs={"z3_dim": exc.z3_dim})
        code = EXIT_NOT_FOUND
    except CommandError as exc:
        report.update(status="error", error=str(exc.args[0]))
        if len(exc.args) > 1:
            report["outputs"] = exc.args[1]
        code = EXIT_ERROR
    except (ValueError, KeyError, G2Error, FormParseError) as exc:
        report.update(status="error", error=str(exc))
        code = EXIT_ERROR
    emit(report, args.json)
    if code != EXIT_OK:
        print(f"g2sym: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
