"""Command-line front end. Reports go to stdout as JSON (or text with --human).

Exit codes: 0 success, 2 a mathematical finding (obstruction, nonzero residual,
nontrivial kernel, failed self-check), 1 usage or manifest error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from importlib import resources
from typing import Sequence

from gmpy2 import mpq

from . import detlab
from .algebra import CNum, det_exact, rat, rat_str
from .crfields import is_formally_nonminimal, residual_order
from .flatten import correction_dimension, flatten_to_order, map_is_square_and_injective, normal_target, normalize_order, rigidity_kernel
from .manifold import (
    FIXTURES,
    FlatAlready,
    ManifestError,
    NotApplicable,
    UnknownFixture,
    appendix_random,
    classify,
    cubic_nonminimal,
    dump_manifest,
    hy2_obstruction,
    load_manifest,
    order_of_E,
    reindex_smallest_nonparabolic,
    smallest_nonparabolic_index,
)

EXIT_OK, EXIT_USAGE, EXIT_FINDING = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(report: dict, human: bool, out=None) -> None:
    out = out or sys.stdout
    if human:
        out.write(_render(report))
    else:
        out.write(json.dumps(report, indent=2))
        out.write("\n")


def _render(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_render(v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(_render(v, indent + 1).rstrip("\n"))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines) + "\n"


def _rat_arg(s: str):
    try:
        return rat(s)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from exc


# commands


def cmd_invariants(args) -> tuple[dict, int]:
    M = load_manifest(args.file)
    idx = smallest_nonparabolic_index(M.lam)
    oe = order_of_E(M)
    report = {
        "n": M.n,
        "order": M.order,
        "lambda": [rat_str(x) for x in M.lam],
        "classes": [c.value for _, c in classify(M)],
        "smallest_nonparabolic": None if idx is None else idx + 1,
        "ord_E": None if isinstance(oe, FlatAlready) else oe[0],
    }
    return report, EXIT_OK


def cmd_nonminimal(args) -> tuple[dict, int]:
    M = load_manifest(args.file)
    if args.order > residual_order(M):
        raise UsageError(f"--order {args.order} exceeds the residual validity order {residual_order(M)}")
    v = is_formally_nonminimal(M, args.order)
    report = {"nonminimal": v.nonminimal, "upto": v.upto}
    if v.witness is not None:
        report["witness"] = v.witness
    return report, EXIT_OK if v.nonminimal else EXIT_FINDING


def cmd_flatten(args) -> tuple[dict, int]:
    M = load_manifest(args.file)
    if args.to > M.order:
        raise UsageError(f"--to {args.to} exceeds manifest order {M.order}")
    r = reindex_smallest_nonparabolic(M)
    if isinstance(r, NotApplicable):
        return {"outcome": "NotApplicable", "order": 2, "corrections": [], "reason": r.reason}, EXIT_FINDING
    M2, perm = r
    rep = flatten_to_order(M2, args.to)
    report = rep.to_json()
    report["permutation"] = [p + 1 for p in perm]
    if args.emit_transform:
        with open(args.emit_transform, "w", encoding="utf-8") as fh:
            json.dump({"permutation": report["permutation"], "corrections": report["corrections"]}, fh, indent=2)
            fh.write("\n")
    return report, EXIT_OK if rep.outcome == "Flattened" else EXIT_FINDING


def cmd_rigidity(args) -> tuple[dict, int]:
    lam = list(args.lam or [])
    if len(lam) != args.n:
        raise UsageError(f"expected {args.n} --lambda values, got {len(lam)}")
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.degree < 3:
        raise UsageError("--degree must be at least 3")
    if any(x < 0 for x in lam):
        raise UsageError("Bishop invariants are nonnegative")
    idx = smallest_nonparabolic_index(lam)
    report = {"n": args.n, "lambda": [rat_str(x) for x in lam], "degree": args.degree}
    if idx is None:
        report["outcome"] = "NotApplicable"
        return report, EXIT_FINDING
    perm = list(range(args.n))
    perm[idx], perm[-1] = perm[-1], perm[idx]
    lam2 = [lam[p] for p in perm]
    res = rigidity_kernel(args.n, lam2, args.degree)
    report["permutation"] = [p + 1 for p in perm]
    report["lambda_reindexed"] = [rat_str(x) for x in lam2]
    report["unknowns"] = res.unknowns
    report["dimension"] = res.dimension
    report["basis"] = [h.to_json() for h in res.basis]
    return report, EXIT_OK if res.dimension == 0 else EXIT_FINDING


def cmd_det(args) -> tuple[dict, int]:
    try:
        report = detlab.det_report(args.kind, args.mhat)
    except detlab.BadSize as exc:
        raise UsageError(str(exc)) from exc
    code = EXIT_OK if report["det"] != "0" else EXIT_FINDING
    if args.xi is not None:
        m = detlab.build_matrix(args.kind, args.mhat)
        val = det_exact(m.evaluate(args.xi))
        report["xi"] = rat_str(args.xi)
        report["value"] = rat_str(val)
        code = EXIT_OK if val != 0 else EXIT_FINDING
    return report, code


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"--param expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _example_manifold(name: str, params: dict):
    def take(key, default, conv=rat):
        return conv(params.pop(key)) if key in params else default

    if name == "cubic_nonminimal":
        # mu_j = mu_j + i * mu_j_im
        mu1 = CNum(take("mu1", mpq(1)), take("mu1_im", mpq(0)))
        mu2 = CNum(take("mu2", mpq(2)), take("mu2_im", mpq(0)))
        M = cubic_nonminimal(take("lam1", mpq(0)), take("lam2", mpq(1, 4)), mu1, mu2, take("order", 8, int))
    elif name == "hy2_obstruction":
        order = take("order", 8, int)
        b, a = {}, {}
        for key in list(params):
            parts = key.split("_")
            if len(parts) == 3 and parts[0] in ("a", "b"):
                target = b if parts[0] == "b" else a
                target[(int(parts[1]), int(parts[2]))] = rat(params.pop(key))
        if not b:
            b = {(2, 2): mpq(1)}
        M = hy2_obstruction(b, a or None, order)
    elif name == "appendix_random":
        lam = (take("lam1", mpq(1, 4)), take("lam2", mpq(1, 3)))
        M = appendix_random(take("seed", 0, int), take("m", 3, int), lam, take("order", None, int))
    else:
        raise UsageError(f"unknown example {name!r}; choose from {', '.join(FIXTURES)}")
    if params:
        raise UsageError(f"unused parameters for {name}: {', '.join(sorted(params))}")
    return M


def cmd_example(args) -> tuple[dict, int]:
    try:
        M = _example_manifold(args.name, _parse_params(args.param))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        dump_manifest(M, args.out)
        return {"example": args.name, "written": args.out}, EXIT_OK
    return M.to_json(), EXIT_OK


def selftest_report(max_degree: int = 6) -> dict:
    """Quick invariant suites; every entry is an exact check."""
    checks = {}
    audit = True
    for n in (2, 3):
        for m0 in range(3, max_degree + 1):
            for lam_n in (mpq(0), mpq(1, 4), mpq(1, 3)):
                lam = (mpq(3, 4),) * (n - 1) + (lam_n,)
                if normal_target(n, m0, lam_n).real_count != correction_dimension(n, m0):
                    audit = False
                elif not map_is_square_and_injective(n, lam, m0)[0]:
                    audit = False
    checks["normal_form_audit"] = audit
    ok = True
    for seed in range(5):
        for lam in ((mpq(1, 4), mpq(1, 3)), (mpq(1, 4), mpq(0))):
            M = appendix_random(seed, 3, lam)
            M2, _ = normalize_order(M, 3)
            spec = normal_target(2, 3, lam[-1])
            ok &= all(M2.E.coeff(c.alpha, c.beta).is_zero() for c in spec.constraints)
    checks["appendix_normalization"] = ok
    C, _ = reindex_smallest_nonparabolic(cubic_nonminimal(0, mpq(1, 4), 1, 2, order=8))
    checks["cubic_flattens"] = flatten_to_order(C, 6).outcome == "Flattened"
    H = flatten_to_order(hy2_obstruction({(2, 2): mpq(1)}, order=8), 4)
    checks["hy2_obstructed"] = H.outcome == "Obstructed" and H.order == 4
    checks["det_S2"] = detlab.det_structured("S", 1) == 2
    checks["closed_form_R"] = all(r.ok for m in (2, 3) for r in detlab.verify_closed_form_R(m))
    checks["alpha_identity"] = all(detlab.alpha_identity(m, k).is_zero() for m in range(1, 4) for k in range(3 * m // 2 + 1))
    checks["rigidity_n2"] = rigidity_kernel(2, (mpq(1, 4), mpq(1, 8)), 3).dimension == 0
    return {"max_degree": max_degree, "checks": checks, "ok": all(checks.values())}


def cmd_selftest(args) -> tuple[dict, int]:
    if args.max_degree < 3:
        raise UsageError("--max-degree must be at least 3")
    report = selftest_report(args.max_degree)
    return report, EXIT_OK if report["ok"] else EXIT_FINDING


def report_schema(command: str | None = None) -> dict:
    """The shipped JSON schema; with a command name, a schema for that command's report alone."""
    schema = json.loads(resources.files("crflat").joinpath("report_schema.json").read_text(encoding="utf-8"))
    if command is None:
        return schema
    if command not in schema["$defs"]:
        raise KeyError(command)
    return {"$defs": schema["$defs"], "$ref": f"#/$defs/{command}"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--human", action="store_true", help="text rendering instead of JSON")
    p = _Parser(prog="crflat", description="Exact jets, normal forms and flattening at CR singular points.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("invariants", parents=[common], help="Bishop invariants and order of E")
    s.add_argument("file")
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("nonminimal", parents=[common], help="formal non-minimality residuals")
    s.add_argument("file")
    s.add_argument("--order", type=int, required=True)
    s.set_defaults(func=cmd_nonminimal)

    s = sub.add_parser("flatten", parents=[common], help="normalize order by order")
    s.add_argument("file")
    s.add_argument("--to", type=int, required=True)
    s.add_argument("--emit-transform", dest="emit_transform")
    s.set_defaults(func=cmd_flatten)

    s = sub.add_parser("rigidity", parents=[common], help="kernel of the normalized reduced system")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--lambda", dest="lam", type=_rat_arg, action="append")
    s.add_argument("--degree", type=int, required=True)
    s.set_defaults(func=cmd_rigidity)

    s = sub.add_parser("det", parents=[common], help="structured determinants")
    s.add_argument("--kind", choices=detlab.KINDS, required=True)
    s.add_argument("--mhat", type=int, required=True)
    s.add_argument("--xi", type=_rat_arg)
    s.set_defaults(func=cmd_det)

    s = sub.add_parser("example", parents=[common], help="write a built-in fixture manifest")
    s.add_argument("name")
    s.add_argument("--param", action="append", help="key=value, repeatable")
    s.add_argument("--out")
    s.set_defaults(func=cmd_example)

    s = sub.add_parser("selftest", parents=[common], help="run the quick invariant suites")
    s.add_argument("--max-degree", dest="max_degree", type=int, default=6)
    s.set_defaults(func=cmd_selftest)
    return p


_NEG_RAT = re.compile(r"^-\d+(/\d+)?$")


def _glue_negative_rationals(argv: Sequence[str]) -> list[str]:
    # argparse only treats -3 or -0.5 as values; "-1/3" would be read as a flag
    out: list[str] = []
    for tok in argv:
        if out and out[-1] in ("--xi", "--lambda") and _NEG_RAT.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_negative_rationals(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
        report, code = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"crflat: error: {exc}\n")
        return EXIT_USAGE
    except (ManifestError, UnknownFixture, OSError) as exc:
        sys.stderr.write(f"crflat: error: {exc}\n")
        return EXIT_USAGE
    _emit(report, args.human)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
