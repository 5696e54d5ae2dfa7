"""Command line front end.

Exit codes: 0 when the requested property holds, 1 when it fails (invalid
model or certificate, nothing found, bound not certified), 2 for usage and
I/O errors.  Every subcommand writes a canonical JSON report; wall-clock
timing is only included with ``--timing`` so that reports stay
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

from . import __version__, kernels
from .bvmodel import AxiomReport, ModelError, WindowOverflowError, axiom_check
from .certify import FOUND, FOUND_CLOSURE_ONLY, SearchConfig, SearchError, certify, verify_certificate
from .exactcore import FieldSpec
from .filtered import BoundViolation, ComplexError, OperatorError, scenario_read
from .models import (
    AxiomFailure,
    CertificateError,
    SchemaError,
    builtin_s1,
    cert_read,
    cert_write,
    dumps_canonical,
    kunneth_product,
    lift_certificate,
    model_hash,
    model_read,
    model_write,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Failure(Exception):
    """The property does not hold; ``report`` is still written."""


def _file_digest(path: Path) -> dict:
    return {"file": path.name, "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}


def _stem(path: Path) -> str:
    name = path.name
    for suffix in (".model.json", ".cert.json", ".scenario.json", ".json"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def _report_path(args, primary: Path, cmd: str) -> Path:
    if args.report:
        return Path(args.report)
    return primary.with_name(f"{_stem(primary)}.{cmd}.report.json")


def _envelope(cmd: str, inputs: list[Path], config: dict) -> dict:
    return {
        "tool": "loopcert",
        "version": __version__,
        "command": cmd,
        "inputs": [_file_digest(p) for p in inputs],
        "config": config,
    }


def _load_model(path: Path, check: bool = True):
    if not path.is_file():
        raise FileNotFoundError(f"no such model file: {path}")
    return model_read(path, check=check)


# -- subcommands ---------------------------------------------------------------------


def cmd_validate(args) -> tuple[int, dict, Path]:
    path = Path(args.model)
    env = _envelope("validate", [path], {"engine": args.engine})
    model = _load_model(path, check=False)
    rep: AxiomReport = axiom_check(model, engine=args.engine)
    env["model"] = {"name": model.name, "hash": model_hash(model)}
    env["result"] = rep.to_json()
    print(rep.summary())
    return (EXIT_OK if rep.ok else EXIT_FAIL), env, _report_path(args, path, "validate")


def cmd_certify(args) -> tuple[int, dict, Path]:
    path = Path(args.model)
    cfg = SearchConfig(max_depth=args.max_depth, mode=args.mode, prune=not args.no_remark3_pruning,
                       successors=args.successors, workers=args.workers)
    env = _envelope("certify", [path], cfg.to_json())
    model = _load_model(path)
    out = certify(model, cfg)
    env["model"] = {"name": model.name, "hash": model_hash(model)}
    env["result"] = out.to_json()
    ok = out.status == FOUND or (cfg.mode == "closure" and out.status == FOUND_CLOSURE_ONLY)
    print(f"{model.name}: {out.status}")
    if out.certificate is not None:
        cert_path = Path(args.output) if args.output else path.with_name(f"{_stem(path)}.cert.json")
        cert_write(out.certificate, model, cert_path)
        env["result"]["certificate_file"] = cert_path.name
        print(f"  certificate of length {out.certificate.length} written to {cert_path}")
        for j, a in enumerate(out.certificate.letters, start=1):
            print(f"  a_{j} (degree {a.degree}) = {a!r}")
    elif out.status == FOUND_CLOSURE_ONLY:
        print("  [L] lies in the operator closure of [pt]; no single composition found"
              if cfg.mode != "closure" else "  [L] lies in the operator closure of [pt]")
    else:
        print(f"  nothing within depth {cfg.max_depth} ({out.states} states explored); "
              "this is bounded evidence, not a disproof")
    return (EXIT_OK if ok else EXIT_FAIL), env, _report_path(args, path, "certify")


def cmd_builtin(args) -> tuple[int, dict, Path]:
    field = FieldSpec.from_name(args.field)
    model = builtin_s1(args.window, field)
    out = Path(args.output)
    model_write(model, out)
    env = _envelope("builtin", [], {"family": args.family, "window": args.window,
                                    "field": field.name})
    env["model"] = {"name": model.name, "hash": model_hash(model)}
    env["result"] = {"output": out.name, "axioms": axiom_check(model).to_json()}
    print(f"wrote {model.name} (window {args.window}, {field.name}) to {out}")
    return EXIT_OK, env, _report_path(args, out, "builtin")


def cmd_product(args) -> tuple[int, dict, Path]:
    p1, p2, out = Path(args.m1), Path(args.m2), Path(args.output)
    env = _envelope("product", [p1, p2], {})
    m1, m2 = _load_model(p1), _load_model(p2)
    model = kunneth_product(m1, m2)
    model_write(model, out)
    env["model"] = {"name": model.name, "hash": model_hash(model)}
    env["result"] = {"output": out.name, "loop_basis": len(model.loop_basis),
                     "axioms": axiom_check(model).to_json()}
    print(f"wrote {model.name} ({len(model.loop_basis)} loop classes) to {out}")
    return EXIT_OK, env, _report_path(args, out, "product")


def cmd_lift(args) -> tuple[int, dict, Path]:
    paths = [Path(p) for p in (args.m1, args.c1, args.m2, args.c2)]
    out = Path(args.output)
    env = _envelope("lift", paths, {})
    m1, m2 = _load_model(paths[0]), _load_model(paths[2])
    c1, c2 = cert_read(paths[1], m1), cert_read(paths[3], m2)
    pm = kunneth_product(m1, m2)
    cert = lift_certificate(m1, c1, m2, c2, pm)
    cert_write(cert, pm, out)
    env["model"] = {"name": pm.name, "hash": model_hash(pm)}
    env["result"] = {"output": out.name, "length": cert.length,
                     "letters": [a.to_text() for a in cert.letters],
                     "trace": [x.to_text() for x in cert.trace]}
    print(f"lifted certificate of length {cert.length} for {pm.name} written to {out}")
    return EXIT_OK, env, _report_path(args, out, "lift")


def cmd_verify(args) -> tuple[int, dict, Path]:
    mp, cp = Path(args.model), Path(args.cert)
    env = _envelope("verify", [mp, cp], {})
    model = _load_model(mp)
    try:
        cert = cert_read(cp, model)
    except (CertificateError, SchemaError) as exc:
        env["result"] = {"valid": False, "step": None, "reason": str(exc)}
        print(f"INVALID: {exc}")
        return EXIT_FAIL, env, _report_path(args, cp, "verify")
    verdict = verify_certificate(model, cert)
    env["model"] = {"name": model.name, "hash": model_hash(model)}
    env["result"] = verdict.to_json()
    if verdict.valid:
        print(f"VALID: certificate of length {cert.length} for {model.name}")
    else:
        print(f"INVALID at step {verdict.step}: {verdict.reason}")
    return (EXIT_OK if verdict.valid else EXIT_FAIL), env, _report_path(args, cp, "verify")


def cmd_filtered(args) -> tuple[int, dict, Path]:
    sp = Path(args.scenario)
    env = _envelope("filtered", [sp], {})
    report_path = Path(args.output)
    if not sp.is_file():
        raise FileNotFoundError(f"no such scenario file: {sp}")
    try:
        sc = scenario_read(sp)
        rep = sc.run()
    except (ComplexError, OperatorError, BoundViolation) as exc:
        env["result"] = {"certified": False, "error": str(exc)}
        print(f"NOT CERTIFIED: {exc}")
        return EXIT_FAIL, env, report_path
    env["result"] = rep.to_json()
    r = env["result"]
    print(f"{sc.name}: gamma = {r['gamma']} <= {r['bound']} "
          f"(sum C = {r['sum_C']}, {'tight' if rep.tight else 'slack'})")
    return (EXIT_OK if rep.certified else EXIT_FAIL), env, report_path


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loopcert", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"loopcert {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--report", help="JSON report path (default: beside the primary file)")
        p.add_argument("--timing", action="store_true",
                       help="record wall-clock time in the report (breaks byte-identity)")
        return p

    p = common(sub.add_parser("validate", help="run the axiom suite on a model file"))
    p.add_argument("model")
    p.add_argument("--engine", choices=("auto", "exact", "kernel"), default="auto")
    p.set_defaults(func=cmd_validate)

    p = common(sub.add_parser("certify", help="search for a certificate"))
    p.add_argument("model")
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--mode", choices=("closure", "word", "both"), default="word")
    p.add_argument("--no-remark3-pruning", action="store_true",
                   help="expand letter degrees whose target degree is empty")
    p.add_argument("--successors", choices=("auto", "basis", "points"), default="auto")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", help="certificate path (default: <model>.cert.json)")
    p.set_defaults(func=cmd_certify)

    p = common(sub.add_parser("builtin", help="write a built-in model"))
    p.add_argument("family", choices=("s1",))
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--field", default="q", help="q, f2, f3, ... (fP for a prime P)")
    p.add_argument("-o", "--output", default="s1.model.json")
    p.set_defaults(func=cmd_builtin)

    p = common(sub.add_parser("product", help="Künneth product of two models"))
    p.add_argument("m1")
    p.add_argument("m2")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_product)

    p = common(sub.add_parser("lift", help="lift two certificates to the product model"))
    for name in ("m1", "c1", "m2", "c2"):
        p.add_argument(name)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_lift)

    p = common(sub.add_parser("verify", help="independently re-verify a certificate"))
    p.add_argument("model")
    p.add_argument("cert")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("filtered", help="propagate a spectral bound through a scenario"))
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True, help="report path")
    p.set_defaults(func=cmd_filtered)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1 or getattr(args, "max_depth", 1) < 1:
        print("error: --workers and --max-depth must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "builtin" and args.window < 1:
        print("error: --window must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        code, report, rpath = args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, (ModelError, CertificateError)):
            print(f"error: {exc}", file=sys.stderr)
            if isinstance(exc, AxiomFailure):
                print(exc.report.summary(), file=sys.stderr)
            return EXIT_FAIL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WindowOverflowError, SearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.timing:
        report["timing"] = {"seconds": round(time.perf_counter() - t0, 6),
                            "kernel_backend": kernels.BACKEND}
    report["exit_code"] = code
    try:
        rpath.write_text(dumps_canonical(report), encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"report: {rpath}")
    return code


if __name__ == "__main__":
    sys.exit(main())
