"""Batch verification front door.

Subcommands parse JSON instance files, dispatch to the library modules and
emit deterministic JSON or text reports with a CI-friendly exit-code
contract: 0 = pass, 2 = verification failed, 1 = usage or schema error.

Instance file schema (version 1):

    {
      "version": 1,
      "kind": "heun" | "apparent_fuchsian" | "xjacobi",
      "parameters": { ... kind-specific ... },
      "mode": "exact" | "numeric",          (optional, default "exact")
      "precision_bits": 300,                (optional, numeric mode)
      "seed": 0                             (optional)
    }

Rationals are "p/q" strings, symbolic entries {"sym": "name"}; unknown keys
are rejected.  kind-specific parameters:

    heun:              alpha, beta, gamma, epsilon, q, t (delta optional,
                       derived from the Fuchs relation when absent)
    apparent_fuchsian: gamma, sing = [{"t": rat, "m": int}, ...],
                       alpha+beta via "alpha","beta" or "delta"+"prod_ab";
                       optional "q" (M = 1) or "p" list (omit to leave the
                       accessory symbolic in exact mode / solved in numeric)
    xjacobi:           k, g, h
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import factorize as fz
from . import numcheck
from . import xjacobi as xj
from .exactalg import RatFunc, UsageError
from .heun import HeunParams, HeunConditionError, UnsupportedCaseError, apparency_poly


class SchemaError(Exception):
    pass


def _rat(v, where: str) -> Fraction:
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(f"{where}: bad rational {v!r}: {e}") from None
    if isinstance(v, int):
        return Fraction(v)
    raise SchemaError(f"{where}: rationals must be 'p/q' strings, got {v!r}")


def _check_keys(obj: dict, allowed: set, where: str, required: set = frozenset()):
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing keys {sorted(missing)}")


def load_instance(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as e:
        raise SchemaError(f"cannot read {path}: {e}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(
            f"{path}: malformed JSON at line {e.lineno} column {e.colno} "
            f"(char {e.pos}): {e.msg}") from None
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: instance must be a JSON object")
    _check_keys(obj, {"version", "kind", "parameters", "mode",
                      "precision_bits", "seed"}, str(path),
                required={"version", "kind", "parameters"})
    if obj["version"] != 1:
        raise SchemaError(f"{path}: unsupported version {obj['version']!r}")
    if obj["kind"] not in ("heun", "apparent_fuchsian", "xjacobi"):
        raise SchemaError(f"{path}: unknown kind {obj['kind']!r}")
    if obj.get("mode", "exact") not in ("exact", "numeric"):
        raise SchemaError(f"{path}: mode must be 'exact' or 'numeric'")
    if not isinstance(obj["parameters"], dict):
        raise SchemaError(f"{path}: parameters must be an object")
    return obj


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        for line in _textify(report):
            sys.stdout.write(line + "\n")


def _textify(obj, prefix="") -> list:
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{prefix}{k}:")
                lines.extend(_textify(v, prefix + "  "))
            else:
                lines.append(f"{prefix}{k}: {v}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)):
                lines.append(f"{prefix}[{i}]:")
                lines.extend(_textify(v, prefix + "  "))
            else:
                lines.append(f"{prefix}[{i}]: {v}")
    else:
        lines.append(f"{prefix}{obj}")
    return lines


# -- heun / apparency ------------------------------------------------------------


def _heun_from_parameters(params: dict) -> HeunParams:
    _check_keys(params, {"alpha", "beta", "gamma", "delta", "epsilon", "q", "t"},
                "parameters", required={"alpha", "beta", "gamma", "epsilon",
                                         "q", "t"})
    return HeunParams.from_json(params)


def cmd_apparency(args) -> int:
    inst = load_instance(Path(args.instance))
    if inst["kind"] != "heun":
        raise SchemaError("apparency expects a 'heun' instance")
    p = _heun_from_parameters(inst["parameters"])
    P = apparency_poly(p)
    report = {
        "command": "apparency",
        "condition_polynomial": P.pretty(),
        "degree": P.degree("q"),
    }
    concrete = all(
        getattr(p, n).is_poly() and getattr(p, n).as_poly().is_const()
        for n in ("alpha", "beta", "gamma", "t"))
    q_concrete = p.q.is_poly() and p.q.as_poly().is_const()
    status = 0
    if concrete:
        import numpy as np

        cd = {k: float(v.as_poly().const_value())
              for k, v in RatFunc.of(P, p.ring).coeffs_in("q").items()}
        coeffs = [cd.get(i, 0.0) for i in range(max(cd) + 1)]
        roots = sorted((complex(r) for r in np.roots(list(reversed(coeffs)))),
                       key=lambda r: (round(r.real, 10), round(r.imag, 10)))
        report["numeric_roots"] = [f"{r.real!r}{'+' if r.imag >= 0 else '-'}"
                                   f"{abs(r.imag)!r}j" for r in roots]
    if q_concrete:
        val = RatFunc.of(P, p.ring).subs({"q": p.q})
        apparent = val.is_zero
        report["apparent"] = apparent
        status = 0 if apparent else 2
    _emit(report, args.json)
    return status


# -- factorize -------------------------------------------------------------------


def _fuchsian_from_parameters(params: dict, mode: str, seed: int, bits: int):
    _check_keys(params, {"gamma", "delta", "alpha", "beta", "prod_ab",
                         "sing", "q", "p"}, "parameters",
                required={"gamma", "sing"})
    gamma = _rat(params["gamma"], "gamma")
    sing = []
    for i, s in enumerate(params["sing"]):
        _check_keys(s, {"t", "m"}, f"sing[{i}]", required={"t", "m"})
        if not isinstance(s["m"], int) or s["m"] < 1:
            raise SchemaError(f"sing[{i}].m must be a positive integer")
        sing.append((_rat(s["t"], f"sing[{i}].t"), s["m"]))
    N = sum(m for _, m in sing)
    if "alpha" in params or "beta" in params:
        if not ("alpha" in params and "beta" in params):
            raise SchemaError("alpha and beta must be given together")
        alpha = _rat(params["alpha"], "alpha")
        beta = _rat(params["beta"], "beta")
        delta = alpha + beta - gamma + N + 1
        prod_ab = alpha * beta
    else:
        if "delta" not in params or "prod_ab" not in params:
            raise SchemaError("need alpha+beta or delta+prod_ab")
        delta = _rat(params["delta"], "delta")
        prod_ab = _rat(params["prod_ab"], "prod_ab")
    M = len(sing)
    ring = fz.factor_ring(M, N)
    p_vals = None
    if "q" in params:
        if M != 1:
            raise SchemaError("'q' shortcut needs exactly one extra singularity")
        qv = params["q"]
        if isinstance(qv, dict):
            if set(qv) != {"sym"}:
                raise SchemaError("bad symbolic q")
            q = RatFunc.of(ring.var("q"), ring)
        else:
            q = RatFunc.of(_rat(qv, "q"), ring)
        p_vals = [RatFunc.of(prod_ab, ring) * RatFunc.of(sing[0][0], ring) - q]
    elif "p" in params:
        p_vals = []
        for i, pv in enumerate(params["p"]):
            if isinstance(pv, dict):
                if set(pv) != {"sym"}:
                    raise SchemaError(f"bad symbolic p[{i}]")
                p_vals.append(RatFunc.of(ring.var(f"p{i+1}"), ring))
            else:
                p_vals.append(RatFunc.of(_rat(pv, f"p[{i}]"), ring))
    elif mode == "exact":
        p_vals = [RatFunc.of(ring.var(f"p{k+1}"), ring) for k in range(M)]
        if M == 1:
            q = RatFunc.of(ring.var("q"), ring)
            p_vals = [RatFunc.of(prod_ab, ring) * RatFunc.of(sing[0][0], ring) - q]
    Lt = None
    if p_vals is not None:
        Lt = fz.ApparentFuchsian.from_p_form(gamma, delta, sing, prod_ab,
                                             p_vals, ring)
    return gamma, delta, sing, prod_ab, Lt


def cmd_factorize(args) -> int:
    inst = load_instance(Path(args.instance))
    if inst["kind"] != "apparent_fuchsian":
        raise SchemaError("factorize expects an 'apparent_fuchsian' instance")
    mode = args.mode or inst.get("mode", "exact")
    bits = args.precision_bits or inst.get("precision_bits", 300)
    seed = args.seed if args.seed is not None else inst.get("seed", 0)
    gamma, delta, sing, prod_ab, Lt = _fuchsian_from_parameters(
        inst["parameters"], mode, seed, bits)
    if mode == "exact":
        if Lt is None:
            raise SchemaError("exact mode needs q/p values (or symbolic atoms)")
        rep = fz.verify_factorization(Lt, deep=args.deep)
    else:
        p_concrete = None
        if Lt is not None:
            ps = Lt.p_residues()
            if all(p.is_poly() and p.as_poly().is_const() for p in ps):
                p_concrete = [p.as_poly().const_value() for p in ps]
        rep = fz.verify_factorization_numeric(
            gamma, delta, sing, prod_ab, p_vals=p_concrete, bits=bits,
            seed=seed, tol_exp=args.tol_exp)
    report = {"command": "factorize", "instance": inst["parameters"],
              **rep.to_json()}
    _emit(report, args.json)
    return 0 if rep.passed else 2


# -- x1 --------------------------------------------------------------------------


def cmd_x1(args) -> int:
    g = _rat(args.g, "g")
    h = _rat(args.h, "h")
    k = args.k
    if g == h:
        raise SchemaError("degenerate parameters: g = h")
    poly = xj.x1_jacobi(k, g, h)
    ode_ok = all(c == 0 for c in xj.x1_ode_residual(poly))
    heun_ok = xj.heun_annihilates_x1(k, g, h)
    _, factor_ok = xj.x1_apparency_factor(k, g, h)
    D_k = xj.x1_4f3_check(k, g, h)
    ortho = {}
    ortho_ok = True
    if args.ortho_max is not None:
        for j in range(min(args.ortho_max, k)):
            v = xj.orthogonality_check(j, k, g, h)
            ortho[f"<{j},{k}>"] = repr(v)
            ortho_ok = ortho_ok and abs(v) < 1e-8
    passed = ode_ok and heun_ok and factor_ok and D_k != 0 and ortho_ok
    report = {
        "command": "x1",
        "k": k, "g": str(g), "h": str(h),
        "coefficients": [str(c) for c in poly.coeffs],
        "ode_annihilated": ode_ok,
        "heun_annihilated": heun_ok,
        "apparency_linear_factor": factor_ok,
        "proportionality_constant": str(D_k),
        "orthogonality": ortho,
        "pass": passed,
    }
    _emit(report, args.json)
    return 0 if passed else 2


# -- monodromy -------------------------------------------------------------------


def cmd_monodromy(args) -> int:
    inst = load_instance(Path(args.instance))
    if inst["kind"] != "heun":
        raise SchemaError("monodromy expects a 'heun' instance")
    p = _heun_from_parameters(inst["parameters"])
    tol = args.tol if args.tol is not None else 1e-12
    M = numcheck.monodromy(p, "t", tol=tol)
    d = M.distance_from_identity()
    if d < 1e-6:
        verdict = "apparent"
    elif d > 1e-3:
        verdict = "not_apparent"
    else:
        verdict = "inconclusive"
    report = {
        "command": "monodromy",
        "loop": "t",
        "distance_from_identity": repr(d),
        "verdict": verdict,
    }
    _emit(report, args.json)
    return 0 if verdict == "apparent" else 2


# -- sweep -----------------------------------------------------------------------


def _sweep_one(path_str: str, opts: dict) -> dict:
    """Worker: run one instance file, return its report dict (never raises)."""
    ns = argparse.Namespace(**opts)
    path = Path(path_str)
    out = {"file": path.name}
    import contextlib
    import io

    buf = io.StringIO()
    try:
        inst = load_instance(path)
        ns.instance = path_str
        with contextlib.redirect_stdout(buf):
            if inst["kind"] == "heun":
                mode = ns.mode or inst.get("mode", "exact")
                code = (cmd_monodromy(ns) if mode == "numeric"
                        else cmd_apparency(ns))
            elif inst["kind"] == "apparent_fuchsian":
                code = cmd_factorize(ns)
            else:
                params = inst["parameters"]
                _check_keys(params, {"k", "g", "h"}, "parameters",
                            required={"k", "g", "h"})
                ns.k, ns.g, ns.h = params["k"], params["g"], params["h"]
                code = cmd_x1(ns)
        out["report"] = json.loads(buf.getvalue()) if ns.json else buf.getvalue()
        out["exit_code"] = code
    except SchemaError as e:
        out["exit_code"] = 1
        out["error"] = str(e)
    except Exception as e:  # verification machinery errors count as failures
        out["exit_code"] = 2
        out["error"] = f"{type(e).__name__}: {e}"
    return out


def cmd_sweep(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        raise SchemaError(f"{root} is not a directory")
    paths = sorted(str(p) for p in root.glob("*.json"))
    opts = {"mode": args.mode, "precision_bits": args.precision_bits,
            "seed": args.seed, "deep": args.deep, "tol": args.tol,
            "tol_exp": args.tol_exp, "json": True}
    workers = os.environ.get("HEUNFACTOR_THREADS")
    workers = int(workers) if workers else (os.cpu_count() or 1)
    results = []
    if len(paths) <= 1 or workers == 1:
        results = [_sweep_one(p, opts) for p in paths]
    else:
        try:
            with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(_sweep_one, paths,
                                      [opts] * len(paths)))
        except (OSError, PermissionError):
            results = [_sweep_one(p, opts) for p in paths]
    worst = max((r["exit_code"] for r in results), default=0)
    report = {
        "command": "sweep",
        "directory": str(root),
        "count": len(results),
        "results": results,
        "pass": worst == 0,
    }
    _emit(report, args.json)
    return 0 if worst == 0 else (1 if worst == 1 and
                                 all(r["exit_code"] in (0, 1) for r in results)
                                 else 2)


# -- entry point -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="heunfactor",
                 description="exact and numeric verification of apparent-"
                             "singularity factorizations")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--mode", choices=["exact", "numeric"], default=None)
        sp.add_argument("--precision-bits", type=int, default=None,
                        dest="precision_bits")
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--tol-exp", type=int, default=-60, dest="tol_exp")
        sp.add_argument("--deep", action="store_true")
        sp.add_argument("--seed", type=int, default=None)
        fmt = sp.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", default=True)
        fmt.add_argument("--text", dest="json", action="store_false")

    sp = sub.add_parser("apparency", help="condition polynomial for z = t")
    sp.add_argument("instance")
    common(sp)
    sp.set_defaults(func=cmd_apparency)

    sp = sub.add_parser("factorize", help="verify the operator factorization")
    sp.add_argument("instance")
    common(sp)
    sp.set_defaults(func=cmd_factorize)

    sp = sub.add_parser("x1", help="exceptional-Jacobi checks")
    sp.add_argument("k", type=int)
    sp.add_argument("g")
    sp.add_argument("h")
    sp.add_argument("--ortho-max", type=int, default=None, dest="ortho_max")
    common(sp)
    sp.set_defaults(func=cmd_x1)

    sp = sub.add_parser("monodromy", help="numeric apparency oracle")
    sp.add_argument("instance")
    common(sp)
    sp.set_defaults(func=cmd_monodromy)

    sp = sub.add_parser("sweep", help="run a directory of instances")
    sp.add_argument("directory")
    common(sp)
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except (UsageError, HeunConditionError, UnsupportedCaseError,
            fz.UnsupportedProfileError, xj.XJacobiError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 1
    except fz.DegenerateInstanceError as e:
        sys.stderr.write(f"degenerate instance: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
