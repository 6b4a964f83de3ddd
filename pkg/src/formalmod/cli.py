"""Command-line front end.

    formalmod construct --p 2 --q 2 --N 8 --D 16 > m.json
    formalmod verify --input m.json
    formalmod torsion --p 3 --q 3 --n 2
    formalmod galois --p 2 --h 2 --n 1

Every command writes JSON (``--format json``, the default) or a small text
table.  JSON carries ``"schema": 1``; failures print an error object and exit
nonzero.  Defaults can be overridden with FORMALMOD_N, FORMALMOD_D and
FORMALMOD_DEPTH.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from sympy import isprime

from . import endo, galois, torsion
from .formal_group import (AxiomError, FormalModule, HeightBound, RingTooSmall, additive_module, height,
                           multiplicative_module)
from .lubin_tate import LubinTateError, canonical_frobenius, lt_group, lt_residual, lt_validate
from .padic import PrecisionError, UnramifiedRing
from .series import CapError, Series1

SCHEMA = 1
COMMANDS = ("construct", "verify", "height", "endo", "isom", "torsion", "galois", "mseq")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="formalmod", description="Formal group laws and Lubin-Tate modules at finite precision.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def module_args(sp):
        sp.add_argument("--input", help="FormalModule JSON descriptor (otherwise built from --p/--q)")
        sp.add_argument("--law", choices=("lt", "multiplicative", "additive"), default="lt")
        sp.add_argument("--p", type=int)
        sp.add_argument("--q", type=int, help="Lubin-Tate q = p^h")
        sp.add_argument("--f", type=int, help="degree of the coefficient ring (default: h)")
        sp.add_argument("--N", type=int, help="p-adic precision (default 12)")
        sp.add_argument("--D", type=int, help="truncation cap (default max(16, q^2 + 1))")
        sp.add_argument("--frob", help="Frobenius coefficients c1,c2,... (default: p,0,...,0,1 = pX + X^q)")

    def common(sp):
        sp.add_argument("--format", choices=("json", "text"), default="json")
        sp.add_argument("--output", help="write the report here instead of stdout")

    sp = sub.add_parser("construct", help="build a module and emit its JSON descriptor")
    module_args(sp)
    common(sp)
    sp = sub.add_parser("verify", help="check the axioms of a descriptor")
    module_args(sp)
    common(sp)
    sp = sub.add_parser("height", help="height of [p]")
    module_args(sp)
    common(sp)
    sp = sub.add_parser("endo", help="endomorphism ring detected mod p^m")
    module_args(sp)
    common(sp)
    sp.add_argument("--m", type=int, help="search depth (default 3)")
    sp.add_argument("--exhaustive", action="store_true")
    sp = sub.add_parser("isom", help="isomorphism search between two modules")
    module_args(sp)
    common(sp)
    sp.add_argument("--other", required=True, help="descriptor of the second module")
    sp.add_argument("--m", type=int, default=2, help="unit search depth")
    sp = sub.add_parser("torsion", help="torsion valuations and division-field data, levels 1..n")
    module_args(sp)
    common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp = sub.add_parser("galois", help="unit group image and derived series at level n")
    common(sp)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--h", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp = sub.add_parser("mseq", help="m(n) sequence for n = 1..n_max")
    module_args(sp)
    common(sp)
    sp.add_argument("--n-max", dest="n_max", type=int, required=True)
    return parser


# ---------------------------------------------------------------------------


def _log_p(q, p):
    h, n = 0, q
    while n % p == 0 and n > 1:
        n //= p
        h += 1
    if n != 1 or h == 0:
        raise ConfigError(f"q={q} is not a positive power of p={p}")
    return h


def _params(args):
    if args.p is None:
        raise ConfigError("--p is required when no --input is given")
    p = args.p
    if not isprime(p):
        raise ConfigError(f"p={p} is not prime")
    q = args.q if args.q is not None else p
    h = _log_p(q, p)
    f = args.f if args.f is not None else (h if args.law == "lt" else 1)
    N = args.N if args.N is not None else _env_int("FORMALMOD_N", 12)
    D = args.D if args.D is not None else _env_int("FORMALMOD_D", max(16, q * q + 1))
    if N < 1 or D < 1 or f < 1:
        raise ConfigError("N, D and f must be positive")
    return p, q, f, N, D


def load_module(args) -> FormalModule:
    if args.input:
        with open(args.input) as fh:
            data = json.load(fh)
        if data.get("schema", SCHEMA) != SCHEMA:
            raise ConfigError(f"unsupported schema {data.get('schema')}")
        return FormalModule.from_json(data)
    p, q, f, N, D = _params(args)
    ring = UnramifiedRing(p, f, N)
    if args.law == "multiplicative":
        return multiplicative_module(ring, D)
    if args.law == "additive":
        return additive_module(ring, D)
    if args.frob:
        coeffs = [0] + [int(x) for x in args.frob.split(",")]
        frob = lt_validate(Series1(ring, coeffs, D), q)
    else:
        frob = canonical_frobenius(ring, q, D)
    return lt_group(frob)


def _required_torsion_cap(args, n):
    """Reject a torsion request whose cap cannot see level n, before any work."""
    if args.input:
        return
    p, q, f, N, D = _params(args)
    if args.law != "lt":
        q = p  # multiplicative law has height 1; additive has no finite height
    if D < q**n:
        raise CapError(f"cap D={D} too small for level {n} with q={q}: need D >= {q**n}")


def _height_json(h):
    if isinstance(h, HeightBound):
        return {"height": None, "height_bound": str(h)}
    return {"height": h}


def cmd_construct(args):
    m = load_module(args)
    return m.to_json(), None


def cmd_verify(args):
    m = load_module(args)  # descriptors are checked while loading
    out = {"valid": True, "p": m.p, "f": m.ring.f, "N": m.ring.N, "D": m.cap}
    if m.frobenius is not None:
        r = lt_residual(m)
        out["lubin_tate_residual_zero"] = r.first_nonzero() is None
        out["valid"] = out["lubin_tate_residual_zero"]
    out.update(_height_json(height(m)))
    return out, None


def cmd_height(args):
    m = load_module(args)
    return _height_json(height(m)), None


def cmd_endo(args):
    m = load_module(args)
    depth = args.m if args.m is not None else _env_int("FORMALMOD_DEPTH", 3)
    report = endo.endo_ring(m, depth, exhaustive=args.exhaustive)
    out = report.to_json()
    rows = [("m", out["m"]), ("found", len(out["found_c"])), ("residue_degree", out["residue_degree"]),
            ("full_height", out["full_height"]), ("saturated", out["saturated"])]
    return out, rows


def cmd_isom(args):
    a = load_module(args)
    with open(args.other) as fh:
        b = FormalModule.from_json(json.load(fh))
    res = endo.isomorphism_search(a, b, args.m)
    out = {"found": bool(res), "status": res.status,
           "series": res.series.to_json() if res and res.series is not None else None,
           "obstruction_degree": None if res else res.degree, "reason": res.reason or None}
    return out, [("found", out["found"]), ("status", res.status), ("reason", res.reason)]


def cmd_torsion(args):
    _required_torsion_cap(args, args.n)
    m = load_module(args)
    levels = []
    rows = []
    for k in range(1, args.n + 1):
        r = torsion.division_field_report(m, k)
        j = r.to_json()
        levels.append(j)
        rows.append((k, j["new_count"], j["valuation"], j["degree"], j["e"], j["totally_ramified"], j["m"]))
    header = ("n", "new_count", "valuation", "degree", "e", "totally_ramified", "m")
    return {"levels": levels}, [header] + rows


def cmd_galois(args):
    G = galois.unit_group_image(args.p, args.h, args.n)
    report = galois.derived_series(G)
    out = report.to_json(args.p, args.h, args.n)
    return out, list(out.items())


def cmd_mseq(args):
    m = load_module(args)
    seq = torsion.m_sequence(m, args.n_max)
    out = seq.to_json()
    if seq.truncated:
        out["message"] = seq.message
    rows = [("n", "m_lower", "m_value", "m_upper")] + [tuple(e) for e in seq.entries]
    return out, rows


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _text(rows) -> str:
    if rows is None:
        return ""
    rows = [tuple("-" if v is None else str(v) for v in row) for row in rows]
    widths = [max(len(r[i]) for r in rows) for i in range(max(len(r) for r in rows))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def _emit(text: str, path: str | None, stream):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        stream.write(text)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    fmt = "json"
    try:
        args = build_parser().parse_args(argv)
        fmt = args.format
        out, rows = HANDLERS[args.command](args)
        if fmt == "text" and args.command != "construct":
            _emit(_text(rows if rows is not None else list(out.items())), args.output, stdout)
        else:
            doc = {"schema": SCHEMA, "command": args.command, **out}
            _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.output, stdout)
        return 0
    except (ConfigError, CapError, FileNotFoundError, json.JSONDecodeError) as exc:
        code = 2
        err = exc
    except (AxiomError, LubinTateError, PrecisionError, RingTooSmall, ValueError, AssertionError) as exc:
        code = 1
        err = exc
    error = {"type": type(err).__name__, "message": str(err)}
    for key in ("axiom", "monomial", "degree"):
        if getattr(err, key, None) is not None:
            error[key] = getattr(err, key)
    stdout.write(json.dumps({"schema": SCHEMA, "error": error}, sort_keys=True) + "\n")
    return code


def main():  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
