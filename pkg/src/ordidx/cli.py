"""Command-line front end: ``ordidx <command> [options]``.

Every option can also be supplied through an ``ORDIDX_<NAME>`` environment
variable (e.g. ``ORDIDX_X=1000000``); explicit flags win over the
environment, which wins over built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

from . import characters, densities, empirical
from .arith import decompose

KIND_NAMES = {"delta": "delta", "delta0": "delta0", "delta-avg": "delta_avg",
              "rho": "rho", "rho-avg": "rho_avg"}
MODE_KIND = {"order": "delta", "index": "rho"}


def load_schema(name: str) -> dict:
    """The shipped JSON schema ``name`` (e.g. "census.v1")."""
    return json.loads(resources.files("ordidx").joinpath("schemas", f"{name}.json").read_text())


def _env(name: str, default, cast=str):
    raw = os.environ.get(f"ORDIDX_{name.upper()}")
    if raw is None:
        return default
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return cast(raw)


def _int(s: str) -> int:
    # accepts 10000000, 1e7, 2**20
    s = s.strip()
    if "**" in s:
        b, e = s.split("**")
        return int(b) ** int(e)
    if "e" in s.lower():
        return int(float(s))
    return int(s)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=_env("format", "text"))
    common.add_argument("--cache-dir", default=_env("cache_dir", None))
    common.add_argument("--cache-residues", action="store_true", default=_env("cache_residues", False, bool),
                        help="store per-prime residues in --cache-dir and reuse them")
    common.add_argument("--no-sieve", action="store_true", default=_env("no_sieve", False, bool),
                        help="fail instead of sieving on a cache miss")
    common.add_argument("--workers", type=int, default=_env("workers", 1, int))
    common.add_argument("--v-max", type=_int, default=_env("v_max", densities.DEFAULT_V_MAX, _int))
    common.add_argument("--w-max", type=_int, default=_env("w_max", densities.DEFAULT_W_MAX, _int))

    p = argparse.ArgumentParser(prog="ordidx", description="Order and index residue-class densities.")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("density", parents=[common], help="evaluate one density series")
    q.add_argument("--kind", choices=tuple(KIND_NAMES), default=_env("kind", "delta"))
    q.add_argument("--g", default=_env("g", None))
    q.add_argument("--a", type=int, default=_env("a", 0, int))
    q.add_argument("--d", type=int, default=_env("d", 1, int))
    q.add_argument("--method", choices=("direct", "character"), default=_env("method", "direct"),
                   help="character: character-sum form (delta0 only)")
    q.add_argument("--no-reduce", action="store_true")

    q = sub.add_parser("census", parents=[common], help="brute-force residue census")
    q.add_argument("--g", default=_env("g", None))
    q.add_argument("--d", type=int, default=_env("d", 1, int))
    q.add_argument("--x", type=_int, default=_env("x", 10**6, _int))
    q.add_argument("--mode", choices=("order", "index"), default=_env("mode", "order"))

    q = sub.add_parser("compare", parents=[common], help="census against series, per class")
    q.add_argument("--g", default=_env("g", None))
    q.add_argument("--d", type=int, default=_env("d", 1, int))
    q.add_argument("--x", type=_int, default=_env("x", 10**6, _int))
    q.add_argument("--mode", choices=("order", "index"), default=_env("mode", "order"))
    q.add_argument("--tol", type=float, default=_env("tol", 0.01, float))

    q = sub.add_parser("table", parents=[common], help="all classes a mod d for several kinds")
    q.add_argument("--g", default=_env("g", None))
    q.add_argument("--d", type=int, default=_env("d", 1, int))
    q.add_argument("--kinds", default=_env("kinds", "delta,delta0,delta-avg,rho,rho-avg"))

    q = sub.add_parser("constants", parents=[common], help="A_chi for every character mod d")
    q.add_argument("--d", type=int, default=_env("d", 1, int))
    q.add_argument("--prime-bound", type=_int, default=_env("prime_bound", 10**6, _int))

    sub.add_parser("selfcheck", parents=[common], help="quick invariant checks at reduced scale")
    return p


# --- output ---------------------------------------------------------------------------


def _emit(args, record: dict, csv_rows: list[dict], text: str) -> None:
    if args.format == "json":
        print(json.dumps(record, indent=2, sort_keys=True))
    elif args.format == "csv":
        buf = io.StringIO()
        if csv_rows:
            w = csv.DictWriter(buf, fieldnames=list(csv_rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(csv_rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(text)


def _need_g(args):
    if args.g is None:
        raise SystemExit("ordidx: --g is required for this command")
    try:
        return decompose(args.g)
    except (ValueError, ZeroDivisionError) as exc:
        raise SystemExit(f"ordidx: invalid base g={args.g!r}: {exc}")


def _normalize_a(a: int, d: int) -> int:
    if d < 1:
        raise SystemExit("ordidx: --d must be >= 1")
    if not 0 <= a < d:
        print(f"ordidx: warning: a={a} normalized to {a % d} mod {d}", file=sys.stderr)
    return a % d


def _stream(args, base):
    return empirical.residue_stream(
        base, args.x, workers=args.workers,
        cache_dir=args.cache_dir if args.cache_residues else None,
        allow_sieve=not args.no_sieve)


# --- commands ---------------------------------------------------------------------------


def cmd_density(args) -> int:
    kind = KIND_NAMES[args.kind]
    a = _normalize_a(args.a, args.d)
    base = None if kind.endswith("_avg") else _need_g(args)
    if args.method == "character":
        if kind != "delta0":
            raise SystemExit("ordidx: --method character is available for --kind delta0 only")
        est = characters.delta0_character_form(base, a, args.d, args.v_max)
    else:
        est = densities.evaluate(kind, base, a, args.d, v_max=args.v_max, w_max=args.w_max,
                                 reduce=not args.no_reduce)
    rec = est.to_json()
    red = f" (reduced to a={est.reduction['a']} mod {est.reduction['d']}, scale {est.reduction['scale']})" \
        if est.reduction else ""
    text = f"{kind}(g={rec['g']}, a={a}, d={args.d}) = {rec['value']:.12f} +- {est.tail_bound:.3g}" \
           f" [{est.method}]{red}"
    _emit(args, rec, [{k: rec[k] for k in ("kind", "g", "a", "d", "value", "tail_bound", "method")}], text)
    return 0


def cmd_census(args) -> int:
    base = _need_g(args)
    c = _stream(args, base).census(args.d, args.mode)
    rec = c.to_json()
    rows = [{"a": a, "count": n, "fraction": n / c.total if c.total else 0.0} for a, n in enumerate(c.counts)]
    lines = [f"{args.mode} census g={c.g} x={c.x} d={c.d}: total {c.total}"]
    lines += [f"  a={r['a']:>3}  {r['count']:>10}  {r['fraction']:.6f}" for r in rows]
    _emit(args, rec, rows, "\n".join(lines))
    return 0


def compare_rows(base, d: int, x: int, mode: str, tol: float, stream=None, **trunc) -> dict:
    kind = MODE_KIND[mode]
    stream = stream or empirical.residue_stream(base, x)
    c = stream.census(d, mode)
    rows = []
    for a in range(d):
        est = densities.evaluate(kind, base, a, d, **trunc)
        emp = c.fraction(a)
        diff = abs(emp - est.value)
        rows.append({"a": a, "empirical": emp, "theoretical": est.value, "diff": diff,
                     "tail_bound": est.tail_bound, "pass": diff <= tol})
    return {"schema": "compare.v1", "g": str(base), "x": x, "d": d, "mode": mode, "kind": kind,
            "tolerance": tol, "rows": rows, "all_pass": all(r["pass"] for r in rows)}


def cmd_compare(args) -> int:
    base = _need_g(args)
    rec = compare_rows(base, args.d, args.x, args.mode, args.tol, stream=_stream(args, base),
                       v_max=args.v_max, w_max=args.w_max)
    lines = [f"compare {rec['kind']} g={rec['g']} d={args.d} x={args.x} tol={args.tol}"]
    for r in rec["rows"]:
        lines.append(f"  a={r['a']:>3}  empirical {r['empirical']:.6f}  series {r['theoretical']:.6f}"
                     f"  |diff| {r['diff']:.2e}  {'PASS' if r['pass'] else 'FAIL'}")
    lines.append("all pass" if rec["all_pass"] else "SOME CLASSES FAIL")
    _emit(args, rec, rec["rows"], "\n".join(lines))
    return 0 if rec["all_pass"] else 1


def cmd_table(args) -> int:
    kinds = [KIND_NAMES[k.strip()] for k in args.kinds.split(",") if k.strip()]
    base = _need_g(args) if any(not k.endswith("_avg") for k in kinds) else None
    cols = {}
    for kind in kinds:
        g = None if kind.endswith("_avg") else base
        cols[kind] = [densities.evaluate(kind, g, a, args.d, v_max=args.v_max, w_max=args.w_max)
                      for a in range(args.d)]
    rows = [{"a": a, **{k: cols[k][a].value for k in kinds}} for a in range(args.d)]
    sums = {k: math.fsum(e.value for e in cols[k]) for k in kinds}
    rec = {"g": str(base) if base else None, "d": args.d, "rows": rows, "sums": sums,
           "tail_bounds": {k: max(e.tail_bound for e in cols[k]) for k in kinds}}
    header = "   a  " + "  ".join(f"{k:>12}" for k in kinds)
    lines = [f"g={rec['g']} d={args.d}", header]
    lines += [f"{r['a']:>4}  " + "  ".join(f"{r[k]:>12.8f}" for k in kinds) for r in rows]
    lines.append(" sum  " + "  ".join(f"{sums[k]:>12.8f}" for k in kinds))
    _emit(args, rec, rows, "\n".join(lines))
    return 0


def cmd_constants(args) -> int:
    rows = []
    for chi in characters.enumerate_characters(args.d):
        v = characters.a_chi(chi, args.prime_bound)
        rows.append({"character": chi.label(), "order": chi.order, "re": v.value.real,
                     "im": v.value.imag, "error_estimate": v.error_estimate})
    art = characters.artin_constant(args.prime_bound)
    rec = {"d": args.d, "prime_bound": args.prime_bound, "characters": rows,
           "artin_constant": art.value.real, "artin_error_estimate": art.error_estimate}
    lines = [f"Artin constant (p <= {args.prime_bound}): {art.value.real:.10f} +- {art.error_estimate:.1e}"]
    lines += [f"  {r['character']:<28} order {r['order']:>2}  A = {r['re']:.10f} {r['im']:+.10f}i"
              for r in rows]
    _emit(args, rec, rows, "\n".join(lines))
    return 0


def selfcheck() -> list[tuple[str, bool]]:
    """Small-scale versions of the main invariants; each entry is (name, passed)."""
    from fractions import Fraction

    from .quadfields import kummer_degree, split_class_density

    out = []
    b2 = decompose(2)
    out.append(("kummer degree Q(zeta_8, 2^(1/8)) = 16", kummer_degree(b2, 8, 8) == 16))
    out.append(("split density g=2, b=1 mod 8, v=2 is 1/4", split_class_density(b2, 1, 8, 2) == Fraction(1, 4)))
    e = densities.rho_g_series(2, 0, 2, 1 << 12)
    out.append(("rho_2(0,2) = 1/2 exactly", e.exact == Fraction(1, 2)))
    s = math.fsum(densities.delta_g_series(2, a, 4, 1 << 12).value for a in range(4))
    out.append(("delta_2(.,4) sums to 1", abs(s - 1) < 1e-9))
    e = densities.delta_g_series(2, 0, 2, 1 << 12)
    out.append(("delta_2(0,2) = 17/24", abs(e.value - 17 / 24) <= e.tail_bound))
    x = characters.delta0_character_form(2, 1, 3, 1 << 12).value
    y = densities.delta0_g_series(2, 1, 3, 1 << 12, reduce=False).value
    out.append(("character form = direct series (g=2, a=1, d=3)", abs(x - y) < 1e-12))
    rows = compare_rows(decompose(2), 3, 10**5, "order", 0.03, v_max=1 << 12)
    out.append(("census x=1e5 vs delta_2(.,3)", rows["all_pass"]))
    chi = characters.enumerate_characters(5)[1]
    out.append(("A(conj chi) = conj A(chi)",
                characters.a_chi(chi.conj(), 1000).value == characters.a_chi(chi, 1000).value.conjugate()))
    return out


def cmd_selfcheck(args) -> int:
    results = selfcheck()
    rec = {"checks": [{"name": n, "pass": ok} for n, ok in results],
           "all_pass": all(ok for _, ok in results)}
    text = "\n".join(f"{'PASS' if ok else 'FAIL'}  {n}" for n, ok in results)
    _emit(args, rec, rec["checks"], text)
    return 0 if rec["all_pass"] else 1


COMMANDS = {"density": cmd_density, "census": cmd_census, "compare": cmd_compare,
            "table": cmd_table, "constants": cmd_constants, "selfcheck": cmd_selfcheck}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"ordidx: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
