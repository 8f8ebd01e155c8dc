"""Command-line front end.

Global flags (--config, --cache-dir, --threads, --emit, --set key=value) may
appear before or after the subcommand.  Exit codes: 0 success, 1 a hard
invariant failed, 2 bad configuration, 3 a stage raised.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys

from .bessel import scan_discs
from .classfield import characters, class_group, class_table_json
from .lfunc import PrecisionUnreachable, RamifiedOverlap, afe_eval, form_ldata
from .pipeline import (BESSEL_COLUMNS, HALFINT_COLUMNS, PTB_COLUMNS, ConfigError, Context,
                       RunConfig, StageError, bessel_rows, density_stage, dump_csv, dump_json,
                       form_label, frac_str, halfint_stage, hecke_checks, run_pipeline, stage)
from .quaternion import brandt_system, build_algebra, eichler_order, eigensystems
from .siegel import fourier_jacobi, prime_anchor, read_ycf, write_ycf
from .halfint import extract_h, fundamental_scan

log = logging.getLogger("yoshida")


def _global_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    g = parser.add_argument_group("global options")
    g.add_argument("--config", default=d, help="key=value configuration file")
    g.add_argument("--cache-dir", default=d, help="cache directory (default: $CACHE_DIR or ~/.cache/yoshida)")
    g.add_argument("--threads", type=int, default=d)
    g.add_argument("--emit", choices=("json", "csv"), default=d)
    g.add_argument("--set", action="append", default=argparse.SUPPRESS if suppress else [],
                   metavar="KEY=VALUE", help="override one config key (repeatable)")
    g.add_argument("-q", "--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="yoshida", description=__doc__.splitlines()[0])
    _global_flags(top, suppress=False)
    sub = top.add_subparsers(dest="cmd", required=True)

    def add(name, sp=sub, **kw):
        p = sp.add_parser(name, **kw)
        _global_flags(p, suppress=True)
        return p

    p = add("classgroup", help="reduced forms, group law and characters")
    p.add_argument("--disc", type=int, required=True)

    p = add("brandt", help="Brandt matrices and rational eigensystems")
    p.add_argument("--ramified", type=int, required=True)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--weight", type=int, default=2)
    p.add_argument("--nmax", type=int, default=7)

    y = sub.add_parser("yoshida", help="build and check coefficient tables")
    ysub = y.add_subparsers(dest="action", required=True)
    p = add("build", ysub)
    p.add_argument("--bound", type=int)
    p.add_argument("--out")
    p = add("check", ysub)
    p.add_argument("--table")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p = add("fj", ysub)
    p.add_argument("--table")
    p.add_argument("--index", type=int, required=True)

    p = add("halfint", help="half-integral weight coefficients from a Fourier-Jacobi slice")
    p.add_argument("--table")
    p.add_argument("--anchor", default="auto")
    p.add_argument("--xmax", type=int)

    p = add("lvalue", help="central value of L(s, f x theta_chi)")
    p.add_argument("--f", dest="form", default="f", help="f, g, or a weight.level.index label")
    p.add_argument("--disc", type=int, required=True)
    p.add_argument("--chi", type=int, default=0)
    p.add_argument("--prec", type=float)
    p.add_argument("--s", type=complex, default=0.5)

    b = sub.add_parser("bessel", help="Bessel-period sums")
    bsub = b.add_subparsers(dest="action", required=True)
    p = add("scan", bsub)
    p.add_argument("--table")
    p.add_argument("--dmax", type=int)

    v = sub.add_parser("verify", help="simultaneous nonvanishing checks")
    vsub = v.add_subparsers(dest="action", required=True)
    p = add("ptb", vsub)
    p.add_argument("--table")
    p.add_argument("--dmax", type=int)
    p.add_argument("--floor", type=float)

    p = add("density", help="members of D(f, g) up to X")
    p.add_argument("--table")
    p.add_argument("--dmax", "--X", dest="dmax", type=int)
    p.add_argument("--delta", type=float)

    p = add("pipeline", help="the full run, with artifacts")
    p.add_argument("--out-dir")
    p.add_argument("--force", action="store_true")
    return top


def load_config(args) -> RunConfig:
    over = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        over[k.strip()] = v.strip()
    for key, attr in (("cache_dir", "cache_dir"), ("threads", "threads"), ("emit", "emit")):
        val = getattr(args, attr, None)
        if val is not None:
            over[key] = str(val)
    for key in ("dmax", "floor", "delta", "xmax"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = str(val)
    if getattr(args, "prec", None) is not None:
        over["precision"] = str(args.prec)
    if getattr(args, "bound", None) is not None:
        over["disc_bound"] = str(args.bound)
    if getattr(args, "out_dir", None):
        over["out_dir"] = args.out_dir
    if args.config:
        return RunConfig.from_file(args.config, over)
    return RunConfig.from_dict(over)


def _out(obj, rows=None, columns=None, emit="json"):
    if emit == "csv" and rows is not None:
        sys.stdout.write(dump_csv(rows, columns))
    else:
        sys.stdout.write(dump_json(obj))


def _table(ctx: Context, path):
    if not path:
        return ctx.table
    return ctx.attach(read_ycf(path))


# ---------------------------------------------------------------- commands

def cmd_classgroup(args, cfg):
    G = class_group(abs(args.disc))
    js = class_table_json(G)
    rows = [{"index": i, "a": f.a, "b": f.b, "c": f.c, "order": G.order_of(i)}
            for i, f in enumerate(G.elements)]
    _out(js, rows, ["index", "a", "b", "c", "order"], cfg.emit)
    return 0


def cmd_brandt(args, cfg):
    A = build_algebra(args.ramified)
    od = eichler_order(A, args.level)
    bs = brandt_system(od, args.weight, range(1, args.nmax + 1))
    systems = eigensystems(bs, max(args.nmax, 2), allow_irrational=True)
    js = {"algebra": list(A.hilbert_pair), "classes": od.h, "e": list(od.unit_halves),
          "mass": frac_str(od.mass),
          "matrices": {str(n): [[frac_str(x) for x in row] for row in bs.matrix(n)]
                       for n in range(1, args.nmax + 1)},
          "eigensystems": [{"label": form_label(e), "eisenstein": e.eisenstein,
                            "hecke": {str(q): frac_str(v) for q, v in sorted(e.hecke.items())},
                            "atkin_lehner": {str(p): s for p, s in sorted(e.al_signs.items())}}
                           for e in systems]}
    rows = [{"n": n, "row": i, "entries": " ".join(frac_str(x) for x in r)}
            for n in range(1, args.nmax + 1) for i, r in enumerate(bs.matrix(n))]
    _out(js, rows, ["n", "row", "entries"], cfg.emit)
    return 0


def cmd_yoshida(args, cfg):
    ctx = Context(cfg)
    if args.action == "build":
        table = ctx.table
        path = os.path.join(cfg.cache_dir, "tables", f"{table.provenance}-B{table.bound}.ycf")
        if args.out:
            write_ycf(table, args.out)
            path = os.path.abspath(args.out)
        _out({"path": path, "provenance": table.provenance, "weight": table.weight,
              "level": table.level, "bound": table.bound, "keys": len(table.coeffs),
              "nonzero": sum(1 for v in table.coeffs.values() if v != 0)}, emit="json")
        return 0
    table = ctx.__dict__["table"] = _table(ctx, args.table)
    if args.action == "fj":
        sl = fourier_jacobi(table, args.index)
        rows = [{"n": n, "r": r, "num": v.numerator, "den": v.denominator}
                for (n, r), v in sorted(sl.cmap.items())]
        _out({"index": args.index, "bound": sl.bound,
              "coeffs": [[n, r, frac_str(v)] for (n, r), v in sorted(sl.cmap.items())]},
             rows, ["n", "r", "num", "den"], cfg.emit)
        return 0
    # check
    js = hecke_checks(ctx)
    if table.source is not None:
        with stage("gl2", samples=args.samples) as info:
            js["gl2"] = gl2_check(table, args.samples, args.seed)
            info["ok"] = js["gl2"]["ok"]
    _out(js, emit="json")
    return 0 if js["ok"] and js.get("gl2", {"ok": True})["ok"] else 1


def random_unimodular(rng: random.Random, size: int = 2):
    """A uniform random element of GL2(Z) with entries in [-size, size]."""
    while True:
        U = [[rng.randint(-size, size) for _ in range(2)] for _ in range(2)]
        if abs(U[0][0] * U[1][1] - U[0][1] * U[1][0]) == 1:
            return U


def gl2_check(table, samples: int = 1000, seed: int = 0) -> dict:
    """a(F, U^T T U) = a(F, T), with the transformed matrices computed without reduction."""
    rng = random.Random(seed)
    keys = sorted(T for T, v in table.coeffs.items() if v != 0)
    pairs = []
    for _ in range(samples):
        T = rng.choice(keys)
        pairs.append((T, T.transform(random_unimodular(rng))))
    vals = table.source.coeffs(sorted({S for _, S in pairs}), reduce=False)
    bad = [(T, S) for T, S in pairs if vals[S] != table.coeffs[T]]
    return {"samples": samples, "seed": seed, "mismatches": len(bad), "ok": not bad}


def cmd_halfint(args, cfg):
    ctx = Context(cfg)
    table = _table(ctx, args.table)
    if args.anchor == "auto" and not args.table:
        summary, rows = halfint_stage(ctx)
        _out(summary, rows, HALFINT_COLUMNS, cfg.emit)
        return 0 if summary["ok"] else 1
    if args.anchor == "auto":
        p, _ = prime_anchor(table, cfg.anchor_search)
    else:
        p = int(args.anchor)
    h = extract_h(fourier_jacobi(table, p), cfg.xmax, table.weight, table.level)
    scan = fundamental_scan(h, min(cfg.dmax, cfg.xmax), table)
    rows = []
    for d in scan.hits:
        W = scan.witness[d]
        rows.append({"d": d, "c_num": h.c[d].numerator, "c_den": h.c[d].denominator,
                     "witness_a": W.a, "witness_b": W.b, "witness_c": W.c})
    _out({"p": p, "level": h.level, "hits": scan.hits,
          "coeffs": {str(m): frac_str(v) for m, v in sorted(h.c.items())}},
         rows, HALFINT_COLUMNS, cfg.emit)
    return 0


def cmd_lvalue(args, cfg):
    ctx = Context(cfg)
    P = ctx.pair
    which = {"f": "f", "g": "g", form_label(P.f): "f", form_label(P.g): "g"}.get(args.form)
    if which is None:
        raise ConfigError(f"--f must be f, g, {form_label(P.f)} or {form_label(P.g)}")
    d = abs(args.disc)
    G = class_group(d)
    chis = characters(G)
    if not 0 <= args.chi < len(chis):
        raise ConfigError(f"chi index {args.chi} out of range 0..{len(chis) - 1}")
    form = ctx.series(which, ctx.needed_terms(which, [d]))
    ld = form_ldata(form, chis[args.chi], cfg.precision)
    cv = afe_eval(ld, args.s, cfg.precision)
    _out({"d": d, "chi": args.chi, "form": form.label, "value_re": cv.value.real,
          "value_im": cv.value.imag, "err": cv.error_bound, "verdict": cv.verdict,
          "sign": [cv.sign.real, cv.sign.imag]}, emit="json")
    return 0


def cmd_bessel(args, cfg):
    ctx = Context(cfg)
    table = _table(ctx, args.table)
    rows = bessel_rows(table, scan_discs(cfg.dmax))
    _out({"dmax": cfg.dmax, "rows": rows}, rows, BESSEL_COLUMNS, cfg.emit)
    return 0 if all(r["parseval"] for r in rows) else 1


def cmd_verify(args, cfg):
    ctx = Context(cfg)
    table = _table(ctx, args.table)
    ctx.__dict__["table"] = table
    rec = density_stage(ctx, cfg.dmax)
    _out({"rows": rec.rows, "skipped": {str(d): r for d, r in rec.skipped.items()}},
         rec.rows, PTB_COLUMNS, cfg.emit)
    return 1 if rec.failures else 0


def cmd_density(args, cfg):
    ctx = Context(cfg)
    ctx.__dict__["table"] = _table(ctx, args.table)
    rec = density_stage(ctx, cfg.dmax)
    js = rec.to_json()
    rows = [{"d": d, **v} for d, v in rec.per_d.items()]
    _out(js, rows, ["d", "chi", "Lf", "Lg", "Lf_err", "Lg_err"], cfg.emit)
    return 1 if rec.failures else 0


def cmd_pipeline(args, cfg):
    res = run_pipeline(cfg, force=args.force)
    _out({"status": res.status, "run_dir": res.run_dir, "files": res.files,
          "failures": res.failures}, emit="json")
    return res.status


COMMANDS = {"classgroup": cmd_classgroup, "brandt": cmd_brandt, "yoshida": cmd_yoshida,
            "halfint": cmd_halfint, "lvalue": cmd_lvalue, "bessel": cmd_bessel,
            "verify": cmd_verify, "density": cmd_density, "pipeline": cmd_pipeline}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args).validate()
        return COMMANDS[args.cmd](args, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except StageError as e:
        print(str(e), file=sys.stderr)
        return 3
    except (RamifiedOverlap, PrecisionUnreachable) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
