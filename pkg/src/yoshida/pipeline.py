"""Run configuration, the on-disk cache and the end-to-end pipeline.

Cached objects are keyed by what determines them: tables by lift provenance
and bound, coefficient series by provenance and form, run directories by the
config hash.  Every write goes to a temporary file that is renamed into place.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import tempfile
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .bessel import DensityRecord, bessel_sums, density_scan, scan_discs
from .halfint import extract_h, extract_h_direct, fundamental_scan
from .lfunc import FormCoeffs, rankin_gamma, required_terms
from .quaternion import AdmissiblePair, hecke_series, select_pair
from .siegel import (KERNEL_VERSION, InsufficientDepth, SiegelCoeffTable, YoshidaLift,
                     build_yoshida, calibrate_shift, euler_factor, fourier_jacobi,
                     hecke_tq, prime_anchor, read_ycf, u_p, write_ycf)

log = logging.getLogger("yoshida")


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, err: BaseException):
        super().__init__(f"stage {stage}: {type(err).__name__}: {err}")
        self.stage = stage
        self.err = err


def default_cache_dir() -> str:
    return os.path.abspath(os.path.expanduser(os.environ.get("CACHE_DIR") or "~/.cache/yoshida"))


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    weights: tuple = (6, 2)
    level_bound: int = 50
    relax: bool = False              # allow the k = 1 fallback when no (6, 2) pair exists
    pair_index: int = 0
    f_label: str = ""                # "w.N.i"; empty means automatic selection
    g_label: str = ""
    M1: int = 0                      # 0: smallest admissible option
    qmax: int = 13
    disc_bound: int = 400
    xmax: int = 400
    dmax: int = 200
    precision: float = 1e-8
    floor: float = 1e-6
    delta: float = 0.5
    anchor_search: int = 50
    up_depth: int = 60               # base discriminants tested for U(p) via on-demand coefficients
    calibration_primes: tuple = (2, 3)
    euler_primes: tuple = (3, 5)
    coeff_bound: int = 0             # cap on series length; 0 means whatever dmax needs
    cache_dir: str = field(default_factory=default_cache_dir)
    out_dir: str = ""                # default: <cache_dir>/runs/<config hash>
    emit: str = "json"
    threads: int = 1

    # fields that do not change any result
    LOCAL = ("cache_dir", "out_dir", "emit", "threads")

    @classmethod
    def from_text(cls, text: str, overrides: dict | None = None) -> "RunConfig":
        vals = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            vals[k] = v
        vals.update(overrides or {})
        return cls.from_dict(vals)

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        with open(path) as fh:
            return cls.from_text(fh.read(), overrides)

    @classmethod
    def from_dict(cls, vals: dict) -> "RunConfig":
        types = {f.name: f for f in dataclasses.fields(cls)}
        kw = {}
        for k, v in vals.items():
            if k not in types:
                raise ConfigError(f"unknown config key {k!r}")
            kw[k] = _coerce(types[k].default if types[k].default is not dataclasses.MISSING
                            else types[k].default_factory(), v, k)
        cfg = cls(**kw)
        cfg.cache_dir = os.path.abspath(os.path.expanduser(cfg.cache_dir))
        if cfg.out_dir:
            cfg.out_dir = os.path.abspath(os.path.expanduser(cfg.out_dir))
        return cfg

    def validate(self) -> "RunConfig":
        if self.emit not in ("json", "csv"):
            raise ConfigError(f"emit must be json or csv, not {self.emit!r}")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.xmax > self.disc_bound:
            raise ConfigError(f"xmax={self.xmax} exceeds disc_bound={self.disc_bound}")
        if self.dmax > self.xmax:
            raise ConfigError(f"dmax={self.dmax} exceeds xmax={self.xmax}: the scan reads c(d) for d <= dmax")
        if not 0 < self.delta < 5 / 8:
            raise ConfigError("delta must lie in (0, 5/8)")
        if not (self.precision > 0 and self.floor >= 0):
            raise ConfigError("precision must be positive and floor nonnegative")
        if len(self.weights) != 2:
            raise ConfigError("weights takes two values")
        return self

    def hashed(self) -> dict:
        return {k: _plain(v) for k, v in sorted(dataclasses.asdict(self).items()) if k not in self.LOCAL}

    @property
    def config_hash(self) -> str:
        blob = json.dumps({"config": self.hashed(), "kernel": KERNEL_VERSION}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def run_dir(self) -> str:
        return self.out_dir or os.path.join(self.cache_dir, "runs", self.config_hash)


def _coerce(default, v, key):
    if not isinstance(v, str):
        return tuple(v) if isinstance(default, tuple) else v
    try:
        if isinstance(default, bool):
            if v.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(v)
            return v.lower() in ("1", "true", "yes")
        if isinstance(default, tuple):
            return tuple(int(x) for x in v.replace(" ", "").split(",") if x)
        if isinstance(default, int):
            return int(v)
        if isinstance(default, float):
            return float(v)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {v!r}") from None
    return v


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


# ---------------------------------------------------------------- atomic output

def write_atomic(path, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def dump_csv(rows, columns, stamp: str | None = None) -> str:
    buf = io.StringIO()
    if stamp:
        buf.write(f"# {stamp}\n")
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def frac_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@contextmanager
def stage(name: str, **extra):
    """Time a stage, log one structured line, and label any error with the stage."""
    t0 = time.perf_counter()
    info = dict(extra)
    try:
        yield info
    except StageError:
        raise
    except Exception as e:
        log.error("stage=%s status=error wall=%.3f error=%s", name, time.perf_counter() - t0,
                  json.dumps(f"{type(e).__name__}: {e}"))
        raise StageError(name, e) from e
    fields = " ".join(f"{k}={v}" for k, v in sorted(info.items()))
    log.info("stage=%s status=ok wall=%.3f %s", name, time.perf_counter() - t0, fields)


# ---------------------------------------------------------------- lazily built state

def form_label(es) -> str:
    return ".".join(map(str, es.label))


def _parse_label(s: str):
    try:
        w, N, i = (int(x) for x in s.split("."))
    except ValueError:
        raise ConfigError(f"form label {s!r} is not of the form weight.level.index") from None
    return w, N, i


class Context:
    """Everything a configured run needs, built on first use and cached on disk."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg

    def _cache_path(self, *parts) -> str:
        return os.path.join(self.cfg.cache_dir, *parts)

    # pair selection is slow over a range of levels; remember which level won
    def _pair_key(self) -> str:
        c = self.cfg
        blob = json.dumps([list(c.weights), c.level_bound, c.relax, c.qmax, c.M1,
                           c.f_label, c.g_label, c.pair_index, KERNEL_VERSION])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _select(self, levels=None):
        c = self.cfg
        kw = dict(qmax=c.qmax, levels=levels, ramified=c.M1 or None)
        pairs = select_pair(c.weights, c.level_bound, **kw)
        if not pairs and c.relax:
            log.warning("no pair with weights %s up to level %d; trying k = 1", c.weights, c.level_bound)
            pairs = select_pair((2, 2), c.level_bound, relax=True, **kw)
        if c.f_label or c.g_label:
            pairs = [P for P in pairs
                     if (not c.f_label or form_label(P.f) == c.f_label)
                     and (not c.g_label or form_label(P.g) == c.g_label)]
            if not pairs:
                raise ConfigError(f"no admissible pair matches f={c.f_label!r} g={c.g_label!r}")
            return pairs[0]
        if c.pair_index >= len(pairs):
            raise ConfigError(f"pair_index={c.pair_index} but only {len(pairs)} admissible pairs")
        return pairs[c.pair_index]

    @cached_property
    def pair(self) -> AdmissiblePair:
        c = self.cfg
        path = self._cache_path("pairs", self._pair_key() + ".json")
        with stage("select_pair") as info:
            levels = None
            if c.f_label:
                levels = [_parse_label(c.f_label)[1]]
            elif os.path.exists(path):
                with open(path) as fh:
                    levels = [json.load(fh)["level"]]
                info["cache"] = "hit"
            P = self._select(levels)
            if not os.path.exists(path):
                write_atomic(path, dump_json({"level": P.N1, "f": form_label(P.f), "g": form_label(P.g)}))
            info.update(level=P.N1, f=form_label(P.f), g=form_label(P.g), M1=P.M1)
        return P

    @cached_property
    def lift(self) -> YoshidaLift:
        P = self.pair
        return YoshidaLift(P.order, P.f_space, P.f, P.g, threads=self.cfg.threads)

    @cached_property
    def table(self) -> SiegelCoeffTable:
        P, lift, B = self.pair, self.lift, self.cfg.disc_bound
        path = self._cache_path("tables", f"{lift.provenance}-B{B}.ycf")
        with stage("build_yoshida", bound=B) as info:
            if os.path.exists(path):
                table = read_ycf(path)
                info["cache"] = "hit"
            else:
                table = build_yoshida(P.order, P.f_space, P.f, P.g, B, threads=self.cfg.threads)
                write_ycf(table, path)
            table.source = lift
            info["keys"] = len(table.coeffs)
            info["nonzero"] = sum(1 for v in table.coeffs.values() if v != 0)
        return table

    def attach(self, table: SiegelCoeffTable) -> SiegelCoeffTable:
        """Attach the configured lift as coefficient source when provenances agree."""
        if table.source is None and self.lift.provenance == table.provenance:
            table.source = self.lift
        elif table.source is None:
            log.warning("table provenance %s does not match the configured pair (%s); "
                        "no on-demand coefficients", table.provenance, self.lift.provenance)
        return table

    def series(self, which: str, nmax: int) -> FormCoeffs:
        """Coefficients a(0..nmax) of f or g, extended and cached on disk as needed."""
        P = self.pair
        es, bs = (P.f, P.f_space) if which == "f" else (P.g, P.g_space)
        path = self._cache_path("series", f"{self.lift.provenance}-{which}.npy")
        a = None
        if os.path.exists(path):
            a = np.load(path)
            if len(a) <= nmax:
                a = None
        if a is None:
            with stage("hecke_series", form=form_label(es), nmax=nmax):
                a = np.array(hecke_series(bs, es, nmax), dtype=np.int64)
            d = os.path.dirname(path)
            os.makedirs(d, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".npy")
            with os.fdopen(fd, "wb") as fh:
                np.save(fh, a)
            os.replace(tmp, path)
        return FormCoeffs(form_label(es), es.weight, es.level, tuple(int(x) for x in a[:nmax + 1]))

    def needed_terms(self, which: str, ds) -> int:
        P = self.pair
        es = P.f if which == "f" else P.g
        need = 1
        for d in ds:
            if math.gcd(d, es.level) != 1:
                continue
            gam, Q = rankin_gamma(es.weight, d, es.level)
            need = max(need, required_terms(gam, Q, self.cfg.precision))
        if self.cfg.coeff_bound:
            need = min(need, self.cfg.coeff_bound)
        return need


# ---------------------------------------------------------------- stages

def pair_summary(P: AdmissiblePair, provenance: str) -> dict:
    def form(es):
        return {"label": form_label(es), "weight": es.weight, "level": es.level,
                "hecke": {str(q): frac_str(v) for q, v in sorted(es.hecke.items())},
                "atkin_lehner": {str(p): s for p, s in sorted(es.al_signs.items())}}
    return {"f": form(P.f), "g": form(P.g), "N1": P.N1, "N2": P.N2, "M1": P.M1,
            "M1_options": list(P.M1_options), "provenance": provenance}


def hecke_checks(ctx: Context) -> dict:
    """U(p) at p | N, T(q) at the good primes used, shift calibration, Euler factors."""
    cfg, table, P = ctx.cfg, ctx.table, ctx.pair
    out = {"U": {}, "T": {}, "euler": {}}
    with stage("u_p") as info:
        for p in sorted(P.f.al_signs):
            try:
                lam, n = u_p(table, p)
            except InsufficientDepth:
                lam, n = u_p(table, p, max_base_disc=cfg.up_depth)
            out["U"][str(p)] = {"eigenvalue": frac_str(lam), "tested": n}
        info["tested"] = sum(v["tested"] for v in out["U"].values())
    with stage("hecke") as info:
        qs = sorted(set(cfg.calibration_primes) | set(cfg.euler_primes))
        for q in qs:
            if table.level % q:
                out["T"][str(q)] = frac_str(hecke_tq(table, q))
        s0, used = calibrate_shift(table, P.f, P.g, cfg.calibration_primes)
        out["shift"] = s0
        out["calibration_primes"] = list(used)
        if s0 is not None:
            for q in cfg.euler_primes:
                chk = euler_factor(table, P.f, P.g, q, s0)
                out["euler"][str(q)] = {"ok": chk.ok, "spin": [frac_str(x) for x in chk.spin],
                                        "product": [frac_str(x) for x in chk.product]}
        info.update(shift=s0, euler_ok=all(e["ok"] for e in out["euler"].values()))
    out["ok"] = s0 is not None and bool(out["euler"]) and all(e["ok"] for e in out["euler"].values())
    return out


def halfint_stage(ctx: Context):
    cfg, table = ctx.cfg, ctx.table
    with stage("prime_anchor") as info:
        p, T1 = prime_anchor(table, cfg.anchor_search)
        info.update(p=p, T=f"{T1.a},{T1.b},{T1.c}")
    with stage("extract_h", xmax=cfg.xmax) as info:
        h = extract_h(fourier_jacobi(table, p), cfg.xmax, table.weight, table.level)
        d0 = -T1.disc
        doubling = None
        if d0 <= cfg.xmax:
            doubling = h.c[d0] == 2 * table.get(T1)
        consistent = extract_h_direct(table, p, cfg.xmax) == h.c
        info.update(doubling=doubling, consistent=consistent)
    with stage("fundamental_scan", X=cfg.dmax) as info:
        scan = fundamental_scan(h, cfg.dmax, table)
        info["hits"] = len(scan.hits)
    summary = {"anchor": {"p": p, "T": [T1.a, T1.b, T1.c], "a": frac_str(table.get(T1))},
               "level": h.level, "weight": f"{h.weight_num}/2", "xmax": h.xmax,
               "doubling": {"d0": d0, "ok": doubling},
               "consistent": consistent, "hits": scan.hits,
               "ok": consistent and doubling is not False and bool(scan.hits)}
    rows = []
    for d in scan.hits:
        v, W = Fraction(h.c[d]), scan.witness[d]
        rows.append({"d": d, "c_num": v.numerator, "c_den": v.denominator,
                     "witness_a": W.a, "witness_b": W.b, "witness_c": W.c})
    return summary, rows


def bessel_rows(table: SiegelCoeffTable, ds) -> list[dict]:
    rows = []
    for d in ds:
        rep = bessel_sums(table, d)
        for k, B in sorted(rep.per_chi.items()):
            rows.append({"d": d, "h": rep.h, "chi_index": k, "B_nonzero": bool(B),
                         "B": repr(B), "parseval": rep.parseval_ok()})
    return rows


def density_stage(ctx: Context, X: int) -> DensityRecord:
    cfg, table, P = ctx.cfg, ctx.table, ctx.pair
    ds = [d for d in scan_discs(X) if bessel_sums(table, d).nonzero_chis()]
    F = ctx.series("f", ctx.needed_terms("f", ds))
    G = ctx.series("g", ctx.needed_terms("g", ds))
    with stage("density", X=X) as info:
        rec = density_scan(table, F, G, X, cfg.floor, cfg.precision, cfg.delta, threads=cfg.threads)
        info.update(members=len(rec.members), skipped=len(rec.skipped), failures=len(rec.failures),
                    coeffs_f=F.nmax, coeffs_g=G.nmax)
    return rec


BESSEL_COLUMNS = ["d", "h", "chi_index", "B_nonzero", "B", "parseval"]
PTB_COLUMNS = ["d", "chi_index", "B_nonzero", "Lf_value", "Lg_value", "verdict"]
HALFINT_COLUMNS = ["d", "c_num", "c_den", "witness_a", "witness_b", "witness_c"]


@dataclass
class RunResult:
    status: int
    run_dir: str
    files: dict
    failures: list


def _sha(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _cached_run(cfg: RunConfig) -> RunResult | None:
    man = os.path.join(cfg.run_dir, "manifest.json")
    if not os.path.exists(man):
        return None
    with open(man) as fh:
        m = json.load(fh)
    if m.get("config_hash") != cfg.config_hash or m.get("kernel_version") != KERNEL_VERSION:
        return None
    for name, digest in m["files"].items():
        p = os.path.join(cfg.run_dir, name)
        if not os.path.exists(p) or _sha(p) != digest:
            return None
    return RunResult(m["status"], cfg.run_dir, m["files"], m["failures"])


def run_pipeline(cfg: RunConfig, force: bool = False) -> RunResult:
    """select_pair, build, Hecke checks, half-integral extraction, Bessel sums, density.

    Artifacts go to ``cfg.run_dir``; a finished run with intact files is
    returned from the manifest without recomputation unless ``force``.
    Status 0 means every hard invariant held, 1 that one failed.
    """
    cfg.validate()
    if not force:
        hit = _cached_run(cfg)
        if hit is not None:
            log.info("stage=pipeline status=cached run_dir=%s", hit.run_dir)
            return hit
    ctx = Context(cfg)
    h, kv = cfg.config_hash, KERNEL_VERSION
    stamp = f"config_hash={h} kernel_version={kv}"
    out = cfg.run_dir
    files = {}
    failures = []

    def emit(name, text):
        write_atomic(os.path.join(out, name), text)
        files[name] = hashlib.sha256(text.encode()).hexdigest()

    def emit_json(name, obj):
        emit(name, dump_json({"config_hash": h, "kernel_version": kv, **obj}))

    t0 = time.perf_counter()
    table = ctx.table
    emit_json("pair.json", pair_summary(ctx.pair, ctx.lift.provenance))
    emit("table.ycf", table.to_text())

    checks = hecke_checks(ctx)
    emit_json("checks.json", checks)
    if not checks["ok"]:
        failures.append("hecke/euler checks")

    hsum, hrows = halfint_stage(ctx)
    emit_json("halfint.json", hsum)
    emit("halfint.csv", dump_csv(hrows, HALFINT_COLUMNS, stamp))
    if not hsum["ok"]:
        failures.append("half-integral extraction")

    with stage("bessel", X=cfg.dmax) as info:
        brows = bessel_rows(table, scan_discs(cfg.dmax))
        info["rows"] = len(brows)
    emit("bessel.csv", dump_csv(brows, BESSEL_COLUMNS, stamp))
    if not all(r["parseval"] for r in brows):
        failures.append("parseval")

    rec = density_stage(ctx, cfg.dmax)
    emit("ptb.csv", dump_csv(rec.rows, PTB_COLUMNS, stamp))
    emit_json("density.json", rec.to_json())
    if rec.failures:
        failures.append(f"ptb: {len(rec.failures)} FAIL verdicts")
    if not rec.members:
        log.warning("density scan up to %d found no member", cfg.dmax)

    status = 1 if failures else 0
    emit_json("manifest.json", {"config": cfg.hashed(), "status": status, "failures": failures,
                                "files": dict(sorted(files.items()))})
    files.pop("manifest.json")
    log.info("stage=pipeline status=%s wall=%.3f run_dir=%s", "ok" if not status else "failed",
             time.perf_counter() - t0, out)
    return RunResult(status, out, files, failures)
