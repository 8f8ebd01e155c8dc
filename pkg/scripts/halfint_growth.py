"""Normalized coefficients of the half-integral weight form at fundamental d.

Prints a(d) d^(1/4 - kappa/2) for the scan hits and the least-squares slope of
log|.|^2 against log d.  Diagnostic only: at this range the slope says little
about the asymptotic exponent.
"""

import argparse

from yoshida.halfint import extract_h, fundamental_scan, growth_exponent, normalize
from yoshida.pipeline import Context, RunConfig
from yoshida.siegel import fourier_jacobi, prime_anchor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cache-dir")
    ap.add_argument("--X", type=int, default=400)
    args = ap.parse_args()
    cfg = RunConfig.from_dict({"cache_dir": args.cache_dir} if args.cache_dir else {})
    table = Context(cfg).table
    p, T = prime_anchor(table)
    h = extract_h(fourier_jacobi(table, p), min(args.X, table.bound), table.weight, table.level)
    scan = fundamental_scan(h, h.xmax, table)
    na = normalize(h)
    print(f"index p={p}, anchor T=({T.a},{T.b},{T.c}), level {h.level}, weight {h.weight_num}/2")
    for d in scan.hits:
        print(f"{d:>5} {str(h.c[d]):>12} {na[d]:>14.6g}")
    print(f"slope of log|a~(d)|^2: {growth_exponent(h, scan.hits):.3f}")


if __name__ == "__main__":
    main()
