"""Central values L(1/2, f x theta_chi) and L(1/2, g x theta_chi) for small d.

Loops over odd squarefree d <= X coprime to the level and every class group
character, whether or not the Bessel sum vanishes.
"""

import argparse
import math

from yoshida.bessel import bessel_sums, scan_discs
from yoshida.classfield import characters, class_group
from yoshida.lfunc import PrecisionUnreachable, central_value, form_ldata
from yoshida.pipeline import Context, RunConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cache-dir")
    ap.add_argument("--X", type=int, default=40)
    args = ap.parse_args()
    ctx = Context(RunConfig.from_dict({"cache_dir": args.cache_dir} if args.cache_dir else {}))
    N = ctx.pair.N1
    ds = [d for d in scan_discs(args.X) if math.gcd(d, N) == 1]
    F = ctx.series("f", ctx.needed_terms("f", ds))
    G = ctx.series("g", ctx.needed_terms("g", ds))
    print(f"{'d':>4} {'chi':>3} {'B!=0':>5} {'L(f)':>16} {'L(g)':>16}")
    for d in ds:
        rep = bessel_sums(ctx.table, d)
        for chi in characters(class_group(d)):
            try:
                lf = central_value(form_ldata(F, chi)).value.real
                lg = central_value(form_ldata(G, chi)).value.real
            except PrecisionUnreachable as e:
                print(f"{d:>4} {chi.index:>3} skipped: {e}")
                continue
            nz = bool(rep.per_chi[chi.index])
            print(f"{d:>4} {chi.index:>3} {str(nz):>5} {lf:>16.10g} {lg:>16.10g}")


if __name__ == "__main__":
    main()
