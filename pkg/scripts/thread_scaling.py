"""Wall time of the Siegel coefficient build for several thread counts.

    python3 scripts/thread_scaling.py --bound 1500 --threads 1 2 4 8
"""

import argparse
import os
import time

from yoshida.quaternion import select_pair
from yoshida.siegel import build_yoshida


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bound", type=int, default=1500)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4, 8])
    args = ap.parse_args()
    P = select_pair((6, 2), 20)[0]
    print(f"level {P.N1}, bound {args.bound}, {os.cpu_count()} CPU(s)")
    base = None
    ref = None
    for n in args.threads:
        t0 = time.perf_counter()
        t = build_yoshida(P.order, P.f_space, P.f, P.g, args.bound, threads=n)
        wall = time.perf_counter() - t0
        text = t.to_text()
        if ref is None:
            base, ref = wall, text
        same = "same" if text == ref else "DIFFERENT"
        print(f"threads={n:<3} wall={wall:7.2f}s speedup={base / wall:5.2f}x table={same}")


if __name__ == "__main__":
    main()
