"""Time mod-p rank on random square matrices, compiled kernel vs pure Python."""
import argparse
import random
import time

from tensorcert import _modp_py

try:
    from tensorcert import _modp
except ImportError:  # extension not built
    _modp = None


def best_of(fn, rows, n, p, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        r = fn([row[:] for row in rows], n, p)
        best = min(best, time.perf_counter() - t0)
    return best, r


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="50,100,200")
    ap.add_argument("--p", type=int, default=7919)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    print(f"{'n':>5} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        rows = [[rng.randrange(args.p) for _ in range(n)] for _ in range(n)]
        tp, rp = best_of(_modp_py.rank_modp, rows, n, args.p, args.repeat)
        if _modp is None:
            print(f"{n:>5} {tp:>10.4f} {'n/a':>11} {'n/a':>8}")
            continue
        tc, rc = best_of(_modp.rank_modp, rows, n, args.p, args.repeat)
        assert rp == rc, (rp, rc)
        print(f"{n:>5} {tp:>10.4f} {tc:>11.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
