"""Time the explicit-state oracle under the numba and numpy kernels.

    python3 benchmarks/bench_oracle.py [--repeat 3] [--n 2 3]

The first numba call includes JIT compilation and is reported separately.
"""
import argparse
import time
from pathlib import Path

from predkit import _kernels as K
from predkit.model import load_model, parse_property
from predkit.oracle import explore, label

MODEL = Path(__file__).resolve().parents[1] / "src" / "predkit" / "fixtures" / "ticket.pm"
BOX = {"s": (0, 6), "t": (0, 6), "z": (0, 4), "a1": (0, 6), "a2": (0, 6), "a3": (0, 6)}
PROPS = ["AG(z <= 1)", "AF(z = 0)", "EG(s >= t)"]


def _once(ts, props, box):
    t0 = time.perf_counter()
    g = explore(ts, box, "truncate")
    t1 = time.perf_counter()
    for p in props:
        label(g, p)
    t2 = time.perf_counter()
    return len(g), t1 - t0, t2 - t1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3])
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    print(f"{'backend':8} {'n':>2} {'states':>7} {'explore s':>10} {'label s':>9}")
    for b in backends:
        K.use_backend(b)
        for n in args.n:
            ts = load_model(MODEL, n)
            box = {k: v for k, v in BOX.items() if k in ts.names}
            props = [parse_property(p, ts) for p in PROPS]
            if b == "numba":
                t0 = time.perf_counter()
                _once(ts, props, box)
                print(f"{b:8} {n:>2} {'(first call incl. JIT)':>20} {time.perf_counter() - t0:8.3f}")
            runs = [_once(ts, props, box) for _ in range(args.repeat)]
            size = runs[0][0]
            ex = min(r[1] for r in runs)
            lb = min(r[2] for r in runs)
            print(f"{b:8} {n:>2} {size:>7} {ex:>10.4f} {lb:>9.4f}")


if __name__ == "__main__":
    main()
