"""Compare the compiled coefficient kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--order 8]

Micro benchmarks call both kernel modules on identical data in-process.  The
end-to-end rows run the same workload in a subprocess per backend, selecting
the fallback with QUANTUM3D_PURE_PYTHON=1.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from gmpy2 import mpq

from quantum3d import _pykernels
from quantum3d.kernel import ParamPoly, ZSeries

try:
    from quantum3d import _ckernels
except ImportError:
    _ckernels = None

NAMES = ("a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3", "rho")

END_TO_END = {
    "verify 16 cases": """
from quantum3d.catalog import CASE_IDS, catalog_table
from quantum3d.hopf import all_checks
for cid in CASE_IDS:
    c = catalog_table(cid, order={order})
    assert all(r.passed for r in all_checks(c.hopf, c.table))
""",
    "quantize family.1.1": """
from quantum3d.catalog import catalog_table
from quantum3d.quantizer import quantize
quantize(catalog_table("family.1.1", order={order}).spec(), {order})
""",
    "normal order words <= 5": """
from itertools import product
from quantum3d.algebra import normal_order
from quantum3d.catalog import catalog_table
t = catalog_table("2.2.1", order={order}).table
for n in range(6):
    for w in product("ABC", repeat=n):
        normal_order("".join(w), t)
""",
}


def random_poly(rng, terms):
    p = ParamPoly.zero()
    for _ in range(terms):
        t = ParamPoly.const(mpq(rng.randint(-9, 9), rng.randint(1, 5)))
        for _ in range(rng.randint(0, 3)):
            t = t * ParamPoly.var(rng.choice(NAMES))
        p = p + t
    return p


def micro(repeat, order):
    rng = random.Random(20240611)
    polys = [random_poly(rng, 12)._t for _ in range(2)]
    series = [ZSeries([random_poly(rng, 4) for _ in range(order + 1)], order)._c for _ in range(2)]
    cases = {
        "poly_mul (12 x 12 terms)": lambda k: k.poly_mul(*polys),
        "poly_add (12 + 12 terms)": lambda k: k.poly_add(*polys),
        f"series_mul (order {order})": lambda k: k.series_mul(*series, order),
    }
    rows = []
    for name, fn in cases.items():
        number = 200
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=number, repeat=repeat)) / number
        t_c = (min(timeit.repeat(lambda: fn(_ckernels), number=number, repeat=repeat)) / number
               if _ckernels else None)
        rows.append((name, t_c, t_py))
    return rows


def end_to_end(repeat, order):
    rows = []
    for name, code in END_TO_END.items():
        code = code.format(order=order)
        times = {}
        for backend, pure in (("compiled", "0"), ("python", "1")):
            env = dict(os.environ, QUANTUM3D_PURE_PYTHON=pure)
            probe = ("import time, quantum3d\n"
                     f"assert quantum3d.BACKEND == {backend!r}, quantum3d.BACKEND\n"
                     "started = time.perf_counter()\n" + code + "\nprint(time.perf_counter() - started)\n")
            runs = []
            for _ in range(repeat):
                out = subprocess.run([sys.executable, "-c", probe], env=env, capture_output=True, text=True)
                if out.returncode:
                    runs = None
                    break
                runs.append(float(out.stdout.strip().splitlines()[-1]))
            times[backend] = min(runs) if runs else None
        rows.append((name, times["compiled"], times["python"]))
    return rows


def fmt(t):
    if t is None:
        return "n/a"
    return f"{t * 1e6:.1f} us" if t < 1e-2 else f"{t:.3f} s"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--order", type=int, default=8)
    args = ap.parse_args()
    print(f"{'workload':34} {'compiled':>12} {'python':>12} {'speedup':>8}")
    for title, rows in (("kernels", micro(args.repeat, args.order)),
                        ("end to end", end_to_end(max(1, args.repeat // 2), min(args.order, 6)))):
        print(f"-- {title}")
        for name, t_c, t_py in rows:
            ratio = f"{t_py / t_c:.1f}x" if t_c and t_py else "n/a"
            print(f"{name:34} {fmt(t_c):>12} {fmt(t_py):>12} {ratio:>8}")


if __name__ == "__main__":
    main()
