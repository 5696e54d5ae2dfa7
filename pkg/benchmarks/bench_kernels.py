"""Compare the numba kernels with the pure-Python fallback.

Each backend runs in its own interpreter (the fallback is selected with
LOOPCERT_DISABLE_NUMBA=1 before import).  The numba child warms up once so
compile time is reported separately.

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workloads():
    import random

    from loopcert.bvmodel import axiom_check
    from loopcert.certify import brute_force_oracle
    from loopcert.exactcore import FieldSpec
    from loopcert.filtered import brute_force_c
    from loopcert.generators import random_admissible_model, random_class, random_complex
    from loopcert.models import builtin_s1, kunneth_product

    Q, F3 = FieldSpec.rationals(), FieldSpec.prime(3)
    s1 = builtin_s1(2, Q)
    t2 = kunneth_product(s1, s1, check=False)
    s1k3 = builtin_s1(3, F3)

    def axioms_t2():
        t2._cache.clear()
        return axiom_check(t2, engine="kernel").ok

    def axioms_s1k3():
        s1k3._cache.clear()
        return axiom_check(s1k3, engine="kernel").ok

    models = [random_admissible_model(s) for s in range(6)]

    def oracle():
        return sum(len(brute_force_oracle(m, 4)) for m in models)

    rng = random.Random(0)
    cases = []
    while len(cases) < 200:
        cx = random_complex(rng, max_gens=8)
        x = random_class(rng, cx)
        if x is not None:
            cases.append((cx, x))

    def spectral():
        return str(sum(brute_force_c(cx, x) for cx, x in cases))

    return {"axioms T2 K=2 (Q)": axioms_t2, "axioms S1 K=3 (F3)": axioms_s1k3,
            "oracle depth 4 x6": oracle, "brute_force_c x200": spectral}


def child(repeat: int) -> None:
    from loopcert import kernels

    out = {"backend": kernels.BACKEND, "rows": {}}
    for name, fn in workloads().items():
        t0 = time.perf_counter()
        value = fn()
        first = time.perf_counter() - t0
        best = first
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["rows"][name] = {"first": first, "best": best, "value": value}
    print(json.dumps(out))


def run_backend(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("LOOPCERT_DISABLE_NUMBA", None)
    if disable:
        env["LOOPCERT_DISABLE_NUMBA"] = "1"
    proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)],
                          capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        child(args.repeat)
        return 0
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    print(f"{'workload':<22} {fast['backend'] + ' first':>14} {fast['backend'] + ' best':>12} "
          f"{'python best':>12} {'speedup':>8}  same result")
    for name, row in fast["rows"].items():
        ref = slow["rows"][name]
        same = row["value"] == ref["value"]
        print(f"{name:<22} {row['first']:>13.3f}s {row['best']:>11.4f}s {ref['best']:>11.4f}s "
              f"{ref['best'] / row['best']:>7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
