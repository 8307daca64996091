"""Time the numba and numpy kernel backends on the sweep workloads.

    python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from envwit import kernels
from envwit.ensembles import RngStream, hs_density_batch, pseudo_pure_batch
from envwit.matcore import BipartiteDims
from envwit.pncp import generalized_choi, theta_params
from envwit.witness import _adjoint_in_basis


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(n):
    q2 = hs_density_batch(n, BipartiteDims(2, 2), RngStream(1))
    q3 = hs_density_batch(n, BipartiteDims(3, 3), RngStream(2))
    pp, _ = pseudo_pure_batch(n, RngStream(3))
    adj = np.ascontiguousarray(_adjoint_in_basis(generalized_choi(theta_params(1.0)), np.eye(3, dtype=complex)))
    w = np.ascontiguousarray(q3[0])
    d3 = kernels.numpy_impl.delta_t_batch(q3, 3, 3)
    table, sizes, _ = kernels.subset_table(3)
    return {
        "pt_min_eig 2x2": lambda m: m.pt_min_eig(q2, 2, 2),
        "pt_min_eig 3x3": lambda m: m.pt_min_eig(q3, 3, 3),
        "delta_t_batch 3x3": lambda m: m.delta_t_batch(q3, 3, 3),
        "delta_lambda_batch 3x3": lambda m: m.delta_lambda_batch(pp, adj, 3, 3),
        "sym_det 3x3": lambda m: m.sym_det(d3),
        "minors_batch 3x3": lambda m: m.minors_batch(d3, table, sizes),
        "expectation_batch 9x9": lambda m: m.expectation_batch(w, q3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="batch size")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    nb = kernels.numba_impl()
    backends = {"numpy": kernels.numpy_impl}
    if nb is not None:
        backends["numba"] = nb
    jobs = workloads(args.n)
    for fn in jobs.values():  # compile and check agreement once
        outs = [np.asarray(fn(m)) for m in backends.values()]
        if len(outs) == 2 and not np.allclose(outs[0], outs[1], atol=1e-12):
            raise SystemExit("backends disagree")

    print(f"batch size {args.n}, best of {args.repeat}")
    header = f"{'kernel':<26}" + "".join(f"{b + ' [ms]':>14}" for b in backends) + ("    speedup" if nb else "")
    print(header)
    for name, fn in jobs.items():
        t = {b: best_of(lambda: fn(m), args.repeat) for b, m in backends.items()}
        line = f"{name:<26}" + "".join(f"{1e3 * t[b]:>14.2f}" for b in backends)
        if nb:
            line += f"{t['numpy'] / t['numba']:>10.1f}x"
        print(line)


if __name__ == "__main__":
    main()
