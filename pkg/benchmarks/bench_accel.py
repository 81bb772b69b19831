"""Benchmark the numba kernels against their pure-numpy twins.

Usage:  python benchmarks/bench_accel.py [--restarts N] [--samples N]

Times the two hot kernels on representative workloads: the product-state
seesaw on the 3-party two-factor ensemble cut (4 x 16) and on a two-qubit
factor pair (4 x 4), plus the bulk product-expectation sampler.  The numpy
column is what you get with ENTKIT_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

from entkit import Bipartition, EnsembleSpec, ghz, max_ent, w_state
from entkit import _accel
from entkit.states import (
    cut_dims,
    cut_major_vector,
    cut_permutation,
    ensemble_product_vector,
    fine_dims,
    schmidt_state,
)
from entkit.tensor import kron_all, permute_systems


def seesaw_problem(factors, restarts, seed):
    spec = EnsembleSpec(tuple(factors), 0.0)
    grid = tuple(f.party_dims for f in factors)
    cut = Bipartition((0,), tuple(range(1, factors[0].n_parties)))
    comps = [np.eye(f.dim, dtype=complex) - f.density() for f in factors]
    dim = int(np.prod([f.dim for f in factors]))
    q = np.eye(dim, dtype=complex) - kron_all(comps)
    dims = fine_dims(grid)
    perm = cut_permutation(grid, cut)
    da, db = cut_dims(grid, cut)
    qt = np.ascontiguousarray(permute_systems(q, dims, perm).reshape(da, db, da, db))
    psi = np.ascontiguousarray(cut_major_vector(ensemble_product_vector(spec), grid, cut).reshape(da, db))
    rng = np.random.default_rng(seed)
    sa = rng.standard_normal((restarts, da)) + 1j * rng.standard_normal((restarts, da))
    sb = rng.standard_normal((restarts, db)) + 1j * rng.standard_normal((restarts, db))
    return qt, psi, sa, sb


def expectation_problem(samples, seed):
    da = db = 6
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((da * db, da * db)) + 1j * rng.standard_normal((da * db, da * db))
    w = np.ascontiguousarray((g + g.conj().T).reshape(da, db, da, db))
    alphas = rng.standard_normal((samples, da)) + 1j * rng.standard_normal((samples, da))
    betas = rng.standard_normal((samples, db)) + 1j * rng.standard_normal((samples, db))
    return w, alphas, betas


def timeit(fn, *args, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--restarts", type=int, default=100)
    parser.add_argument("--samples", type=int, default=20000)
    args = parser.parse_args()

    workloads = [
        ("seesaw GHZ+W cut (4x16)", seesaw_problem((ghz([2, 2, 2]), w_state(3)), args.restarts, 1)),
        (
            "seesaw qubit pair (4x4)",
            seesaw_problem((schmidt_state((0.9, np.sqrt(1 - 0.81))), max_ent(2)), args.restarts, 2),
        ),
    ]

    print(f"{'workload':32s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, (qt, psi, sa, sb) in workloads:
        t_np, out_np = timeit(_accel.seesaw_minimize_numpy, qt, psi, sa, sb, 300, 1e-12, 5, 1e-12)
        if _accel.seesaw_minimize_numba is not None:
            _accel.seesaw_minimize_numba(qt, psi, sa[:1], sb[:1], 300, 1e-12, 5, 1e-12)  # compile
            t_nb, out_nb = timeit(_accel.seesaw_minimize_numba, qt, psi, sa, sb, 300, 1e-12, 5, 1e-12)
            assert abs(out_np[0] - out_nb[0]) < 1e-8
            print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:32s} {t_np:10.4f} {'n/a':>10s} {'':>8s}")

    name = f"expectations ({args.samples} samples)"
    w, alphas, betas = expectation_problem(args.samples, 3)
    t_np, v_np = timeit(_accel.batch_product_expectations_numpy, w, alphas, betas)
    if _accel.batch_product_expectations_numba is not None:
        _accel.batch_product_expectations_numba(w, alphas[:10], betas[:10])  # compile
        t_nb, v_nb = timeit(_accel.batch_product_expectations_numba, w, alphas, betas)
        assert np.abs(v_np - v_nb).max() < 1e-9
        print(f"{name:32s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")
    else:
        print(f"{name:32s} {t_np:10.4f} {'n/a':>10s}")


if __name__ == "__main__":
    main()
