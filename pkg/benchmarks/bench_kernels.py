"""Time the numba and numpy versions of the Hungarian solver and permutation scores.

    python benchmarks/bench_kernels.py --sizes 10 50 100 200 --repeats 5
"""

import argparse
import time

import numpy as np
from scipy.optimize import linear_sum_assignment

from monofw import _kernels as K


def best_of(fn, repeats):
    t = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        t = min(t, time.perf_counter() - t0)
    return t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 50, 100, 200])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--active", type=int, default=200, help="number of permutations scored")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", default=None, help="optional SVG path for a timing plot")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    if not K.HAVE_NUMBA:
        print("numba not installed; both columns time the numpy path")

    # compile outside the timed region
    K.hungarian_numba(rng.random((3, 3)))
    K.perm_scores_numba(rng.random((3, 3)), np.array([[0, 1, 2]]))

    rows = []
    print(f"{'n':>5} {'hung_numba':>11} {'hung_numpy':>11} {'scipy':>11} {'speedup':>8} "
          f"{'score_numba':>12} {'score_numpy':>12}")
    for n in args.sizes:
        C = rng.random((n, n))
        a = K.hungarian_numba(C)
        b = K.hungarian_numpy(C)
        r, c = linear_sum_assignment(C)
        assert np.isclose(C[np.arange(n), a].sum(), C[r, c].sum())
        assert np.isclose(C[np.arange(n), b].sum(), C[r, c].sum())
        t_nb = best_of(lambda: K.hungarian_numba(C), args.repeats)
        t_np = best_of(lambda: K.hungarian_numpy(C), args.repeats)
        t_sp = best_of(lambda: linear_sum_assignment(C), args.repeats)
        sig = np.array([rng.permutation(n) for _ in range(args.active)])
        assert np.allclose(K.perm_scores_numba(C, sig), K.perm_scores_numpy(C, sig))
        s_nb = best_of(lambda: K.perm_scores_numba(C, sig), args.repeats)
        s_np = best_of(lambda: K.perm_scores_numpy(C, sig), args.repeats)
        rows.append((n, t_nb, t_np, t_sp))
        print(f"{n:>5} {t_nb:>11.2e} {t_np:>11.2e} {t_sp:>11.2e} {t_np / t_nb:>8.1f} {s_nb:>12.2e} {s_np:>12.2e}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        rows = np.array(rows)
        fig, ax = plt.subplots(figsize=(5, 4))
        for j, lab in ((1, "numba"), (2, "numpy"), (3, "scipy")):
            ax.loglog(rows[:, 0], rows[:, j], "o-", label=lab)
        ax.set_xlabel("n")
        ax.set_ylabel("seconds (best of %d)" % args.repeats)
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot)


if __name__ == "__main__":
    main()
