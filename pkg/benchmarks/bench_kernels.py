"""Times the compiled coordinate-descent kernel against the NumPy fallback.

The solver picks its kernel at import time, so each backend is measured in
a fresh subprocess (PAUC_PUSH_PURE_PYTHON=1 forces the fallback).  Two
workloads are reported: raw quadratic-subproblem solves (the kernel alone)
and full lasso path fits through the public API.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --n 200 --p 1000 --repeats 5
"""
import argparse
import json
import os
import pathlib
import subprocess
import sys
import time

SRC = str(pathlib.Path(__file__).resolve().parents[1] / "src")


def measure(n, p, repeats, seed):
    import numpy as np

    sys.path.insert(0, SRC)
    import pauc_push
    from pauc_push import Dataset, FitConfig, fit_path
    from pauc_push import _kernels

    rng = np.random.default_rng(seed)

    # raw kernel: one penalized weighted least-squares subproblem
    XT = np.ascontiguousarray(rng.normal(size=(p, n)))
    omega = rng.uniform(0.1, 0.25, n)
    u0 = rng.normal(size=n)
    cols = np.arange(p, dtype=np.int64)
    col_curv = (XT * XT) @ omega
    lam = 0.4 * float(np.max(np.abs(XT @ u0)))
    kernel_times = []
    for _ in range(repeats):
        u = u0.copy()
        beta = np.zeros(p)
        intercept = np.array([0.0])
        start = time.perf_counter()
        sweeps, _ = _kernels.cd_solve(
            XT, u, omega, beta, intercept, cols, col_curv,
            lam, 0.0, float(omega.sum()), True, 1e-9, 10_000,
        )
        kernel_times.append(time.perf_counter() - start)

    # full fits: a 50-step lasso path on a synthetic two-class panel
    n_pos = n // 2
    X = rng.normal(size=(n, p))
    X[:n_pos, : min(3, p)] += 0.9
    labels = np.concatenate([np.ones(n_pos, int), -np.ones(n - n_pos, int)])
    data = Dataset(labels, X, tuple(f"x{j}" for j in range(p)))
    config = FitConfig(w=4.0, penalty="lasso")
    path_times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fit_path(data, config, n_lambdas=50, lambda_min_ratio=0.01)
        path_times.append(time.perf_counter() - start)

    return {
        "backend": pauc_push.kernel_backend(),
        "kernel_sweeps": int(sweeps),
        "kernel_best_s": min(kernel_times),
        "path_best_s": min(path_times),
    }


def run_child(force_python, args):
    env = dict(os.environ)
    env["PYTHONPATH"] = SRC + os.pathsep + env.get("PYTHONPATH", "")
    env["PAUC_PUSH_PURE_PYTHON"] = "1" if force_python else ""
    out = subprocess.run(
        [
            sys.executable, __file__, "--child",
            "--n", str(args.n), "--p", str(args.p),
            "--repeats", str(args.repeats), "--seed", str(args.seed),
        ],
        capture_output=True,
        text=True,
        env=env,
    )
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return json.loads(out.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--p", type=int, default=500)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        print(json.dumps(measure(args.n, args.p, args.repeats, args.seed)))
        return 0

    results = [run_child(False, args), run_child(True, args)]
    if results[0]["backend"] == results[1]["backend"]:
        print("note: compiled kernel unavailable, both rows use the fallback")
    print(f"\nworkload: n={args.n}, p={args.p}, best of {args.repeats}")
    print(f"{'backend':<10} {'kernel solve':>14} {'lasso path (50)':>16}")
    for row in results:
        print(
            f"{row['backend']:<10} {row['kernel_best_s'] * 1e3:>12.2f}ms"
            f" {row['path_best_s']:>14.3f}s"
        )
    if results[1]["kernel_best_s"] > 0 and results[0]["backend"] != results[1]["backend"]:
        speedup = results[1]["kernel_best_s"] / results[0]["kernel_best_s"]
        path_speedup = results[1]["path_best_s"] / results[0]["path_best_s"]
        print(f"\nspeedup (compiled vs python): kernel {speedup:.1f}x, path {path_speedup:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
