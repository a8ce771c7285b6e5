"""Backend benchmark: compiled kernels versus the vectorized Python fallback.

Run as ``python -m patchbind.benchmark``.  Both backends produce bit-identical
trial outcomes for the capacitance walks (and for frozen-orientation Brownian
dynamics), so the comparison is purely about throughput; the table reports
wall-clock per workload and the speedup of the compiled extension when it is
available.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

from .backend import available_backends
from .bdsim import BdConfig, simulate_k0
from .core import ModelParams, derive_constants_from_D
from .kmc3d import LensSpec, lens_capacitance
from .kmc5d import KmcConfig, estimate_chi

__all__ = ["run_benchmark", "main"]


def _time(fn, repeats: int) -> float:
    """Best-of-N wall time of a callable."""
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_benchmark(
    kmc_trials: int = 50_000,
    lens_trials: int = 50_000,
    bd_trials: int = 200,
    repeats: int = 3,
    seed: int = 0,
) -> list[dict]:
    """Time representative workloads on every available backend.

    Returns one record per workload: workload name, trial count, and
    seconds-per-run keyed by backend name.
    """
    d = derive_constants_from_D(0.5, 0.5)
    kmc_cfg = KmcConfig(trials=kmc_trials, seed=seed)
    lens_spec = LensSpec(0.5)
    bd_params = ModelParams(Drot_A=0.5, Drot_B=0.5, N_A=5, N_B=5)
    bd_cfg = BdConfig(trials=bd_trials, seed=seed)

    workloads = [
        (
            "5D capacitance walk",
            kmc_trials,
            lambda name: estimate_chi(d, kmc_cfg, backend=name),
        ),
        (
            "lens capacitance walk",
            lens_trials,
            lambda name: lens_capacitance(lens_spec, lens_trials, seed=seed, backend=name),
        ),
        (
            "Brownian dynamics",
            bd_trials,
            lambda name: simulate_k0(bd_params, bd_cfg, backend=name),
        ),
    ]
    records = []
    for label, trials, runner in workloads:
        rec: dict = {"workload": label, "trials": trials, "seconds": {}}
        for name in available_backends():
            rec["seconds"][name] = _time(lambda: runner(name), repeats)
        records.append(rec)
    return records


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m patchbind.benchmark",
        description="Compare compiled and pure-Python backend throughput.",
    )
    parser.add_argument("--kmc-trials", type=int, default=50_000)
    parser.add_argument("--lens-trials", type=int, default=50_000)
    parser.add_argument("--bd-trials", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = available_backends()
    print(f"backends: {', '.join(names)}")
    records = run_benchmark(
        kmc_trials=args.kmc_trials,
        lens_trials=args.lens_trials,
        bd_trials=args.bd_trials,
        repeats=args.repeats,
        seed=args.seed,
    )
    width = max(len(r["workload"]) for r in records)
    header = f"{'workload':<{width}}  {'trials':>10}"
    for name in names:
        header += f"  {name + ' (s)':>14}"
    if "compiled" in names and "python" in names:
        header += f"  {'speedup':>8}"
    print(header)
    for rec in records:
        line = f"{rec['workload']:<{width}}  {rec['trials']:>10}"
        for name in names:
            line += f"  {rec['seconds'][name]:>14.4f}"
        if "compiled" in names and "python" in names:
            line += f"  {rec['seconds']['python'] / rec['seconds']['compiled']:>7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
