"""Benchmark the compiled kernel core against the NumPy fallback.

Run from the repository root after building the extension in place:

    python setup.py build_ext --inplace
    python benchmarks/bench_kernels.py

Times the three hot kernels on representative workloads: adaptive
propagation of a sweep block and of the full 4x4 problem, the fixed-step
noisy ensemble stepper, and the double-double Kummer series that feeds the
parabolic cylinder evaluation.
"""

import math
import time

import numpy as np

import lmszpair._kernels._pyfallback as py_backend

try:
    import lmszpair._kernels._core as cy_backend
except ImportError:
    cy_backend = None

_EMPTY = np.empty(0)


def timed(fn, *args, repeat=3):
    best = math.inf
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_block_sweep(backend):
    grid = np.linspace(-100.0, 100.0, 2001)
    hp = np.array([1.0, math.sqrt(0.5), 0.0, 0.0])
    return timed(
        backend.propagate_linear_tdse,
        py_backend.FIELD_RAMP_SPIN1, np.array([1.0, 0.0]), _EMPTY, _EMPTY, _EMPTY,
        2, hp, np.array([1.0 + 0j, 0.0]), grid, 1e-10, 1e-12,
    )


def bench_full_4x4(backend):
    grid = np.linspace(-50.0, 50.0, 501)
    hp = np.array([0.8, 0.3, 0.4, 0.0, 0.0])
    y0 = np.full(4, 0.5, dtype=complex)
    return timed(
        backend.propagate_linear_tdse,
        py_backend.FIELD_RAMP_SPIN1, np.array([1.0, 0.0]), _EMPTY, _EMPTY, _EMPTY,
        4, hp, y0, grid, 1e-10, 1e-12,
    )


def bench_noisy_chunk(backend):
    rng = np.random.default_rng(0)
    noise = rng.normal(size=(512, 40_000))
    w_det = 0.5 * np.linspace(-100, 100, 40_000)
    u0 = np.array([0.0, 1.0], dtype=complex)
    return timed(backend.noisy_block_final, w_det, 0.5, noise,
                 math.sqrt(0.5), 200.0 / 40_000, u0, repeat=2)


def bench_kummer(backend):
    def run():
        acc = 0.0
        for r in np.linspace(0.5, 9.0, 200):
            acc += abs(backend.kummer_m_dd(-0.25j, 0.5, 0.5j * r * r))
        return acc

    return timed(run)


BENCHES = [
    ("block sweep, tau in [-100, 100], rtol 1e-10", bench_block_sweep),
    ("full 4x4 sweep, tau in [-50, 50]", bench_full_4x4),
    ("noisy ensemble chunk, 512 x 40k steps", bench_noisy_chunk),
    ("Kummer dd series, 200 evaluations", bench_kummer),
]


def main():
    backends = [("python", py_backend)]
    if cy_backend is not None:
        backends.append(("compiled", cy_backend))
    else:
        print("compiled core not built; benchmarking the fallback only\n")

    width = max(len(name) for name, _ in BENCHES)
    header = f"{'kernel':<{width}}  " + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, bench in BENCHES:
        times = []
        for _, backend in backends:
            t, _ = bench(backend)
            times.append(t)
        row = f"{name:<{width}}  " + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
