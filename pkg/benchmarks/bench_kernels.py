"""Compare the compiled and pure-Python shooting kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints the time per
half-axis shot for each backend and the time of one full Newton solve with
each backend selected at import.
"""
import os
import subprocess
import sys
import timeit

from ptgpe import _kernels_py
from ptgpe.integrator import half_grid

SOLVE = """
import time
from ptgpe import BACKEND, SolverSettings, SystemParams, validate
from ptgpe.spectrum import real_states
params, settings = validate(SystemParams(2.2, 0.3, 1.0), SolverSettings())
t0 = time.perf_counter()
real_states(params, settings)
print(BACKEND, time.perf_counter() - t0)
"""


def shot_times(repeat=5):
    t, itrap = half_grid(1.1, 26.1, 0.01)
    args = (0.4 + 0j, -0.1 + 0j, 0.6, 1.0, 1 - 0.3j, t, itrap, 1e-12, 1e-14)
    backends = {"python": _kernels_py}
    try:
        from ptgpe import _kernels
        backends["compiled"] = _kernels
    except ImportError:
        print("compiled extension not built; only the python kernel is timed")
    out = {}
    for name, mod in backends.items():
        n = 3 if name == "python" else 50
        best = min(timeit.repeat(lambda: mod.shoot_standard(*args), number=n, repeat=repeat))
        out[name] = best / n
    return out


def solve_time(pure: bool):
    env = dict(os.environ)
    env.pop("PTGPE_PURE_PYTHON", None)
    if pure:
        env["PTGPE_PURE_PYTHON"] = "1"
    res = subprocess.run([sys.executable, "-c", SOLVE], env=env, capture_output=True,
                         text=True, check=True)
    backend, secs = res.stdout.split()
    return backend, float(secs)


def main():
    times = shot_times()
    print(f"{'backend':<10} {'shot [ms]':>12}")
    for name, secs in times.items():
        print(f"{name:<10} {1e3 * secs:12.3f}")
    if len(times) == 2:
        print(f"kernel speed-up: {times['python'] / times['compiled']:.1f}x")
    print()
    print(f"{'backend':<10} {'g-continued solve [s]':>22}")
    for pure in (False, True):
        backend, secs = solve_time(pure)
        print(f"{backend:<10} {secs:22.2f}")


if __name__ == "__main__":
    main()
