"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5] [--size 512]

Both implementations are imported directly, so the comparison does not
depend on PSHLAB_PURE_PYTHON. Each kernel is checked for agreement before it
is timed; the best of ``--repeat`` runs is reported.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from pshlab import _pykernels

try:
    from pshlab import _ckernels
except ImportError:
    _ckernels = None


def _cases(size: int):
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.uniform(0.2 ** 2, 1.0, size * size))
    z = r * np.exp(2j * np.pi * rng.uniform(size=size * size))
    r_edges = np.linspace(0.2, 1.0, size + 1)
    theta = np.linspace(0.0, 2 * np.pi, size, endpoint=False)
    grid = r_edges[:, None] * np.exp(1j * theta)[None, :]
    level = _pykernels.green_annulus(grid, 0.45, 0.2, 12) + 0.5
    return [
        ("green_disc", lambda k: k.green_disc(z, 0.4 + 0.1j)),
        ("green_annulus", lambda k: k.green_annulus(z, 0.45, 0.2, 12)),
        ("edge_fraction_area", lambda k: k.edge_fraction_area(level, r_edges)),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=512, help="points per axis")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<20} {'numpy [ms]':>11} {'compiled [ms]':>14} {'speedup':>8} {'max diff':>10}")
    for name, call in _cases(args.size):
        ref, fast = np.asarray(call(_pykernels)), np.asarray(call(_ckernels))
        diff = float(np.max(np.abs(ref - fast))) if ref.size else 0.0
        t_py = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat))
        print(f"{name:<20} {1e3 * t_py:11.2f} {1e3 * t_c:14.2f} {t_py / t_c:8.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
