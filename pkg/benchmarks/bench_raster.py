#!/usr/bin/env python3
"""Benchmark the compiled rasterization kernels against the numpy fallback.

Usage: python3 benchmarks/bench_raster.py [--repeats N]

Times the two hot kernels (z-buffer rasterization and ordered
scatter-add) on icosphere scenes at several resolutions, then the full
loss-and-gradient step through each backend.
"""

import argparse
import time

import numpy as np

from meshlift._kernels import _raster_np, available_backends
from meshlift.cameras import OrthoCamera
from meshlift.mesh import icosphere
from meshlift.render import project


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = [("numpy", _raster_np)]
    if "cython" in available_backends():
        from meshlift._kernels import _raster_cy

        backends.append(("cython", _raster_cy))
    else:
        print("note: compiled kernel not built, benchmarking fallback only")

    print(f"{'scene':<28}{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    rng = np.random.default_rng(0)

    for level, res in [(2, 128), (3, 256), (4, 512)]:
        mesh = icosphere((0, 0, 0), 0.9, level)
        cam = OrthoCamera(30.0, 0.0, 1.0, res)
        xy, z = project(cam, mesh.positions)
        faces = np.ascontiguousarray(mesh.faces, dtype=np.int32)
        times = [
            _time(lambda m=m: m.raster_forward(xy, z, faces, res, res), args.repeats)
            for _, m in backends
        ]
        row = f"sphere L{level} @ {res}x{res}"
        print(f"{row:<28}{'raster_forward':<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
              + (f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""))

        n = res * res // 2
        idx = rng.integers(0, mesh.n_vertices, size=n)
        vals = rng.normal(size=(n, 3))
        times = []
        for _, m in backends:
            out = np.zeros((mesh.n_vertices, 3))
            times.append(_time(lambda m=m, out=out: m.add_at_vec(out, idx, vals), args.repeats))
        print(f"{'':<28}{'add_at_vec':<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
              + (f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""))

    # full differentiable step through whichever backend is active
    from meshlift.render import LossWeights, loss_and_gradients, render_conditions
    from meshlift.cameras import standard_rig_six
    from meshlift import _kernels

    mesh = icosphere((0, 0, 0), 0.9, 3)
    targets = render_conditions(icosphere((0, 0, 0), 0.85, 3), standard_rig_six(256, 1.0))
    t = _time(lambda: loss_and_gradients(mesh, targets, LossWeights()), max(2, args.repeats // 2))
    print(f"\nfull loss+gradient step (6 views @ 256, {mesh.n_faces} faces, "
          f"{_kernels.BACKEND} backend): {t * 1e3:.1f} ms")
    print("set MESHLIFT_KERNEL=numpy to time the fallback end to end")


if __name__ == "__main__":
    main()
