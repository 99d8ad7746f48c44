"""Compiled vs pure-Python kernels: per-call timings and a whole-hand run.

    python bench/bench_kernels.py [--number N] [--steps S] [--json PATH]

The per-kernel table calls both implementations directly on the same
inputs. The end-to-end row times a closing run in a child process, once
with the compiled backend and once with ``EDUSOFTHAND_PURE=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from edusofthand import _kernels_py
from edusofthand.kinematics import forward_kinematics, route_points_world
from edusofthand.model import build_default_hand

try:
    from edusofthand import _kernels as _compiled
except ImportError:
    _compiled = None


def kernel_cases():
    hand = build_default_hand()
    finger = hand.fingers[1]
    q = np.array([0.3, 0.4, 0.5])
    pose = forward_kinematics(finger, q)
    route = hand.route_for(1, "flexor")
    pts = route_points_world(route, pose)
    lengths = np.asarray(finger.lengths, float)
    r0 = finger.base_rotation
    base = np.asarray(finger.base, float)
    return {
        "chain_frames": (r0, base, lengths, q),
        "transform_points": (pose.rots, pose.origins, route.local, route.body),
        "route_geometry": (pts, route.body, pose.joints, pose.sigma),
        "point_segment": (3.0, 4.0, 0.0, 0.0, 10.0, 1.0),
        "segment_segment": (0.0, 0.0, 10.0, 1.0, 2.0, 5.0, 8.0, -3.0),
    }


def time_kernels(number: int) -> list[dict]:
    rows = []
    for name, args in kernel_cases().items():
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*args), number=number, repeat=5)) / number
        row = {"kernel": name, "python_us": t_py * 1e6}
        if _compiled is not None:
            cy = getattr(_compiled, name)
            t_cy = min(timeit.repeat(lambda: cy(*args), number=number, repeat=5)) / number
            row["cython_us"] = t_cy * 1e6
            row["speedup"] = t_py / t_cy
        rows.append(row)
    return rows


_CHILD = """
import time
from edusofthand import kernels
from edusofthand.experiments import configure_hand, _inits, _policy, _full_speed
from edusofthand.model import FINGER_NAMES
from edusofthand.scene import Scene, SimConfig
from edusofthand.solver import simulate
hand = configure_hand()
steps = {steps}
sc = Scene(hand=hand, init=_inits(hand, FINGER_NAMES), control=_policy("close", _full_speed(hand)),
           sim=SimConfig(t_end=steps * 0.001, record_every=steps))
t = time.perf_counter()
simulate(sc)
print(kernels.BACKEND, (time.perf_counter() - t) / steps)
"""


def time_run(steps: int, pure: bool) -> tuple[str, float]:
    env = dict(os.environ)
    if pure:
        env["EDUSOFTHAND_PURE"] = "1"
    else:
        env.pop("EDUSOFTHAND_PURE", None)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD.format(steps=steps)],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.split()
    return out[0], float(out[1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=20000, help="calls per timing")
    ap.add_argument("--steps", type=int, default=1000, help="simulation steps per run")
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)

    rows = time_kernels(args.number)
    print(f"{'kernel':<18} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for r in rows:
        cy = f"{r['cython_us']:10.2f}" if "cython_us" in r else f"{'n/a':>10}"
        sp = f"{r['speedup']:8.1f}" if "speedup" in r else f"{'n/a':>8}"
        print(f"{r['kernel']:<18} {r['python_us']:10.2f} {cy} {sp}")

    runs = {}
    for pure in (False, True):
        backend, per_step = time_run(args.steps, pure)
        runs["python" if pure else "default"] = {"backend": backend, "ms_per_step": per_step * 1e3}
    print()
    for label, r in runs.items():
        print(f"whole-hand close, {label:<8} backend={r['backend']:<7} {r['ms_per_step']:.3f} ms/step")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": rows, "runs": runs}, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
