"""Command-line entry point.

Exit status: 0 success, 1 an experiment criterion failed (or a run did not
finish), 2 bad usage or an unreadable/invalid scene. Diagnostics go to
standard error and every file written lands under ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

from . import experiments as ex
from .model import FINGER_NAMES, validate
from .render import render_frame, write_frames
from .scene import SceneError, parse_scene, serialize_scene
from .solver import EquilibriumNotReached, NumericalBlowup, SimState, simulate

OK, FAILED, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 as well; keep the format
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"{path}: cannot read: {exc.strerror or exc}")
        return None
    try:
        return parse_scene(text)
    except SceneError as exc:
        for d in exc.diagnostics:
            _err(f"{path}:{d.line}:{d.column}: {d.message}"
                 + (f" (expected {', '.join(d.expected)})" if d.expected else ""))
        return None


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def _print_reports(reports) -> None:
    for r in reports:
        for name, value, unit, flag in r.rows():
            mark = {"true": "PASS", "false": "FAIL"}.get(flag, "")
            print(f"{name:<48} {value:>12} {unit:<9} {mark}")


def _finish(reports, out: Path | None, stem: str) -> int:
    if out is not None:
        _write(out, f"{stem}.csv", ex.reports_to_csv(reports))
        _write(out, f"{stem}_manifest.json", ex.manifest(reports))
    return OK if all(r.passed for r in reports) else FAILED


# --------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    scene = _load(args.scene)
    if scene is None:
        return USAGE
    report = validate(scene.hand)
    if not report.ok:
        for v in report.violations:
            _err(f"{args.scene}: {v}")
        return USAGE
    print(f"{args.scene}: ok ({len(scene.hand.fingers)} fingers, "
          f"{scene.hand.joint_count} joints, {scene.hand.guide_count} guides)")
    return OK


def _trace_csv(trace: Sequence[SimState], scene) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    fingers = [f.name for f in scene.hand.fingers]
    head = ["t"] + [f"q_{n}_{j + 1}" for n in fingers for j in range(3)]
    head += [f"tension_{r.side}_{fingers[r.finger_id]}" for r in scene.hand.routes]
    head += [f"obj{i}_{k}" for i in range(len(scene.objects)) for k in ("x", "y", "theta")]
    head += ["contacts", "residual"]
    w.writerow(head)
    for s in trace:
        row = [s.t] + list(s.q.ravel()) + [t.tension_at_spool for t in s.tendons]
        row += list(s.obj_pose.ravel()) + [len(s.contacts), s.residual]
        w.writerow([ex._num(float(x)) for x in row])
    return buf.getvalue()


def cmd_run(args) -> int:
    scene = _load(args.scene)
    if scene is None:
        return USAGE
    report = validate(scene.hand)
    if not report.ok:
        for v in report.violations:
            _err(f"{args.scene}: {v}")
        return USAGE
    sim = scene.sim
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.t_end is not None:
        changes["t_end"] = args.t_end
    if changes:
        from dataclasses import replace

        scene = replace(scene, sim=replace(sim, **changes))
    if scene.sim.dt <= 0 or scene.sim.t_end < 0:
        _err("dt must be positive and t-end non-negative")
        return USAGE
    status = OK
    try:
        trace = simulate(scene)
    except EquilibriumNotReached as exc:
        _err(f"equilibrium not reached (residual {exc.residual:.3g} N*m)")
        trace, status = exc.trace, FAILED
    except NumericalBlowup as exc:
        _err(f"numerical blowup: {exc}")
        trace = [exc.state] if exc.state is not None else []
        status = FAILED
    out = Path(args.out)
    _write(out, "scene.shs", serialize_scene(scene))
    _write(out, "trace.csv", _trace_csv(trace, scene))
    frames = write_frames(trace, scene, out / "frames", args.frames) if trace else []
    doc = {
        "scene": "scene.shs",
        "trace": "trace.csv",
        "frames": [str(p.relative_to(out)) for p in frames],
        "states": len(trace),
        "t_final": trace[-1].t if trace else None,
        "status": "ok" if status == OK else "failed",
    }
    _write(out, "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"{len(trace)} states, {len(frames)} frames written to {out}")
    return status


def cmd_table1(args) -> int:
    reports = ex.run_table1()
    text = ex.table1_text(reports)
    sys.stdout.write(text)
    out = Path(args.out)
    _write(out, "table1.txt", text)
    return _finish(reports, out, "table1")


def cmd_grasps(args) -> int:
    reports, finals = ex.run_grasp_suite(keep_states=True)
    out = Path(args.out)
    for rep, (scene, state) in zip(reports, finals):
        if state is not None:
            name = rep.name.removeprefix("grasp_")
            path = _write(out / "frames", f"{name}.svg", render_frame(state, scene))
            rep.traces.append(str(path.relative_to(out)))
    _print_reports(reports)
    return _finish(reports, out, "grasps")


def cmd_blocked(args) -> int:
    report = ex.run_blocked_finger(args.finger, args.fractions)
    _print_reports([report])
    return _finish([report], Path(args.out) if args.out else None, f"blocked_{args.finger}")


def cmd_slack(args) -> int:
    report = ex.run_slack_demo(args.sweep)
    _print_reports([report])
    return _finish([report], Path(args.out) if args.out else None, "slack")


# ------------------------------------------------------------------ parser


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _slack_list(text: str) -> list[float]:
    vals = _float_list(text)
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("slack values must be non-negative")
    return vals


def _fractions(text: str) -> list[float]:
    vals = _float_list(text)
    if any(not 0.0 <= v <= 1.0 for v in vals):
        raise argparse.ArgumentTypeError("block fractions must lie in [0, 1]")
    return vals


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edusofthand", description="Planar tendon-driven hand simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="parse a scene file and check the hand model")
    v.add_argument("scene")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="simulate a scene file")
    r.add_argument("scene")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--dt", type=float, help="time step override (s)")
    r.add_argument("--t-end", type=float, dest="t_end", help="end time override (s)")
    r.add_argument("--frames", type=_positive_int, default=10, help="SVG frames to write")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table1", help="run the seven response and load rows")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_table1)

    g = sub.add_parser("grasps", help="run the object grasp suite")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_grasps)

    b = sub.add_parser("blocked", help="close the hand with one finger held")
    b.add_argument("--finger", required=True, choices=FINGER_NAMES)
    b.add_argument("--fractions", type=_fractions, default=[0.5],
                   help="comma-separated block fractions of the flexion range")
    b.add_argument("--out")
    b.set_defaults(func=cmd_blocked)

    s = sub.add_parser("slack", help="reopening delay against antagonist slack")
    s.add_argument("--sweep", type=_slack_list, default=[0.0, 5.0, 10.0, 20.0],
                   help="comma-separated slack values (mm)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_slack)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        _err(f"error: {exc}")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
