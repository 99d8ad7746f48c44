import xml.etree.ElementTree as ET

import numpy as np

from edusofthand.contact import Circle
from edusofthand.render import frame_indices, render_frame, write_frames
from edusofthand.scene import ObjectSpec, Scene, SimConfig
from edusofthand.solver import initial_state, quasi_static_step, simulate

NS = "{http://www.w3.org/2000/svg}"


def _classes(svg, tag):
    root = ET.fromstring(svg)
    return [e.get("class", "") for e in root.iter(NS + tag)]


def test_same_state_same_bytes():
    sc = Scene()
    s = initial_state(sc)
    assert render_frame(s, sc) == render_frame(s, sc)


def test_straight_hand_counts():
    sc = Scene()
    svg = render_frame(initial_state(sc), sc)
    paths = _classes(svg, "path")
    assert paths.count("phalanx") == 16
    lines = _classes(svg, "polyline")
    assert sum(c.startswith("tendon") for c in lines) == 8
    assert lines.count("tendon flexor") == 4 and lines.count("tendon extensor") == 4
    assert 'stroke="#1f5fbf"' in svg and 'stroke="#c62828"' in svg


def test_one_contact_one_marker():
    # a fixed disc pressing 1 mm into the thumb's distal phalanx only
    disc = ObjectSpec("disc", Circle(20.0), 0.1, (-99.0, 127.5, 0.0), mobile=False)
    sc = Scene(objects=(disc,))
    s = quasi_static_step(initial_state(sc), sc)
    assert len(s.contacts) == 1
    svg = render_frame(s, sc)
    root = ET.fromstring(svg)
    groups = [g for g in root.iter(NS + "g") if g.get("class") == "contact"]
    assert len(groups) == 1
    assert len(list(groups[0].iter(NS + "circle"))) == 1
    assert _classes(svg, "line").count("force") == 1


def test_frame_selection_and_files(tmp_path):
    sc = Scene(sim=SimConfig(t_end=0.05, record_every=5))
    trace = simulate(sc)
    idx = frame_indices(len(trace), 4)
    assert idx[0] == 0 and idx[-1] == len(trace) - 1 and idx == sorted(set(idx))
    paths = write_frames(trace, sc, tmp_path, 4)
    assert [p.name for p in paths] == [f"frame_{i:04d}.svg" for i in range(len(paths))]
    for p in paths:
        ET.fromstring(p.read_text())
    assert np.all(trace[-1].q == 0.0)
