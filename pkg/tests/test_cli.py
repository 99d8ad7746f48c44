import json

import pytest

from conftest import FIXTURES
from edusofthand.cli import main

SCENES = FIXTURES.parent.parent / "scenes"


def test_validate_default_scene(capsys):
    assert main(["validate", str(SCENES / "default.shs")]) == 0
    assert "ok" in capsys.readouterr().out


def test_malformed_scene_is_a_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.shs"
    bad.write_text("sim { dt 0.001; }\nobject ball {\n  circle 30\n  mass 1;\n}\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert f"{bad}:4:" in err
    assert not (tmp_path / "o").exists()
    assert main(["validate", str(bad)]) == 2


def test_invalid_hand_is_rejected(tmp_path, capsys):
    bad = tmp_path / "bad.shs"
    bad.write_text("hand { tendon_stiffness 0; }\n")
    assert main(["validate", str(bad)]) == 2
    assert "tendon_stiffness" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [[], ["fly"], ["run"], ["slack", "--sweep", "-5"], ["blocked", "--finger", "ring"],
     ["blocked", "--finger", "index", "--fractions", "1.5"], ["validate", "/no/such/file.shs"]],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_run_writes_only_under_out_and_is_repeatable(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["run", str(SCENES / "close_hand.shs"), "--out", str(out), "--t-end", "0.2", "--frames", "3"])
        assert code == 0
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    assert [str(f) for f in files] == [
        "frames/frame_0000.svg", "frames/frame_0001.svg", "frames/frame_0002.svg",
        "manifest.json", "scene.shs", "trace.csv",
    ]
    for f in files:
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    doc = json.loads((outs[0] / "manifest.json").read_text())
    assert doc["status"] == "ok" and doc["t_final"] == pytest.approx(0.2)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a", "b"]


def test_unsettled_run_exits_1(tmp_path):
    scene = tmp_path / "s.shs"
    scene.write_text("sim { t_end 0.05; stop equilibrium; }\ncontrol { at 0 agonist 4; }\n")
    assert main(["run", str(scene), "--out", str(tmp_path / "o"), "--frames", "0"]) == 1
    assert (tmp_path / "o" / "trace.csv").exists()
