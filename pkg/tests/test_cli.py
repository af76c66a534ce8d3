"""Command-line interface, exercised in-process through main()."""

import json

import numpy as np
import pytest

from stabres.cli import main
from stabres.continuation import find_stationary
from stabres.schlessinger import fit_window
from stabres.session import (
    Session,
    load_session,
    save_session,
    stabilization_csv,
)
from stabres.stabilization import StabilizationData


def run(capsys, argv):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def crossing_data(tilt=0.0):
    alphas = np.linspace(0.0, 2.0, 41)
    half = np.sqrt((0.008 * (alphas - 1.0)) ** 2 + 1e-8)
    return StabilizationData(
        alpha_grid=alphas,
        curves=np.asarray([1.5 - half + tilt * alphas, 1.5 + half + tilt * alphas]),
        tracking_quality=np.ones(40),
    )


@pytest.fixture
def crossing_session(tmp_path, capsys):
    csv = tmp_path / "flat.csv"
    csv.write_text(stabilization_csv(crossing_data()), encoding="utf-8")
    path = tmp_path / "flat_session.json"
    rc, _, _ = run(capsys, ["stabilize", "--import", str(csv), "--session", str(path)])
    assert rc == 0
    return path


def test_show_config_lists_defaults(capsys):
    rc, out, _ = run(capsys, ["--show-config"])
    assert rc == 0
    assert "flatness_tol = 0.01" in out
    assert "max_fit_order = 25" in out
    assert "width_factor = 2.0" in out


def test_config_file_overrides_and_rejects_unknown_keys(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text("flatness_tol = 0.5\nmin_points = 6  # trailing comment\n", encoding="utf-8")
    rc, out, _ = run(capsys, ["--config", str(good), "--show-config"])
    assert rc == 0
    assert "flatness_tol = 0.5" in out
    assert "min_points = 6" in out

    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_knob = 1\n", encoding="utf-8")
    rc, _, err = run(capsys, ["--config", str(bad), "--show-config"])
    assert rc == 2
    assert "unknown config key" in err


def test_no_command_prints_help_and_exits_2(capsys):
    rc, out, _ = run(capsys, [])
    assert rc == 2
    assert "stabilize" in out


def test_stabilize_import_json_is_deterministic(tmp_path, fixtures_dir, capsys):
    fixture = str(fixtures_dir / "he_2s2_annotated.csv")
    s1, s2 = tmp_path / "one.json", tmp_path / "two.json"
    rc1, out1, _ = run(capsys, ["stabilize", "--import", fixture, "--session", str(s1), "--json"])
    rc2, out2, _ = run(capsys, ["stabilize", "--import", fixture, "--session", str(s2), "--json"])
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert s1.read_bytes() == s2.read_bytes()
    doc = json.loads(out1)
    assert doc["source"] == "imported"
    assert len(doc["windows"]) == 1
    assert doc["windows"][0]["root_index"] == 1
    assert len(doc["stabilization"]["metadata"]) == 5


def test_stabilize_computed_sweep(tmp_path, capsys):
    path = tmp_path / "kinetic.json"
    rc, out, _ = run(
        capsys,
        ["stabilize", "--model", "kinetic", "--basis", "ho:12", "--grid", "0.8:1.2:11",
         "--session", str(path)],
    )
    assert rc == 0
    assert "12 curves over 11 alpha points" in out
    s = load_session(str(path))
    assert s.metadata["model"] == "kinetic"
    assert s.stabilization.curves.shape == (12, 11)


def test_stabilize_requires_inputs(tmp_path, capsys):
    rc, _, err = run(capsys, ["stabilize", "--session", str(tmp_path / "s.json")])
    assert rc == 2
    assert "stabilize needs" in err


def test_windows_overrides(crossing_session, capsys):
    rc, out, _ = run(
        capsys, ["windows", "--session", str(crossing_session), "--min-points", "19", "--json"]
    )
    assert rc == 0
    doc = json.loads(out)
    assert doc["windows"] == []
    assert len(doc["crossings"]) == 1
    assert doc["crossings"][0]["grid_index"] == 20

    rc, out, _ = run(capsys, ["windows", "--session", str(crossing_session), "--json"])
    assert rc == 0
    assert len(json.loads(out)["windows"]) == 4


def test_fit_guard_blocks_crossing_and_force_overrides(tmp_path, capsys):
    sess = str(tmp_path / "flat.json")
    csv = tmp_path / "flat.csv"
    csv.write_text(stabilization_csv(crossing_data()), encoding="utf-8")
    rc, _, _ = run(capsys, ["stabilize", "--import", str(csv), "--session", sess])
    assert rc == 0

    rc, _, err = run(capsys, ["fit", "--session", sess, "--window", "w0", "--points", "10:30"])
    assert rc == 2
    assert "avoided crossing" in err
    assert "force=true" in err

    # the symmetric fixture has exact value collisions across the crossing,
    # so force it on a tilted copy instead
    tilted_csv = tmp_path / "tilted.csv"
    tilted_csv.write_text(stabilization_csv(crossing_data(tilt=0.001)), encoding="utf-8")
    tilted = str(tmp_path / "tilted.json")
    rc, _, _ = run(capsys, ["stabilize", "--import", str(tilted_csv), "--session", tilted])
    assert rc == 0
    rc, out, _ = run(
        capsys,
        ["fit", "--session", tilted, "--window", "w0", "--points", "10:30", "--order", "8",
         "--force"],
    )
    assert rc == 0
    doc = json.loads(out)
    assert doc["forced"] is True
    assert doc["point_indices"][0] == 10 and doc["point_indices"][-1] == 30
    assert load_session(tilted).fits[doc["id"]].forced is True


def test_fit_degenerate_selection_exits_3(crossing_session, capsys):
    # indices 15 and 25 carry exactly equal energies (symmetric curve), an
    # incurable continued-fraction breakdown
    rc, _, err = run(
        capsys,
        ["fit", "--session", str(crossing_session), "--window", "w0",
         "--indices", "15,20,25", "--force"],
    )
    assert rc == 3
    assert "after reordering" in err


def test_fit_rejects_conflicting_selectors(crossing_session, capsys):
    rc, _, err = run(
        capsys,
        ["fit", "--session", str(crossing_session), "--window", "w0",
         "--points", "0:5", "--indices", "1,2,3"],
    )
    assert rc == 2
    assert "either --points or --indices" in err


def test_trajectory_writes_csv(crossing_session, tmp_path, capsys):
    rc, out, _ = run(capsys, ["fit", "--session", str(crossing_session), "--window", "w0"])
    assert rc == 0
    fid = json.loads(out)["id"]
    csv_path = tmp_path / "traj.csv"
    rc, out, _ = run(
        capsys,
        ["trajectory", "--session", str(crossing_session), "--fit", fid, "--kind", "theta",
         "--fixed", "1.05", "--grid", "0:0.3:11", "--csv", str(csv_path)],
    )
    assert rc == 0
    doc = json.loads(out)
    assert doc["fit_id"] == fid
    assert len(doc["grid"]) == 11
    lines = csv_path.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "theta,alpha,re_e,im_e,pade_error"
    assert len(lines) == 12
    assert load_session(str(crossing_session)).trajectories[doc["id"]].fit_id == fid


def test_trajectory_unknown_fit_exits_2(crossing_session, capsys):
    rc, _, err = run(
        capsys,
        ["trajectory", "--session", str(crossing_session), "--fit", "f404", "--kind", "theta",
         "--fixed", "1.0", "--grid", "0:0.2:5"],
    )
    assert rc == 2
    assert "unknown fit id" in err


def test_resonance_output_is_byte_deterministic(tmp_path, capsys):
    argv = ["resonance", "--model", "benchmark", "--basis", "ho:40", "--grid", "1.0:1.3:31"]
    s1, s2 = tmp_path / "r1.json", tmp_path / "r2.json"
    rc1, out1, _ = run(capsys, argv + ["--session", str(s1)])
    rc2, out2, _ = run(capsys, argv + ["--session", str(s2)])
    assert rc1 == rc2 == 0
    assert out1 == out2
    assert s1.read_bytes() == s2.read_bytes()
    doc = json.loads(out1)
    assert len(doc["stationary_points"]) >= 1
    bound = doc["stationary_points"][0]
    assert bound["energy"][0] == pytest.approx(0.502040362, abs=5e-6)


def test_crosscheck_agrees_with_fit(tmp_path, capsys):
    sess = tmp_path / "res.json"
    rc, out, _ = run(
        capsys,
        ["resonance", "--model", "benchmark", "--basis", "ho:40", "--grid", "1.0:1.3:31",
         "--session", str(sess)],
    )
    assert rc == 0
    sid = json.loads(out)["stationary_points"][0]["id"]
    rc, out, _ = run(capsys, ["crosscheck", "--session", str(sess), "--stationary", sid])
    assert rc == 0
    doc = json.loads(out)
    assert doc["stationary_id"] == sid
    assert doc["difference"] < 1e-6
    assert doc["diagonalized"]["evaluations"] >= 1


def test_crosscheck_without_recorded_model_needs_flags(tmp_path, capsys):
    xs = np.linspace(0.6, 2.4, 9)
    cf, idx = fit_window(xs, ((xs - 1.1) ** 2 + 0.04) / (xs - 0.5))
    s = Session(id="no-model")
    rec = s.add_fit(cf, idx)
    points = find_stationary(cf, ((0.9, 1.4), (0.0, 0.2)))
    s.add_stationary(points[0], fit_id=rec.id)
    path = tmp_path / "no_model.json"
    save_session(s, str(path))

    rc, _, err = run(capsys, ["crosscheck", "--session", str(path), "--stationary", "s0"])
    assert rc == 2
    assert "pass --model and --basis" in err


def test_landscape_json_and_csv(tmp_path, capsys):
    csv_path = tmp_path / "landscape.csv"
    rc, out, _ = run(
        capsys,
        ["landscape", "--model", "kinetic", "--basis", "ho:8", "--alpha", "0.9:1.1:5",
         "--theta", "0:0.2:5", "--seed-re", "0.2", "--csv", str(csv_path)],
    )
    assert rc == 0
    doc = json.loads(out)
    assert len(doc["alphas"]) == 5
    assert doc["min_d_theta"]["value"] >= 0.0
    lines = csv_path.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "alpha,theta,d_theta,d_alpha"
    assert len(lines) == 26


def test_missing_session_file_exits_2(tmp_path, capsys):
    rc, _, err = run(capsys, ["windows", "--session", str(tmp_path / "absent.json")])
    assert rc == 2
    assert "cannot read session" in err
