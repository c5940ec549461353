import json

import pytest

import pointedkh


def run(capsys, command):
    code = pointedkh.main(command)
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, command):
    code, out = run(capsys, command + " --format json")
    assert code == 0, out
    return json.loads(out)


def test_startup_defaults_under_pytest():
    args = pointedkh.general_startup()
    assert args.command is None
    assert args.threads == 1
    assert args.format == "table"


def test_pointed_unknot_report(capsys):
    doc = run_json(capsys, "pointed --pd 'X(1,2,2,1)' --basepoints 1,2")
    assert doc["ring"] == "z"
    assert doc["total_rank"] == 4
    assert {(e["h"], e["q"]): e["rank"] for e in doc["entries"]} == {(0, -1): 1, (1, 1): 1, (1, 3): 1, (2, 5): 1}
    assert doc["basepoints"] == ["1", "2"]
    assert {e["delta"]: e["rank"] for e in doc["delta"]} == {"-1/2": 2, "1/2": 2}


def test_reduced_unlink(capsys):
    doc = run_json(capsys, "khred --unlink 3 --ring f2")
    assert doc["total_rank"] == 4
    assert doc["basepoints"] == ["1"]


def test_kh_trefoil_table(capsys):
    code, out = run(capsys, "kh --diagram trefoil")
    assert code == 0
    assert "Z2" in out
    assert "total rank: 4" in out


def test_kh_dump_complex(capsys):
    doc = run_json(capsys, "kh --diagram unknot1neg --dump-complex")
    assert len(doc["generators"]) == 6
    assert len(doc["gradings"]) == 6
    assert all(len(t) == 3 for t in doc["differential"])


def test_determinant(capsys):
    code, out = run(capsys, "det --diagram trefoil")
    assert code == 0
    assert out == "determinant: 3\n"


@pytest.mark.parametrize("command", [
    "kh",
    "kh --pd 'X(1,2,2,1)' --unlink 1",
    "bogus --unlink 1",
    "kh --unlink 1 --threads 0",
    "kh --unlink 1 --ring r",
    "pointed --unlink 1 --points-per-edge 0",
    "kh --diagram nonexistent",
])
def test_usage_errors_exit_with_one(capsys, command):
    code, _ = run(capsys, command)
    assert code == 1


def test_json_error_document(capsys):
    code, out = run(capsys, "kh --pd 'X(1,2,3)' --format json")
    assert code == 1
    doc = json.loads(out)
    assert doc["detail"]["type"] == "diagram.malformed_pd"
    assert doc["detail"]["msg"]


def test_degenerate_cube_is_reported(capsys):
    code, out = run(capsys, "hfk-e2 --diagram unknot1neg --basepoints 1 --format json")
    assert code == 1
    assert json.loads(out)["detail"]["type"] == "cube.degenerate_vertex"


def test_list_diagrams(capsys):
    code, out = run(capsys, "--list-diagrams")
    assert code == 0
    assert "trefoil: Left-handed trefoil" in out
    code, out = run(capsys, "--list-diagrams --format json")
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    names = [js["name"] for js in doc["diagrams"]]
    assert "hopf" in names and "unlink4" in names


@pytest.mark.parametrize("command", [
    "pointed --diagram hopf",
    "ss --diagram unknot1neg",
    "hfk-e2 --diagram unknot1neg",
])
def test_reports_are_byte_stable(capsys, command):
    first = run(capsys, command + " --format json")
    second = run(capsys, command + " --format json")
    assert first == second


def test_spectral_sequence_report(capsys):
    doc = run_json(capsys, "ss --diagram unknot1neg")
    assert doc["ring"] == "q"
    assert doc["pages"][0]["total"] == 24
    assert doc["pages"][-1]["total"] == doc["homology_rank"] == 4
    assert len(doc["d1_signs"]) == 1
    assert doc["d1_signs"][0]["source"] == "0"


def test_hfk_report(capsys):
    doc = run_json(capsys, "hfk-e2 --diagram unknot1neg")
    assert doc["filtration_inequality"] is True
    assert [v["variant"] for v in doc["variants"]] == ["f0", "full"]
    assert len(doc["generators"]) == 8
    assert "lambda" in doc["generators"][0]
    assert doc["edges"][0]["kind"] == "split"
    assert doc["variants"][0]["g_entries"]


def test_compare_e1_report(capsys):
    doc = run_json(capsys, "compare-e1 --diagram unknot1neg")
    assert doc["isomorphic"] is True
    assert doc["e2_agrees"] is True
    assert doc["khovanov_e2"] == doc["hfk_e2"]


def test_show_report(capsys):
    doc = run_json(capsys, "show --diagram hopf")
    assert doc["components"] == [[1, 2], [3, 4]]
    assert abs(doc["linking_matrix"][0][1]) == 1
    assert len(doc["faces"]) == 4
    assert len(doc["basepoint_parities"]) == 2
    assert [r["vertex"] for r in doc["resolutions"]] == ["00", "01", "10", "11"]
    assert sorted(len(r["circles"]) for r in doc["resolutions"]) == [1, 1, 2, 2]
    for r in doc["resolutions"]:
        assert sorted(p for c in r["circles"] for p in c["points"]) == [0, 1]


def test_jones_agrees(capsys):
    doc = run_json(capsys, "jones --diagram figure8")
    assert doc["agree"] is True


@pytest.mark.parametrize("command", [
    "invariance-check --diagram unknot1neg --basepoints 1 --diagram2 unknot1pos --basepoints2 1",
    "invariance-check --diagram unknot0 --diagram2 unknot2mixed",
])
def test_invariance_check(capsys, command):
    doc = run_json(capsys, command)
    assert doc["identical"] is True
    assert doc["differences"] == []
    assert doc["left"]["total_rank"] == doc["right"]["total_rank"] == 2


@pytest.mark.parametrize("first, second", [
    ("trefoil", "trefoil_kink_pos"),
    ("trefoil", "trefoil_kink_neg"),
    ("trefoil_kink_pos", "trefoil_kink_neg"),
])
def test_invariance_under_kinks(capsys, first, second):
    doc = run_json(capsys, f"invariance-check --diagram {first} --diagram2 {second}")
    assert doc["ring"] == "z"
    assert len(doc["left"]["basepoints"]) == len(doc["right"]["basepoints"]) == 1
    assert doc["identical"] is True
    assert doc["left"]["entries"] == doc["right"]["entries"]


def test_invariance_check_fails_on_different_knots(capsys):
    code, out = run(capsys, "invariance-check --diagram trefoil --diagram2 unknot0 --format json")
    assert code == 2
    doc = json.loads(out)
    assert doc["identical"] is False
    assert doc["differences"]


def test_invariance_check_needs_matching_points(capsys):
    code, _ = run(capsys, "invariance-check --diagram unknot1neg --diagram2 unknot1pos")
    assert code == 1


def test_customsettings(capsys, tmp_path):
    settings = tmp_path / "settings.json"
    settings.write_text(json.dumps({"pd": "X(1,2,2,1)", "ring": "f2", "format": "json", "threads": None}))
    code, out = run(capsys, f"kh --customsettings '{settings}'")
    assert code == 0
    doc = json.loads(out)
    assert doc["ring"] == "f2"
    assert doc["total_rank"] == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / "reports" / "det.txt"
    code, out = run(capsys, f"det --diagram hopf --output '{target}'")
    assert code == 0
    assert out == ""
    assert target.read_text() == "determinant: 2\n"


def test_points_per_edge(capsys):
    doc = run_json(capsys, "pointed --unlink 2 --points-per-edge 2 --ring f2")
    assert len(doc["basepoints"]) == 4
    assert doc["total_rank"] == 16


@pytest.mark.parametrize("settings", [
    {"command": "bogus", "unlink": 1},
    {"format": "xml"},
])
def test_customsettings_are_validated(capsys, tmp_path, settings):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps(settings))
    code, _ = run(capsys, f"kh --unlink 1 --customsettings '{path}'")
    assert code == 1
