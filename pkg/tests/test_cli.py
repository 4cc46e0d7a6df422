import json
import os

import numpy as np

from bellsim.cli import codec
from bellsim.cli.main import main, EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_DATA
from bellsim.database import db_manager, MeasureRun


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _path(inputs_dir, name):
    return os.path.join(inputs_dir, name)


def test_chsh_of_tsirelson_behavior(capsys, inputs_dir):
    code, out, _ = _run(capsys, ["chsh", "--behavior", _path(inputs_dir, "tsirelson.json")])
    assert code == EXIT_OK
    assert abs(json.loads(out)["chsh"] - 2 * np.sqrt(2)) < 1e-9


def test_chsh_of_state(capsys, inputs_dir):
    code, out, _ = _run(capsys, ["chsh", "--state", _path(inputs_dir, "phi_plus.json"), "--seed", "1"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert abs(doc["horodecki"] - 2 * np.sqrt(2)) < 1e-9
    assert abs(doc["angle_search"] - doc["horodecki"]) < 1e-4


def test_is_local_prints_certificate(capsys, inputs_dir):
    code, out, _ = _run(capsys, ["is-local", "--behavior", _path(inputs_dir, "prbox.json")])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["local"] is False
    assert doc["certificate"]["violation"] > 0
    # 키 정렬 + 들여쓰기 2칸
    assert out == codec.dumps(doc) + "\n"


def test_witness_build(capsys):
    code, out, _ = _run(capsys, ["witness", "build", "--normalization", "paper"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert abs(doc["losr_min"] + 2.25) < 1e-12
    assert np.abs(np.array(doc["block_traces"]) - [[-2.25, -0.25], [-0.25, -2.25]]).max() < 1e-12
    code, out, _ = _run(capsys, ["witness", "build"])
    assert abs(json.loads(out)["losr_min"]) < 1e-12


def test_process_classify_delayed(capsys, inputs_dir):
    code, out, _ = _run(capsys, ["process", "classify", "--process", _path(inputs_dir, "prbox_delayed_process.json")])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["free"] is True
    assert doc["resource_kind"] == "none"
    assert doc["nonlocality"]["value"] == 0


def test_process_check(capsys, inputs_dir):
    code, out, _ = _run(capsys, ["process", "check", "--process", _path(inputs_dir, "prbox_delayed_process.json")])
    assert code == EXIT_OK
    assert json.loads(out)["realizable"] is True


def test_demo_filtering(capsys):
    code, out, _ = _run(capsys, ["demo", "filtering"])
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["pre_chsh"] <= 2 + 1e-9
    assert abs(doc["post_chsh"] - 2 * np.sqrt(2) * 8 / 9) < 1e-9


def test_validate_and_born(capsys, inputs_dir, tmp_path):
    code, out, _ = _run(capsys, ["validate", "--behavior", _path(inputs_dir, "prbox.json")])
    assert code == EXIT_OK
    assert json.loads(out)["summary"]["no_signalling"] is True

    target = tmp_path / "born.json"
    code, out, _ = _run(capsys, ["born", "--state", _path(inputs_dir, "phi_plus.json"),
                                 "--povms", _path(inputs_dir, "chsh_povms.json"), "--out", str(target)])
    assert code == EXIT_OK
    assert out == ""
    table = np.array(json.loads(target.read_text())["table"])
    assert table.shape == (2, 2, 2, 2)
    assert np.abs(table.sum(axis=(2, 3)) - 1).max() < 1e-10


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "table": [1, 2,\n}\n')
    code, _, err = _run(capsys, ["chsh", "--behavior", str(bad)])
    assert code == EXIT_DATA
    doc = json.loads(err)
    assert doc["kind"] == "malformed-json"
    assert doc["line"] == 3


def test_invalid_behavior(capsys, tmp_path):
    path = tmp_path / "neg.json"
    table = np.full((2, 2, 2, 2), 0.25)
    table[0, 0, 0, 0], table[0, 0, 0, 1] = -0.1, 0.6
    path.write_text(json.dumps({"table": table.tolist()}))
    code, _, err = _run(capsys, ["is-local", "--behavior", str(path)])
    assert code == EXIT_VALIDATION
    assert json.loads(err)["invariant"] == "nonnegative"


def test_missing_file_and_usage_errors(capsys, tmp_path):
    code, _, err = _run(capsys, ["chsh", "--behavior", str(tmp_path / "nope.json")])
    assert code == EXIT_VALIDATION
    assert json.loads(err)["invariant"] == "input-file"
    assert _run(capsys, ["chsh", "--bogus"])[0] == EXIT_USAGE
    assert _run(capsys, [])[0] == EXIT_USAGE
    assert _run(capsys, ["chsh"])[0] == EXIT_USAGE
    assert _run(capsys, ["rel-ent", "--behavior", "x.json", "--tol", "-1"])[0] == EXIT_VALIDATION


def test_db_records_run(capsys, inputs_dir, sqlite_db):
    code, _, _ = _run(capsys, ["chsh", "--behavior", _path(inputs_dir, "prbox.json"), "--db", sqlite_db])
    assert code == EXIT_OK
    session = db_manager.get_session()
    try:
        runs = session.query(MeasureRun).all()
        assert len(runs) == 1
        assert runs[0].kind == "chsh"
        assert abs(runs[0].payload["chsh"] - 4) < 1e-12
        assert len(runs[0].input_hash) == 64
    finally:
        session.close()
