from bellsim.database import db_manager, record_run, input_digest, MeasureRun


def test_input_digest_is_canonical():
    a = input_digest({"b": 1, "a": [1, 2]})
    b = input_digest({"a": [1, 2], "b": 1})
    assert a == b
    assert len(a) == 64
    assert a != input_digest({"a": [2, 1], "b": 1})


def test_record_run_without_database():
    db_manager.close()
    assert not db_manager.ready
    assert record_run("rel-ent", {"behavior": "x.json"}, {"value": 0.1}) is None


def test_record_run(sqlite_db):
    result = {"value": 0.415, "gap": 1e-7, "iterations": 120, "converged": True, "details": {"route": "minimax"}}
    run_id = record_run("rel-ent", {"behavior": "prbox.json"}, result)
    assert run_id is not None
    session = db_manager.get_session()
    try:
        run = session.get(MeasureRun, run_id)
        assert run.kind == "rel-ent"
        assert run.value == 0.415
        assert run.converged is True
        assert run.iterations == 120
        assert run.payload["details"]["route"] == "minimax"
        assert run.input_hash == input_digest({"behavior": "prbox.json"})
    finally:
        session.close()


def test_record_run_non_numeric_value(sqlite_db):
    run_id = record_run("is-local", {}, {"local": True, "value": "n/a"})
    session = db_manager.get_session()
    try:
        run = session.get(MeasureRun, run_id)
        assert run.value is None
        assert run.converged is None
    finally:
        session.close()


def test_init_db_switches_to_new_url(sqlite_db, tmp_path):
    first = record_run("chsh", {}, {"value": 2.0})
    assert first is not None
    other = f"sqlite:///{tmp_path / 'other.db'}"
    db_manager.init_db(other)
    assert db_manager.ready
    record_run("chsh", {}, {"value": 2.5})
    session = db_manager.get_session()
    try:
        values = [r.value for r in session.query(MeasureRun).all()]
    finally:
        session.close()
    assert values == [2.5]
    # 같은 URL 로 다시 부르면 연결을 그대로 둔다
    engine = db_manager._engine
    db_manager.init_db(other)
    assert db_manager._engine is engine
