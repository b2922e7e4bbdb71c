import pytest
from sqlalchemy.exc import SQLAlchemyError

from database.database_handling import SQLResultsManager
from embedding.stats import ScalingRow


def row(n, replicate, max_dev=1.0):
    return ScalingRow(n=n, replicate=replicate, seed=1000 + replicate, max_dev=max_dev, terminal_dev=0.5,
                      s_n=1.5, gamma2=1.25)


RUN = {"law_name": "quad", "seed": 2 ** 40, "n_list": [64, 16], "replicas": 2, "eta_mode": "gamma",
       "summary": '{"ratio": 1.5}'}


@pytest.fixture
def manager(tmp_path):
    manager = SQLResultsManager(f"sqlite:///{tmp_path / 'runs.db'}")
    yield manager
    manager.dispose()


class TestCreate:

    def test_add_run(self, manager):
        success, run_id = manager.add_run(RUN, [row(64, 1), row(16, 0), row(64, 0), row(16, 1)])
        assert success
        assert run_id == 1

    def test_not_a_dict(self, manager):
        success, error = manager.add_run(["quad"], [])
        assert not success
        assert error["code"] == "invalid_format"

    def test_missing_fields(self, manager):
        success, error = manager.add_run({"law_name": "quad", "replicas": 2}, [])
        assert not success
        assert error["code"] == "missing_fields"
        assert "seed" in error["message"] and "n_list" in error["message"]

    def test_duplicate_rows(self, manager):
        success, error = manager.add_run(RUN, [row(16, 0), row(16, 0)])
        assert not success
        assert error["code"] == "db_error"


class TestRead:

    def test_runs(self, manager):
        manager.add_run(RUN, [row(16, 0)])
        manager.add_run({**RUN, "law_name": "rademacher", "eta_mode": "1.0"}, [])
        success, runs = manager.get_runs()
        assert success
        assert [run["law_name"] for run in runs] == ["quad", "rademacher"]
        assert runs[0]["n_list"] == [64, 16]
        assert runs[0]["seed"] == 2 ** 40
        assert runs[0]["summary"] == '{"ratio": 1.5}'
        success, runs = manager.get_runs(eta_mode="1.0")
        assert [run["id"] for run in runs] == [2]

    def test_invalid_filter(self, manager):
        success, error = manager.get_runs(colour="blue")
        assert not success
        assert error["code"] == "invalid_filter"

    def test_rows_are_ordered(self, manager):
        _, run_id = manager.add_run(RUN, [row(64, 1, 4.0), row(16, 1, 2.0), row(64, 0, 3.0), row(16, 0, 1.0)])
        success, rows = manager.get_run_rows(run_id)
        assert success
        assert [(r["n"], r["replicate"], r["max_dev"]) for r in rows] == [
            (16, 0, 1.0), (16, 1, 2.0), (64, 0, 3.0), (64, 1, 4.0)]
        assert rows[0]["seed"] == 1000

    def test_unknown_run(self, manager):
        success, error = manager.get_run_rows(42)
        assert not success
        assert error["code"] == "not_found"


class TestDelete:

    def test_delete_cascades(self, manager):
        _, run_id = manager.add_run(RUN, [row(16, 0), row(16, 1)])
        assert manager.delete_run(run_id) == (True, f"Run {run_id} deleted.")
        assert manager.get_runs() == (True, [])
        success, error = manager.get_run_rows(run_id)
        assert error["code"] == "not_found"

    def test_delete_unknown(self, manager):
        success, error = manager.delete_run(7)
        assert not success
        assert error["code"] == "not_found"


def test_bad_uri():
    with pytest.raises(SQLAlchemyError):
        SQLResultsManager("nosuchdialect://nowhere")
