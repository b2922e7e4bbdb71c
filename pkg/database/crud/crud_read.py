from sqlalchemy.orm import Session
from sqlalchemy import select
from sqlalchemy.exc import SQLAlchemyError
from database.database_sql_struct import ScalingRun, ScalingRowRecord


def get_runs(engine, **criteria):
    """
    Fetches archived scaling runs based on provided search criteria.

    Args:
        engine: SQLAlchemy engine for the DB connection.
        **criteria: Filters such as id, law_name, seed. No criteria lists every run.

    Returns:
        (True, list of run dicts ordered by id) or (False, {"code", "message"}).
    """
    possible_filters = {"id", "law_name", "seed", "eta_mode"}

    filter_conditions = []
    for attr, value in criteria.items():
        if attr not in possible_filters:
            return False, {
                "code": "invalid_filter",
                "message": f"Invalid filter key: {attr}"
            }
        filter_conditions.append(getattr(ScalingRun, attr) == value)

    try:
        with Session(engine) as session:
            query = select(ScalingRun).where(*filter_conditions).order_by(ScalingRun.id)
            return True, [{
                "id": run.id,
                "law_name": run.law_name,
                "seed": run.seed,
                "n_list": [int(n) for n in run.n_list.split(",")],
                "replicas": run.replicas,
                "eta_mode": run.eta_mode,
                "summary": run.summary,
                "created_at": run.created_at
            } for run in session.scalars(query).all()]

    except SQLAlchemyError as e:
        return False, {
            "code": "db_error",
            "message": f"Database error: {str(e)}"
        }


def get_run_rows(engine, run_id):
    """Rows of one run as dicts in (n, replicate) order; (False, error) when the run is unknown."""
    try:
        with Session(engine) as session:
            if session.get(ScalingRun, run_id) is None:
                return False, {
                    "code": "not_found",
                    "message": f"No scaling run with ID {run_id}"
                }
            query = (select(ScalingRowRecord)
                     .where(ScalingRowRecord.run_id == run_id)
                     .order_by(ScalingRowRecord.n, ScalingRowRecord.replicate))
            return True, [{
                "n": row.n,
                "replicate": row.replicate,
                "seed": row.seed,
                "max_dev": row.max_dev,
                "terminal_dev": row.terminal_dev,
                "s_n": row.s_n,
                "gamma2": row.gamma2
            } for row in session.scalars(query).all()]

    except SQLAlchemyError as e:
        return False, {
            "code": "db_error",
            "message": f"Database error: {str(e)}"
        }
