from sqlalchemy.orm import Session
from sqlalchemy.exc import SQLAlchemyError
from datetime import datetime
from database.database_sql_struct import ScalingRun, ScalingRowRecord


def add_run(engine, run, rows):
    '''
    Archive one scaling study.

    run is a dict:
        {"law_name": "quad", "seed": 7, "n_list": [64, 256], "replicas": 500,
         "eta_mode": "gamma", "summary": "<ScalingSummary JSON>"}
    rows is a list of ScalingRow records.
    Returns:
        (True, run_id) on success, (False, {"code", "message"}) otherwise.
    '''
    if not isinstance(run, dict):
        return False, {
            "code": "invalid_format",
            "message": "Run data must be a dictionary."
        }

    required_fields = ("law_name", "seed", "n_list", "replicas")
    missing = [k for k in required_fields if run.get(k) is None]
    if missing:
        return False, {
            "code": "missing_fields",
            "message": f"Missing required fields: {', '.join(missing)}."
        }

    try:
        with Session(engine) as session:
            new_run = ScalingRun(
                law_name=run["law_name"],
                seed=int(run["seed"]),
                n_list=",".join(str(n) for n in run["n_list"]),
                replicas=int(run["replicas"]),
                eta_mode=str(run.get("eta_mode", "gamma")),
                summary=run.get("summary"),
                created_at=datetime.now()
            )
            new_run.rows = [ScalingRowRecord(
                n=row.n,
                replicate=row.replicate,
                seed=row.seed,
                max_dev=row.max_dev,
                terminal_dev=row.terminal_dev,
                s_n=row.s_n,
                gamma2=row.gamma2
            ) for row in rows]

            session.add(new_run)
            session.commit()
            return True, new_run.id

    except SQLAlchemyError as e:
        return False, {
            "code": "db_error",
            "message": f"Database error: {str(e)}"
        }
