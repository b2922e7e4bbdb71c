from sqlalchemy.orm import Session
from sqlalchemy.exc import SQLAlchemyError
from database.database_sql_struct import ScalingRun


def delete_run(engine, run_id):
    """
    Delete an archived run together with its rows.

    Returns:
        (True, message) if the run was deleted, (False, {"code", "message"}) otherwise.
    """
    with Session(engine) as session:
        try:
            run = session.get(ScalingRun, run_id)
            if not run:
                return False, {
                    "code": "not_found",
                    "message": f"No scaling run with ID {run_id}"
                }
            session.delete(run)
            session.commit()
            return True, f"Run {run_id} deleted."

        except SQLAlchemyError as e:
            session.rollback()
            return False, {
                "code": "db_error",
                "message": f"Database error: {str(e)}"
            }
