'''
Handling the results archive by
defining methods from class ResultsInterface
'''
import logging

from sqlalchemy import create_engine
from sqlalchemy.exc import SQLAlchemyError

from database.crud.crud_create import add_run
from database.crud.crud_read import get_runs, get_run_rows
from database.crud.crud_delete import delete_run
from database.database_interface import ResultsInterface
from database.database_sql_struct import Base

logger = logging.getLogger(__name__)


class SQLResultsManager(ResultsInterface):

    def __init__(self, db_uri):
        try:
            self._engine = create_engine(db_uri)
            Base.metadata.create_all(self._engine)
        except SQLAlchemyError as err:
            logger.error("Cannot initiate SQLResultsManager for %s: %s", db_uri, err)
            raise

    # Create
    def add_run(self, run, rows):
        return add_run(self._engine, run, rows)

    # Read
    def get_runs(self, **criteria):
        return get_runs(self._engine, **criteria)

    def get_run_rows(self, run_id):
        return get_run_rows(self._engine, run_id)

    # Delete
    def delete_run(self, run_id):
        return delete_run(self._engine, run_id)

    def dispose(self):
        self._engine.dispose()
