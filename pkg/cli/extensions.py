import logging

from database.database_handling import SQLResultsManager

logger = logging.getLogger(__name__)


class ResultsStore:
    """
    Results archive shared by the commands.

    Created once here and bound to a database URI by init_app, so every command talks
    to the same manager instead of opening its own engine.
    """

    def __init__(self):
        self._uri = None
        self._manager = None

    def init_app(self, db_uri):
        if db_uri != self._uri and self._manager is not None:
            self._manager.dispose()
            self._manager = None
        self._uri = db_uri

    @property
    def enabled(self):
        return bool(self._uri)

    @property
    def manager(self):
        if not self.enabled:
            return None
        if self._manager is None:
            logger.info("opening results archive at %s", self._uri)
            self._manager = SQLResultsManager(self._uri)
        return self._manager


results_store = ResultsStore()
