from abc import ABC, abstractmethod


# CRUD Create Read Delete (archived runs are never updated)

class ResultsInterface(ABC):

    # Create Data
    @abstractmethod
    def add_run(self, run, rows):
        pass

    # Read Data
    @abstractmethod
    def get_runs(self, **criteria):
        pass

    @abstractmethod
    def get_run_rows(self, run_id):
        pass

    # Delete Data
    @abstractmethod
    def delete_run(self, run_id):
        pass
