from dotenv import load_dotenv
import os

load_dotenv()


class ApplicationConfig:
    SEED = int(os.environ.get("STRONGEMBED_SEED", 20240917))
    WORKERS = int(os.environ.get("STRONGEMBED_WORKERS", os.cpu_count() or 1))
    DB_URI = os.environ.get("STRONGEMBED_DB_URI")  # unset: scaling runs are not archived
    LOG_LEVEL = os.environ.get("STRONGEMBED_LOG_LEVEL", "WARNING")
