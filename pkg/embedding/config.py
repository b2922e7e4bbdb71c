from dotenv import load_dotenv
import os

load_dotenv()


class EmbeddingConfig:
    # DP laws larger than this many lattice entries are refused
    SUPPORT_CAP = int(os.environ.get("STRONGEMBED_SUPPORT_CAP", 2 ** 22))
    # largest n for path enumeration and composed path probabilities
    ORACLE_CAP = int(os.environ.get("STRONGEMBED_ORACLE_CAP", 8))
    PATH_COUNT_MAX_BITS = int(os.environ.get("STRONGEMBED_PATH_COUNT_MAX_BITS", 4096))
    # DP states whose weight falls below this fraction of the layer maximum are dropped
    PRUNE_TOL = float(os.environ.get("STRONGEMBED_PRUNE_TOL", 1e-20))
    # largest intermediate (count, sum) table a DP layer may allocate
    TABLE_CAP = int(os.environ.get("STRONGEMBED_TABLE_CAP", 2 ** 24))
    # midpoint tables of bags up to this size are memoised
    CACHE_MAX_N = int(os.environ.get("STRONGEMBED_CACHE_MAX_N", 256))
    EXACT_TOL = 1e-12  # quantities backed by exact rationals
    FLOAT_TOL = 1e-9  # float-accumulated quantities
