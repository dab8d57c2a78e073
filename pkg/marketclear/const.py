"""Constants for the marketclear package."""

# Monetary amounts
DEFAULT_SCALE = 1  # minor units per major unit
MAX_MINOR_UNITS = 2**40  # valuation magnitude guard so int64 slack arithmetic stays exact
MAX_DUAL_UNITS = 2**61  # price and profit magnitude guard

# Dummy padding labels
DUMMY_ITEM_PREFIX = "__dummy_item_"
DUMMY_BUYER_PREFIX = "__dummy_buyer_"

# Instance formats
FORMAT_JSON = "json"
FORMAT_CSV = "csv"
FORMATS = (FORMAT_JSON, FORMAT_CSV)

# Units used by the JSON instance format
UNITS_MAJOR = "major"  # entries get multiplied by the scale
UNITS_MINOR = "minor"  # entries are already integer minor units

# Solver initialisations
INIT_ITEMS = "items"  # p_i = max_j v_ij, q = 0
INIT_BUYERS = "buyers"  # p = 0, q_j = max_i v_ij
SOLVER_INITS = (INIT_ITEMS, INIT_BUYERS)

# Alternating reach modes
REACH_FROM_UNMATCHED = "grow-from-unmatched"
REACH_MATCHED_FIRST = "grow-matched-first"

# Oracle and audit limits
DEFAULT_ORACLE_LIMIT = 8
GRID_SIZE_LIMIT = 4  # 4**4 = 256 reruns per bidder
DEFAULT_TRIALS = 100
DEFAULT_SEED = 0

# Misreport strategies
STRATEGY_RANDOM = "random"
STRATEGY_STRUCTURED = "structured"
STRATEGY_GRID = "grid"
STRATEGY_ALL = "all"

# CLI commands
COMMAND_SOLVE = "solve"
COMMAND_PRICES = "prices"
COMMAND_VCG = "vcg"
COMMAND_CHECK = "check"
COMMAND_VERIFY = "verify"
COMMAND_AUDIT = "audit"
COMMAND_MEET = "meet"

# Exit statuses
EXIT_OK = 0
EXIT_VERDICT_FAILED = 1
EXIT_USAGE = 2
