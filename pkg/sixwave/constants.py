"""Output column definitions and numeric defaults.

Every CSV artifact written by the CLI uses the column lists below in this
order. Floats are written with `FLOAT_FORMAT` so that values round-trip.
"""

# Grid dump - x,v,value row-major over (x_i, v_j)
FIELD_COLUMNS = ["x", "v", "value"]

# simulate - Picard residual history
DIAGNOSTICS_COLUMNS = ["iter", "residual", "ratio"]

# ks - bracket gap history
SANDWICH_COLUMNS = ["n", "gap", "min_gap_node"]

# scatter - defect of T^{-t}f(t) against the scattering state
SCATTERING_COLUMNS = ["t", "defect_norm"]

# verify - oracle suite results
VERIFY_COLUMNS = ["check", "measured", "bound", "passed"]

# thresholds / summary files
KEY_VALUE_COLUMNS = ["key", "value"]

DIAGNOSTICS_FILE = "diagnostics.csv"
SANDWICH_FILE = "sandwich.csv"
SCATTERING_FILE = "scattering.csv"
VERIFY_FILE = "verify.csv"
SUMMARY_FILE = "summary.csv"
KS_LIMIT_FILE = "ks_limit.csv"
FIELD_FILE_TEMPLATE = "field_t{index:03d}.csv"

FLOAT_FORMAT = "%.17g"

# Numeric defaults
DEFAULT_EPS_TAIL = 1e-8
DEFAULT_NX = 65
DEFAULT_NV = 65
DEFAULT_N_THETA = 64
DEFAULT_NT = 33
DEFAULT_T_MIN = 0.0
DEFAULT_T_MAX = 4.0
DEFAULT_MAX_ITERS = 50
DEFAULT_SLACK = 1.2
DEFAULT_MAX_DOUBLINGS = 4
DEFAULT_NORM_NODES = 129  # evaluation grid for rule-backed weighted norms

# Relative tolerances, scaled by the regime radius at run time
PICARD_TOL_FACTOR = 1e-8  # picard_tol = 1e-8 * r_e
SCATTER_TOL_FACTOR = 1e-6  # scatter_tol = 1e-6 * r_s

# Environment variables
ENV_CONFIG_FILE = "SIXWAVE_CONFIG_FILE"
ENV_MAX_WORKERS = "SIXWAVE_MAX_WORKERS"
ENV_OUTPUT_DIR = "SIXWAVE_OUTPUT_DIR"
