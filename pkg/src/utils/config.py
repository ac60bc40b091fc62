"""
Configuration file for the RIS green network simulator.

This module contains environment-specific configuration settings that can be
modified without changing the application code.
"""

# =============================================
# Application Configuration
# =============================================

# Environment variable naming the default output directory; --out wins
OUTPUT_DIR_ENV_VAR = "RIS_GREEN_OUTPUT_DIR"

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# =============================================
# Model Configuration
# =============================================

# Computation settings
MAX_MONTE_CARLO_TRIALS = 1000
USE_PARALLEL_COMPUTATION = False  # Set to True to run trials in a process pool
N_PARALLEL_JOBS = 4  # Number of worker processes for Monte Carlo trials

# Counter-based generator used for every random draw, recorded in metadata
RNG_ALGORITHM = "numpy.random.Philox"

# =============================================
# Data Export Configuration
# =============================================

RESULTS_FILENAME = "results.csv"
METADATA_FILENAME = "metadata.json"

# Fixed CSV column order
RESULT_COLUMNS = [
    "method",
    "sweep_value",
    "trial",
    "trial_seed",
    "network_power_mW",
    "transmit_power_mW",
    "active_count",
    "iterations",
    "status",
    "wall_time_ms"
]

# Number formatting for exports
CSV_FLOAT_FORMAT = "%.10g"
DECIMAL_PLACES = 3
