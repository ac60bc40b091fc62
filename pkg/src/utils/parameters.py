"""
Parameters for the RIS green network simulator.

All powers are linear milliwatts unless the name says otherwise.
"""

# =============================================
# App Configuration
# =============================================

# Page configuration
PAGE_TITLE = "RIS Green Network Simulator"
PAGE_ICON = "📡"
PAGE_LAYOUT = "wide"

# Tab names
TABS = [
    "Power Breakdown",
    "Alternation Trace",
    "Monte Carlo Sweep"
]

# =============================================
# Scenario Parameters (evaluation setup)
# =============================================

# Network size
DEFAULT_NUM_ANTENNAS = 10  # BS antennas M
DEFAULT_NUM_USERS = 6  # single-antenna users K
DEFAULT_NUM_RIS = 3  # RIS count L
DEFAULT_ELEMENTS_PER_RIS = 12  # reflecting elements N_l

# Power model
DEFAULT_DRAIN_EFFICIENCY = 0.6  # amplifier drain efficiency eta
DEFAULT_MAX_TRANSMIT_POWER_MW = 1000.0
DEFAULT_BS_CIRCUIT_POWER_MW = 0.0  # reporting only, never optimised
DEFAULT_ELEMENT_POWER_MW = 10.0  # P_RE, circuit power per reflecting element
DEFAULT_REFLECTION_AMPLITUDE = 1.0  # rho_l

# QoS and noise
DEFAULT_NOISE_DBM = -40.0
DEFAULT_TARGET_RATE = 2.0  # bits per channel use

# Geometry (meters)
DEFAULT_BS_POSITION = (0.0, 0.0, 50.0)
DEFAULT_RIS_POSITIONS = (
    (0.0, 40.0, 40.0),
    (40.0, 60.0, 40.0),
    (60.0, 20.0, 40.0)
)
DEFAULT_USER_REGION = ((0.0, 0.0, 0.0), (10.0, 10.0, 0.0))

# Path loss
DEFAULT_PATHLOSS_EXPONENTS = {
    "bs_ris": 2.5,
    "ris_user": 2.4,
    "bs_user": 3.5
}
DEFAULT_PATHLOSS_INTERCEPT_DB = 0.0  # gain at the 1 m reference distance

# =============================================
# Conic Solver Parameters
# =============================================

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-8
DEFAULT_SOLVER_MAX_ITER = 200
DEFAULT_STEP_FRACTION = 0.99
DEFAULT_HERMITIAN_TOL = 1e-10
DEFAULT_PSD_TOL = 1e-7  # accepted negative eigenvalue, relative to the largest

# =============================================
# Algorithm Parameters
# =============================================

DEFAULT_EPSILON_MW = 1.0  # stop when network power decreases by less than this
DEFAULT_MAX_ITERATIONS = 30
DEFAULT_RANDOMIZATION_SAMPLES = 100
DEFAULT_RANK_ONE_RATIO_TOL = 1e-6
DEFAULT_FEASIBILITY_TOL = 1e-6  # check_feasible and randomization acceptance
DEFAULT_C2_CHECK_TOL = 1e-9  # bisection feasibility check, relative
DEFAULT_HOMOGENIZATION_FLOOR = 1e-9  # smaller |q_{N+1}| invalidates a sample
DEFAULT_FEASIBILITY_MODE = "evaluate"  # or "sdp"

# Exhaustive search guards
MAX_EXHAUSTIVE_RIS = 12
EXHAUSTIVE_AUTO_DISABLE_RIS = 8

# =============================================
# Monte Carlo Simulation Parameters
# =============================================

# Default random seed for reproducibility
DEFAULT_RANDOM_SEED = 42
DEFAULT_TRIALS = 20

METHODS = ("proposed", "all_active", "exhaustive")
SWEEP_VARIABLES = ("K", "M", "rate")
