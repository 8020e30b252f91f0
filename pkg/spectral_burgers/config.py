from pathlib import Path

OUT_DIR = Path("results")
DEFAULT_SEED = 20240101

# Certified series
SERIES_TOL = 1e-12
SERIES_MIN_TERMS = 16
SERIES_MAX_TERMS = 1 << 22

# Inequality checks
CHECK_ABS_TOL = 1e-12  # slack floor for exactly evaluated inequalities
BOUND_REL_TOL = 1e-9  # BoundReport pass margin, relative to RHS scale
SAMPLED_SUP_REL_TOL = 1e-9
GRID_OVERSAMPLE = 4  # sampled sups use >= 4M+1 interior points
DERIV_EXT_OVERSAMPLE = 8  # modes kept when lower-bounding the H_{-1/2} norm of dv
ENERGY_TOL = 1e-10

# Nonlinearity
FAST_PATH_MIN_MODES = 64
QUADRATURE_POINTS = 100_000
GROWTH_SAMPLES = 2_000

# Noise
NOISE_DELTA = 0.05
NOISE_SCALE = 1.0
UNIFORM_OFFSET = 2.0**-54  # keeps 53-bit uniforms strictly inside (0, 1)

# Initial condition
XI_AMP = 0.5

# Solver
BLOWUP_LIMIT = 1e10
INTEGRATORS = ("exp_euler", "ode_euler")

# Experiments
SLOPE_TOLERANCE = 0.3
REFINEMENT_FACTOR = 1.2
MIN_LADDER_POINTS = 4
MIN_MOMENT_PATHS = 1_000
REF_OVERSAMPLE = 4  # reference resolution vs largest ladder entry
TIME_ORDER_TOLERANCE = 0.2  # two-sided, around first order in dt
RESOLUTION_LIMIT = 1.0  # dt |c1| sup|X| pi N above this flags a bound report as under-resolved
