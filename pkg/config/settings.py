# config/settings.py

# Synthetic experiment
DEFAULT_DIMS = (20, 20, 20)
TRIALS_PER_CELL = 16
RECOVERY_TOLERANCE = 1e-3
DEFAULT_RANKS = list(range(1, 40, 2))
DEFAULT_SPARSITIES = [round(0.025 * i, 3) for i in range(1, 17)]
RANK_BOUND_SLACK = 10           # atomic solver uses R + 10 terms
CONSTRAINED_RANK_SLACK = 1      # HoRPCA-C uses r_i = R + 1
FAILED_TRIAL_ERROR = float("inf")

# Nonconvex solver
LAMBDA_X = 1e-5
LAMBDA_S = 1e-3
TENSOR_ORDER = 3
LBFGS_MEMORY = 10
MAX_ITERS = 1000
GRAD_TOL = 1e-9
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
LINE_SEARCH_MAX_ITERS = 20
ZERO_COLUMN_TOL = 1e-6
NUMERICAL_RANK_TOL = 1e-6
SOLVER_THREADS = 1

# Spectral norm / power iterations
SPECTRAL_RESTARTS = 32
SPECTRAL_ITERS = 200
SPECTRAL_TOL = 1e-10
POWER_ITERS = 500
POWER_TOL = 1e-12               # eigen-residual ||Ax - theta x|| for the operator norm
TUCKER_RANK_TOL = 1e-8
BASIS_TOL = 1e-10

# ADMM baselines
ADMM_RHO = 1.0
ADMM_MAX_ITERS = 1000
ADMM_PRIMAL_TOL = 1e-7
ADMM_DUAL_TOL = 1e-7
ADMM_BALANCE_RATIO = 10.0
ADMM_BALANCE_FACTOR = 2.0
MATRIX_RPCA_EPS = 1e-5
PROX_GRAD_MAX_ITERS = 5000
PROX_GRAD_TOL = 1e-12
LEVEL_SET_MAX_OUTER = 50
LEVEL_SET_INNER_ITERS = 2000
LEVEL_SET_INNER_TOL = 1e-10

# Theorem checks
RHO_R = 1.0
RHO_S = 1.0
COHERENCE_SAMPLES = 100

# LDA moments
BETA0 = 1.0
DIRICHLET_ALPHA = 0.1
FOLD_IN_ITERS = 50
MIN_DOC_LENGTH = 3
MOMENT_CHUNK_DOCS = 4096
LDA_LAMBDA_X = 1e-8
LDA_LAMBDA_S = 1e-3
LDA_RESTARTS = 3
TOP_WORDS = 25

# Logging
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
