import os

# ---- Tolerances ----
# Entrywise / Frobenius comparisons are scaled by the matrix dimension.
ABS_EPS = float(os.environ.get("TLFORGE_ABS_EPS", "1e-9"))
# Singular values below RANK_EPS * sigma_max do not count towards the rank.
RANK_EPS = float(os.environ.get("TLFORGE_RANK_EPS", "1e-9"))

# ---- Memory ----
# Largest representation dimension n**N any operation may materialize.
MAX_DIM = int(os.environ.get("TLFORGE_CAP", "4096"))
MIN_CAP = 16

# ---- Jones-Wenzl ----
# rho_{k+1} is INFINITE when |Q - rho_k| <= POLE_WINDOW * (1 + Q)
POLE_WINDOW = float(os.environ.get("TLFORGE_POLE_WINDOW", "1e-12"))
# J_infinity membership is scanned for k = 1..J_SCAN
J_SCAN = int(os.environ.get("TLFORGE_J_SCAN", "10000"))

# ---- Randomized derivations ----
SEED = int(os.environ.get("TLFORGE_SEED", "7"))
# Parameter points tried when deriving the fourth n=r=4 matrix
DERIVE_TRIALS = 3

# ---- Yang-Baxter grid ----
SPECTRAL_GRID = (0.3, 0.7, 1.1)
YB_WORKERS = 4

# ---- Logging ----
LOG_PREFIX = "[tlforge]"
