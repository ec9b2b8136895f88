"""Numerical defaults for fdtlab (tolerances, grids, sizes)."""

# generator / semigroup
ROW_SUM_TOL: float = 1e-12
EXPM_TAIL_TOL: float = 1e-14
SEMIGROUP_LAW_TOL: float = 1e-10
MEASURE_SUM_TOL: float = 1e-12
DENSE_SIZE_CAP: int = 4096

# invariance / adjoints
INVARIANT_TOL: float = 1e-12
ADJOINT_INVARIANCE_TOL: float = 1e-10
FAMILY_INVARIANCE_TOL: float = 1e-10
SYMMETRY_TOL: float = 1e-10
BALANCE_TOL: float = 1e-10
KERNEL_ROW_SUM_TOL: float = 1e-12
METROPOLIS_TIE_TOL: float = 1e-12

# fdt suite
FDT_TOL: float = 1e-9
STATIC_TOL: float = 1e-10
MODE_AGREEMENT_TOL: float = 1e-10
NUMERICAL_DIFF_TOL: float = 1e-7
RICHARDSON_STEP: float = 1e-5
SIMPSON_AGREEMENT_TOL: float = 1e-8
SIMPSON_PANELS: int = 1024
GREEN_KUBO_REL_TOL: float = 1e-6
GREEN_KUBO_IDENTITY_TOL: float = 1e-12
GREEN_KUBO_HORIZON: float = 50.0
B_SYMMETRY_TOL: float = 1e-10
HOMOGENEITY_TOL: float = 1e-10
ROUNDOFF_FLOOR: float = 1e-11
GAP_RATE_REL_TOL: float = 0.1
LIMIT_EXTRA_TOL: float = 1e-10

# response sweeps
DELTA_MIN_EXPONENT: int = 3
DELTA_MAX_EXPONENT: int = 10
SLOPE_MIN_SMOOTH: float = 0.8
SLOPE_MIN_LANGEVIN: float = 0.45
KERNEL_SLOPE_BAND: float = 0.1
ETA_FINAL_REL_TOL: float = 1e-3
MONOTONE_JITTER: float = 0.05

# diffusion
STABILITY_GUARD: float = 0.1
MIN_GRID: int = 64
MC_SIGMA: float = 3.0
HISTOGRAM_BINS: int = 64
INVERSE_CDF_GRID: int = 8192
MC_BLOCK_PATHS: int = 4096
TV_ORDER_BAND: tuple[float, float] = (1.7, 2.3)
WEAK_ORDER_BAND: tuple[float, float] = (0.7, 1.3)

# runtime
THREADS_DEFAULT: int = 4
SEED_DEFAULT: int = 20240601
