"""
Constants, tolerances and hyperparameter profiles for CVQD.

⚠️ IMPORTANT: This is the SINGLE SOURCE OF TRUTH for numerical tolerances and
training defaults. Modules import the constant classes below instead of
hard-coding thresholds, and the shipped config files only override what a
profile does not already pin.

Conventions: ħ = 1, x = (a + a†)/√2, p = (a − a†)/(i√2), so the vacuum
quadrature variance is 1/2. Two-mode composite index = n_A·c + n_B.
"""

from enum import Enum
from typing import Any, Dict

# ============================================================================
# Enumerations
# ============================================================================


class Mode(str, Enum):
    """Slot of a two-mode system."""

    A = "A"  # most significant index, embedding slot of the denoiser
    B = "B"


class Parity(str, Enum):
    """Cat-state parity."""

    EVEN = "even"
    ODD = "odd"


class TargetKind(str, Enum):
    """Generative target families."""

    COHERENT = "coherent"
    SQUEEZED = "squeezed"
    FOCK = "fock"
    CAT = "cat"


class GradMode(str, Enum):
    """Gradient estimators available to the trainer."""

    CENTRAL_FD = "central_fd"
    SPSA = "spsa"
    ANALYTIC = "analytic"


class ScheduleKind(str, Enum):
    """Which constructor builds the noise schedule."""

    ETA = "eta"  # explicit (eta_0, eta_T) endpoints, canonical
    BETA = "beta"  # linear beta ramp, eta_t = 1 - beta_t


class Role(str, Enum):
    """Checkpoint role."""

    GENERATIVE = "generative"
    RESTORATION = "restoration"


class GeneratorKind(str, Enum):
    """Gate parameters that have a generator."""

    D_RE = "D_re"
    D_IM = "D_im"
    R = "R"
    S = "S"
    BS_THETA = "BS_theta"
    BS_PHI = "BS_phi"
    K = "K"


# ============================================================================
# Fock-core
# ============================================================================


class FockConstants:
    """Constants for truncated Fock-basis states (physics/fock.py)."""

    MIN_CUTOFF = 2
    MAX_MODES = 2

    HERMITIAN_TOL = 1e-12  # max |rho - rho^dagger| for a DensityMatrix
    SQRT_HERMITIAN_TOL = 1e-10  # accepted by hermitian_sqrt and fidelity
    TRACE_EXCESS_TOL = 1e-9
    EIGENVALUE_CLAMP = -1e-9  # below this a spectrum is genuinely negative
    KET_NORM_TOL = 1e-9

    SUPPORT_TOL = 1e-14  # eigenvalues treated as numerical support
    GRADIENT_WEIGHT_FLOOR = 1e-14  # reduced-product eigenvalues left out of 1/sqrt(mu) weights

    # Wigner displaced-parity working space: c + ceil(|beta|^2 + 8|beta|) + 12
    WIGNER_MARGIN_LINEAR = 8.0
    WIGNER_MARGIN_FIXED = 12


# ============================================================================
# Gates
# ============================================================================


class GateConstants:
    """Constants for gate construction (physics/gates.py)."""

    EXPM_MAX_NORM = 50.0  # accuracy contract of the scaling-and-squaring expm
    SUB_UNITARY_TOL = 1e-9
    RESTRICTED_UNITARY_TOL = 1e-6  # columns with Fock index <= c/2, c=20, |param| <= 1
    SQUEEZE_CLAMP = 1.5
    GATE_CACHE_MAX_ENTRIES = 4096


# ============================================================================
# Diffusion
# ============================================================================


class DiffusionConstants:
    """Constants for the forward process (physics/diffusion.py)."""

    # Full-scale generative noise schedule
    FULL_SCALE_ETA_0 = 0.99974
    FULL_SCALE_ETA_T = 0.99331
    FULL_SCALE_TOTAL_TIMESTEPS = 112
    FULL_SCALE_BETA_START = 1e-4
    FULL_SCALE_BETA_END = 0.05

    DIRECT_JUMP_TOL = 1e-8
    DIRECT_JUMP_TRUNCATED_ENV_TOL = 5e-5  # n_bar = 0.5 at c = 12
    VARIANCE_LAW_TOL = 1e-3
    LEAK_TOL = 1e-6
    FIRST_MOMENT_TOL = 1e-8

    SCHEDULE_CSV_COLUMNS = ("t", "eta_t", "eta_bar_t")


# ============================================================================
# Denoiser
# ============================================================================


class DenoiserConstants:
    """Constants for the CVQNN denoiser (physics/denoiser.py)."""

    PARAMS_PER_LAYER = 16
    LAYOUT_TAG = "cvqnn-16p-v1"
    DEFAULT_ALPHA_EMBED = 1.0
    DEFAULT_INIT_SCALE = 0.01

    # Offsets inside one 16-parameter layer block
    BS1_THETA = 0
    BS1_PHI = 1
    R_A = 2
    R_B = 3
    S_A = 4
    S_B = 5
    BS2_THETA = 6
    BS2_PHI = 7
    R2_A = 8
    R2_B = 9
    D_A_RE = 10
    D_A_IM = 11
    D_B_RE = 12
    D_B_IM = 13
    K_A = 14
    K_B = 15

    LAYER_FIELD_NAMES = (
        "BS1.theta",
        "BS1.phi",
        "R_A",
        "R_B",
        "S_A",
        "S_B",
        "BS2.theta",
        "BS2.phi",
        "R2_A",
        "R2_B",
        "D_A.re",
        "D_A.im",
        "D_B.re",
        "D_B.im",
        "K_A",
        "K_B",
    )


# ============================================================================
# Trainer
# ============================================================================


class TrainerConstants:
    """Constants for losses, gradient estimators and Adam (training/)."""

    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8

    DEFAULT_FD_STEP = 1e-4
    DEFAULT_SPSA_PERTURB = 1e-4
    DEFAULT_SPSA_AVERAGES = 8

    CONVERGENCE_TOL = 1e-5
    CONVERGENCE_WINDOW = 10

    TARGET_TAIL_TOL = 1e-4  # population allowed at the top Fock level plus trace deficit
    DEFAULT_S_MAX = 1.0

    METRICS_COLUMNS = (
        "iter",
        "lr",
        "loss_total",
        "loss_t0",
        "mean_step_fidelity",
        "mean_trace_penalty",
        "wall_ms",
    )


# ============================================================================
# Runtime
# ============================================================================


class RuntimeConstants:
    """File formats and exit codes (cli.py, storage/)."""

    CHECKPOINT_FORMAT = "cvqd-ckpt-1"
    STATE_FORMAT_VERSION = 1

    EXIT_OK = 0
    EXIT_CONFIG = 2
    EXIT_PHYSICS = 3
    EXIT_IO = 4

    CHECKPOINT_FILE = "checkpoint.json"
    METRICS_FILE = "metrics.csv"
    MANIFEST_FILE = "manifest.json"
    STATE_FILE = "state.json"
    CURVE_FILE = "curve.csv"
    SUMMARY_FILE = "summary.csv"
    SCHEDULE_FILE = "schedule.csv"
    VERIFY_REPORT_FILE = "verify_report.json"

    CURVE_COLUMNS = ("t", "fidelity_vs_target")
    SWEEP_COLUMNS = ("param", "nbar", "fidelity", "iters")
    RESTORE_SWEEP_COLUMNS = ("s", "mean_fidelity", "std_fidelity", "min_fidelity")
    RESTORE_CURVE_COLUMNS = ("s", "t", "mean_fidelity")
    RESTORE_CURVES_FILE = "restore_curves.csv"

    RESTORE_SWEEP_AMPLITUDES = (0.3, 0.5, 0.7)
    RESTORE_SWEEP_PHASES = 8  # phases k*pi/4
    COHERENT_SWEEP_VALUES = (0.5, 1.0, 1.5, 2.0, 2.5)
    SQUEEZED_SWEEP_VALUES = (0.25, 0.5, 0.75, 1.0)


# ============================================================================
# Hyperparameter profiles (keys are the config names accepted by TrainConfig)
# ============================================================================

# Full-scale generative hyperparameters
GENERATIVE_FULL_PROFILE: Dict[str, Any] = {
    "cutoff_dim": 15,
    "layers": 30,
    "batch_size": 24,
    "epochs": 99,
    "total_timesteps": DiffusionConstants.FULL_SCALE_TOTAL_TIMESTEPS,
    "beta_start": DiffusionConstants.FULL_SCALE_BETA_START,
    "beta_end": DiffusionConstants.FULL_SCALE_BETA_END,
    "eta_0": DiffusionConstants.FULL_SCALE_ETA_0,
    "eta_T": DiffusionConstants.FULL_SCALE_ETA_T,
    "lambda": 8.55e-5,
    "initial_learning_rate": 0.00778,
    "decay_steps": 8,
    "decay_rate": 0.9427,
    "gamma": 100.0,
}

GENERATIVE_DESK_PROFILE: Dict[str, Any] = {
    "cutoff_dim": 8,
    "layers": 8,
    "batch_size": 8,
    "epochs": 3000,
    "total_timesteps": 30,
    "beta_start": DiffusionConstants.FULL_SCALE_BETA_START,
    "beta_end": DiffusionConstants.FULL_SCALE_BETA_END,
    "eta_0": 0.99,
    "eta_T": 0.70,
    "lambda": 0.16,
    "initial_learning_rate": 0.01,
    "decay_steps": 100,
    "decay_rate": 0.9427,
    "gamma": 100.0,
    "grad_mode": GradMode.ANALYTIC.value,
}

# Full-scale restoration hyperparameters; noise endpoints follow the generative profile
RESTORATION_FULL_PROFILE: Dict[str, Any] = {
    "cutoff_dim": 15,
    "layers": 30,
    "batch_size": 48,
    "epochs": 112,
    "total_timesteps": 150,
    "beta_start": DiffusionConstants.FULL_SCALE_BETA_START,
    "beta_end": DiffusionConstants.FULL_SCALE_BETA_END,
    "eta_0": DiffusionConstants.FULL_SCALE_ETA_0,
    "eta_T": DiffusionConstants.FULL_SCALE_ETA_T,
    "lambda": 0.16,
    "initial_learning_rate": 0.00045,
    "decay_steps": 24,
    "decay_rate": 0.906,
    "gamma": 100.0,
    "nbar": 0.5,
    "s_max": TrainerConstants.DEFAULT_S_MAX,
}

RESTORATION_DESK_PROFILE: Dict[str, Any] = {
    "cutoff_dim": 8,
    "layers": 8,
    "batch_size": 16,
    "epochs": 3000,
    "total_timesteps": 40,
    "beta_start": DiffusionConstants.FULL_SCALE_BETA_START,
    "beta_end": DiffusionConstants.FULL_SCALE_BETA_END,
    "eta_0": 0.99,
    "eta_T": 0.80,
    "lambda": 0.16,
    "initial_learning_rate": 0.005,
    "decay_steps": 100,
    "decay_rate": 0.906,
    "gamma": 100.0,
    "nbar": 0.5,
    "s_max": TrainerConstants.DEFAULT_S_MAX,
    "grad_mode": GradMode.ANALYTIC.value,
}

# Tuned large-amplitude coherent run (alpha = 2.5), other fields as the full-scale profile.
# Cutoff 20 keeps the |2.5> tail below TARGET_TAIL_TOL.
COHERENT_ALPHA25_TUNED_PROFILE: Dict[str, Any] = {
    **GENERATIVE_FULL_PROFILE,
    "cutoff_dim": 20,
    "schedule": ScheduleKind.BETA.value,
    "batch_size": 30,
    "epochs": 78,
    "total_timesteps": 117,
    "initial_learning_rate": 0.002605,
    "decay_steps": 15,
    "decay_rate": 0.8394,
    "lambda": 2.3236e-5,
    "gamma": 10.358,
}

PROFILES: Dict[str, Dict[str, Dict[str, Any]]] = {
    Role.GENERATIVE.value: {
        "desk": GENERATIVE_DESK_PROFILE,
        "paper": GENERATIVE_FULL_PROFILE,
    },
    Role.RESTORATION.value: {
        "desk": RESTORATION_DESK_PROFILE,
        "paper": RESTORATION_FULL_PROFILE,
    },
}


# ============================================================================
# Verification suites
# ============================================================================


class VerifyConstants:
    """Case counts, grids and bounds of the ``cvqd verify`` suites (verify/)."""

    SUITES = ("fock", "fidelity", "gates", "channel", "theorem1", "variance_law", "gradients")
    FAULTS = ("eta-bar",)
    FAULT_ETA_BAR_SCALE = 0.99  # injected fault: every eta_bar_t (t >= 1) scaled by this

    # Direct jump vs sequential steps
    DIRECT_JUMP_CASES = 50
    DIRECT_JUMP_MAX_STEPS = 6
    DIRECT_JUMP_ETA_MIN = 0.7
    DIRECT_JUMP_CUTOFF = 12
    DIRECT_JUMP_WIDE_CUTOFF = 24
    DIRECT_JUMP_WIDE_CASES = 5
    DIRECT_JUMP_NBARS = (0.0, 0.5)

    # Quadrature variance after one loss channel: 1/2 + (1 - eta) nbar
    VARIANCE_LAW_CUTOFF = 25
    VARIANCE_LAW_ALPHA = 0.7
    VARIANCE_LAW_NBAR = 0.5
    VARIANCE_LAW_ETAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

    # Gate checks
    GATE_CUTOFF = 20
    GATE_ORACLE_TOL = 1e-8
    GENERATOR_FD_STEP = 1e-6
    GENERATOR_FD_TOL = 1e-7

    # Analytic vs finite-difference gradients
    GRADIENT_LAYERS = 2
    GRADIENT_CUTOFF = 8
    GRADIENT_CASES = 20
    GRADIENT_FD_STEP = 1e-5
    GRADIENT_REL_TOL = 1e-5
    GRADIENT_PARAM_SCALE = 0.5
    SPSA_DIRECTIONS = 200
    SPSA_STANDARD_ERRORS = 3.0
