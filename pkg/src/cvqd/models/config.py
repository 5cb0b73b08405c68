"""
Pydantic models for training configuration.

Field aliases are the names used in config files and checkpoints
(``cutoff_dim``, ``eta_0``, ``lambda``, ``epochs``, ...); the Python attribute
names are what the code reads. Both spellings are accepted on input.
"""

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvqd.constants import DenoiserConstants as DNC
from cvqd.constants import GradMode, Parity, ScheduleKind, TargetKind
from cvqd.constants import TrainerConstants as TC


class TargetSpec(BaseModel):
    """Descriptor of a generative target state."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: TargetKind = Field(description="coherent, squeezed, fock or cat")
    alpha: Optional[float] = Field(default=None, description="Coherent/cat amplitude")
    phase: float = Field(default=0.0, description="Coherent phase (radians)")
    r: Optional[float] = Field(default=None, description="Squeezing parameter")
    n: Optional[int] = Field(default=None, ge=0, description="Fock level")
    parity: Parity = Field(default=Parity.EVEN, description="Cat parity")

    @model_validator(mode="after")
    def _check_parameters(self) -> "TargetSpec":
        required = {
            TargetKind.COHERENT: ("alpha", self.alpha),
            TargetKind.CAT: ("alpha", self.alpha),
            TargetKind.SQUEEZED: ("r", self.r),
            TargetKind.FOCK: ("n", self.n),
        }
        name, value = required[self.kind]
        if value is None:
            raise ValueError(f"Target '{self.kind.value}' requires parameter '{name}'")
        return self

    def label(self) -> str:
        """Short human-readable description."""
        if self.kind is TargetKind.COHERENT:
            return f"coherent(alpha={self.alpha}, phase={self.phase})"
        if self.kind is TargetKind.SQUEEZED:
            return f"squeezed(r={self.r})"
        if self.kind is TargetKind.FOCK:
            return f"fock(n={self.n})"
        return f"cat(alpha={self.alpha}, {self.parity.value})"


class TrainConfig(BaseModel):
    """Every hyperparameter of a generative or restoration training run."""

    model_config = ConfigDict(
        frozen=True,
        extra="forbid",
        populate_by_name=True,
        json_schema_extra={
            "example": {
                "cutoff_dim": 8,
                "layers": 8,
                "total_timesteps": 30,
                "batch_size": 8,
                "epochs": 3000,
                "eta_0": 0.99,
                "eta_T": 0.70,
                "lambda": 0.16,
                "gamma": 100.0,
                "initial_learning_rate": 0.01,
                "decay_steps": 100,
                "decay_rate": 0.9427,
                "target": "coherent",
                "target_alpha": 1.0,
            }
        },
    )

    # Simulation size
    cutoff: int = Field(alias="cutoff_dim", ge=2, description="Fock levels per mode")
    layers: int = Field(ge=1, description="CVQNN layers L")
    total_timesteps: int = Field(ge=2, description="Diffusion steps T")

    # Noise
    nbar: float = Field(default=0.0, ge=0.0, description="Environment mean photon number")
    schedule: ScheduleKind = Field(default=ScheduleKind.ETA, description="Schedule constructor")
    eta0: float = Field(alias="eta_0", ge=0.0, le=1.0, description="Initial transmissivity")
    etaT: float = Field(alias="eta_T", ge=0.0, le=1.0, description="Final transmissivity")
    beta_start: float = Field(default=1e-4, gt=0.0, lt=1.0, description="Beta ramp start")
    beta_end: float = Field(default=0.05, gt=0.0, lt=1.0, description="Beta ramp end")

    # Optimization
    batch_size: int = Field(ge=1, description="Sampled timesteps per iteration")
    max_iters: int = Field(alias="epochs", ge=1, description="Iteration budget I")
    lr0: float = Field(alias="initial_learning_rate", gt=0.0, description="Initial learning rate")
    decay_steps: float = Field(gt=0.0, description="Iterations per decay_rate factor")
    decay_rate: float = Field(gt=0.0, le=1.0, description="Learning-rate decay factor")
    lambda_: float = Field(alias="lambda", ge=0.0, description="Weight of the timestep terms")
    gamma: float = Field(ge=0.0, description="Trace penalty weight")
    grad_mode: GradMode = Field(default=GradMode.CENTRAL_FD, description="Gradient estimator")
    fd_step: float = Field(default=TC.DEFAULT_FD_STEP, gt=0.0, description="Central FD step")
    spsa_perturb: float = Field(default=TC.DEFAULT_SPSA_PERTURB, gt=0.0)
    spsa_averages: int = Field(default=TC.DEFAULT_SPSA_AVERAGES, ge=1)
    convergence_tol: float = Field(default=TC.CONVERGENCE_TOL, ge=0.0)
    convergence_window: int = Field(default=TC.CONVERGENCE_WINDOW, ge=1)
    sample_with_replacement: bool = Field(default=False)
    workers: int = Field(default=1, ge=1, description="Threads for batch terms and FD coordinates")

    # Denoiser
    alpha_embed: float = Field(default=DNC.DEFAULT_ALPHA_EMBED, gt=0.0)
    param_init_scale: float = Field(default=DNC.DEFAULT_INIT_SCALE, ge=0.0)
    seed: int = Field(default=0, description="Seed of every random draw in the run")

    # Generative target (flat keys)
    target: Optional[TargetKind] = Field(default=None)
    target_alpha: Optional[float] = Field(default=None)
    target_phase: float = Field(default=0.0)
    target_r: Optional[float] = Field(default=None)
    target_n: Optional[int] = Field(default=None, ge=0)
    target_parity: Parity = Field(default=Parity.EVEN)

    # Restoration sampler
    s_max: float = Field(default=TC.DEFAULT_S_MAX, ge=0.0, description="Largest sampled amplitude")

    @model_validator(mode="after")
    def _check_batch(self) -> "TrainConfig":
        if not self.sample_with_replacement and self.batch_size > self.total_timesteps - 1:
            raise ValueError(
                f"batch_size={self.batch_size} exceeds the {self.total_timesteps - 1} distinct "
                f"timesteps available without replacement"
            )
        return self

    def target_spec(self) -> Optional[TargetSpec]:
        """The generative target described by the flat target_* keys, if any."""
        if self.target is None:
            return None
        return TargetSpec(
            kind=self.target,
            alpha=self.target_alpha,
            phase=self.target_phase,
            r=self.target_r,
            n=self.target_n,
            parity=self.target_parity,
        )

    def to_file_dict(self) -> dict:
        """Config as written to files (alias names, enums as strings)."""
        return self.model_dump(mode="json", by_alias=True)
