"""
Pydantic models for every document the CLI persists.

These models define the on-disk JSON contracts: checkpoints, state files, run
manifests and verification reports. Floats are kept as Python floats so the
JSON writer can emit their shortest round-trip representation.
"""

from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cvqd.constants import DenoiserConstants as DNC
from cvqd.constants import Role
from cvqd.constants import RuntimeConstants as RC
from cvqd.models.config import TargetSpec, TrainConfig
from cvqd.models.states import DensityMatrix


class TrainingSummary(BaseModel):
    """Outcome of a training run."""

    final_loss: float = Field(description="Loss at the last completed iteration")
    best_loss: float = Field(description="Lowest loss seen; its parameters are stored")
    best_iteration: int = Field(ge=0, description="Iteration that produced best_loss")
    iterations: int = Field(ge=0, description="Iterations actually run")
    converged: bool = Field(description="Stopped by the convergence test before the budget")
    initial_loss: float = Field(description="Loss at iteration 0")


class Checkpoint(BaseModel):
    """
    Trained denoiser parameters with everything needed to rerun the chain.

    A generative checkpoint carries its target descriptor; a restoration
    checkpoint carries none.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "format_version": RC.CHECKPOINT_FORMAT,
                "role": "generative",
                "layout": DNC.LAYOUT_TAG,
                "theta": [0.0] * DNC.PARAMS_PER_LAYER,
            }
        },
    )

    format_version: str = Field(default=RC.CHECKPOINT_FORMAT)
    role: Role
    layout: str = Field(default=DNC.LAYOUT_TAG, description="Parameter layout tag")
    cfg: TrainConfig
    theta: List[float] = Field(description="Flat parameter vector, 16 per layer")
    target: Optional[TargetSpec] = Field(default=None, description="Generative target")
    summary: Optional[TrainingSummary] = Field(default=None)

    @model_validator(mode="after")
    def _check_contents(self) -> "Checkpoint":
        if self.format_version != RC.CHECKPOINT_FORMAT:
            raise ValueError(
                f"Unsupported checkpoint format '{self.format_version}', "
                f"expected '{RC.CHECKPOINT_FORMAT}'"
            )
        if self.layout != DNC.LAYOUT_TAG:
            raise ValueError(f"Unsupported parameter layout '{self.layout}'")
        expected = DNC.PARAMS_PER_LAYER * self.cfg.layers
        if len(self.theta) != expected:
            raise ValueError(
                f"theta has {len(self.theta)} entries, {self.cfg.layers} layers need {expected}"
            )
        if self.role is Role.GENERATIVE and self.target is None:
            raise ValueError("A generative checkpoint must record its target")
        return self


class StateDocument(BaseModel):
    """
    Serialized density matrix: {version, modes, cutoff, data}.

    ``data`` lists the matrix entries row-major as [re, im] pairs.
    """

    model_config = ConfigDict(extra="forbid")

    version: int = Field(default=RC.STATE_FORMAT_VERSION)
    modes: int = Field(ge=1, le=2)
    cutoff: int = Field(ge=2)
    data: List[Tuple[float, float]]

    @model_validator(mode="after")
    def _check_size(self) -> "StateDocument":
        if self.version != RC.STATE_FORMAT_VERSION:
            raise ValueError(f"Unsupported state format version {self.version}")
        dim = self.cutoff**self.modes
        if len(self.data) != dim * dim:
            raise ValueError(f"State needs {dim * dim} entries, got {len(self.data)}")
        return self

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> "StateDocument":
        flat = rho.data.reshape(-1)
        pairs = [(float(z.real), float(z.imag)) for z in flat]
        return cls(modes=rho.modes, cutoff=rho.cutoff, data=pairs)

    def to_density(self) -> DensityMatrix:
        values = np.array(self.data, dtype=float)
        dim = self.cutoff**self.modes
        matrix = (values[:, 0] + 1j * values[:, 1]).reshape(dim, dim)
        return DensityMatrix(matrix, self.cutoff, modes=self.modes)


class RunManifest(BaseModel):
    """Record of one CLI invocation and every file it wrote."""

    command: str = Field(description="CLI command name")
    config_path: Optional[str] = Field(default=None)
    profile: Optional[str] = Field(default=None)
    seed: Optional[int] = Field(default=None)
    started_at: str = Field(description="ISO-8601 UTC start time")
    finished_at: Optional[str] = Field(default=None)
    outputs: List[str] = Field(default_factory=list, description="Files written, in order")
    parameters: Dict[str, Any] = Field(default_factory=dict)


class CheckResult(BaseModel):
    """One verification check: measured value against its bound."""

    suite: str
    name: str
    measured: float
    bound: float
    passed: bool
    detail: str = ""


class VerifyReport(BaseModel):
    """Results of a ``cvqd verify`` run."""

    suites: List[str]
    fault: Optional[str] = Field(default=None, description="Injected fault, if any")
    checks: List[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]
