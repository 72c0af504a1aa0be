"""
Pydantic models for landscape files, run configuration and reports.
"""

from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, StrictInt, field_validator


class StateEntry(BaseModel):
    """One state of a landscape file."""
    label: Optional[str] = Field(None, description="Opaque state label")
    energy: StrictInt = Field(..., description="Exact integer energy")


class LandscapeFile(BaseModel):
    """On-disk landscape format."""
    states: list[StateEntry] = Field(..., description="States in StateId order")
    edges: list[tuple[StrictInt, StrictInt]] = Field(default_factory=list, description="Undirected edges as index pairs")

    class Config:
        json_schema_extra = {
            "example": {
                "states": [{"label": "s0", "energy": 0}, {"label": "s1", "energy": 3}],
                "edges": [[0, 1]]
            }
        }


class RunConfig(BaseModel):
    """Resolved parameters of one CLI invocation."""
    command: str = Field(..., description="Subcommand name")
    input_path: Optional[Path] = Field(None, description="Landscape JSON input")
    report_path: Optional[Path] = Field(None, description="Report JSON output")
    K: int = Field(5, gt=2, description="Torus columns")
    L: int = Field(4, gt=1, description="Torus rows")
    N0: int = Field(2, gt=0, description="Strip width")
    beta_grid: list[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0], min_length=1)
    seed: int = Field(0, ge=0)
    trajectories: int = Field(100_000, gt=0)
    state_cap: int = Field(5_000_000, gt=0)
    enumeration_cap: int = Field(10_000_000, gt=0)
    jobs: int = Field(1, gt=0)

    @field_validator("input_path")
    @classmethod
    def _input_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"Input file not found: {value}")
        return value

    @field_validator("beta_grid")
    @classmethod
    def _positive_betas(cls, value: list[float]) -> list[float]:
        if any(beta <= 0 for beta in value):
            raise ValueError(f"Inverse temperatures must be positive: {value}")
        return value


class LevelModel(BaseModel):
    """One level of the hierarchy."""
    h: int
    gamma_star: int
    nu: int
    plateaux: list[list[int]] = Field(..., description="State ids of each level plateau")
    plateau_energies: list[int]
    depths: list[int]
    valleys: list[list[int]]
    sharp_cycles: list[list[int]]
    components: list[list[int]] = Field(..., description="Recurrent classes as plateau indices")
    transient: list[int]
    rates: list[tuple[int, int, str]] = Field(..., description="Nonzero trace rates (i, j, 'p/q')")
    exact: bool


class CheckRecord(BaseModel):
    """Outcome of one verification check."""
    model_config = ConfigDict(populate_by_name=True)

    check: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    expected: Any = None
    observed: Any = None
    tolerance: Optional[float] = Field(None, description="Engineering tolerance, not a limit-theorem constant")
    passed: bool = Field(..., alias="pass")


class HierarchyReportModel(BaseModel):
    """JSON report of a full hierarchy run."""
    version: str
    config: dict[str, Any]
    source_states: int
    analysed_states: int
    phi_bar: Optional[int]
    ground_states: list[int]
    terminal: int
    gamma_stars: list[int]
    nus: list[int]
    levels: list[LevelModel]
    checks: list[CheckRecord] = Field(default_factory=list)


class VerificationReport(BaseModel):
    """JSON report of a verification suite."""
    version: str
    config: dict[str, Any]
    suite: str
    checks: list[CheckRecord]

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.checks)
