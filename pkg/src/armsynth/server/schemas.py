"""Pydantic request/response models of the synthesis service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class SynthesisOptions(BaseModel):
    """Numeric knobs shared by all endpoints."""

    ubound: float = Field(10.0, ge=0, description="control magnitude budget (N*m)")
    epsilon: float = Field(0.01, gt=0, description="slack growth bound")
    dt: float = Field(0.1, gt=0, description="discretization step (s)")
    grid: float = Field(0.1, gt=0, description="abstraction cell size (m)")
    gp_budget: int = Field(80, ge=1, description="oracle evaluations per structure")
    max_links: int = Field(4, ge=1)
    kmax: int = Field(200, ge=1, description="largest planning horizon")
    seed: int = 0
    trust: float = Field(0.3, gt=0, description="pose linearization trust region (rad)")
    wall_clock: Optional[float] = Field(None, description="wall-clock cap (s)")
    paths_per_structure: int = Field(4, ge=1)
    grid_per_dim: int = Field(24, ge=2, description="length-grid resolution per link")


class SynthesizeRequest(BaseModel):
    workspace: str = Field(description="workspace file content")
    catalog: Optional[str] = Field(None, description="module catalog file content")
    options: SynthesisOptions = SynthesisOptions()


class DesignDoc(BaseModel):
    """Serialized certified design (matches the design.json artifact)."""

    word: str
    lengths: list[float]
    rho: float
    path: list[int]
    control: list[list[float]]
    options: dict


class ArtifactBundle(BaseModel):
    report: str
    design: str
    trajectory_csv: str
    history_csv: str
    svg: str
    log_jsonl: str


class SynthesizeResponse(BaseModel):
    status: Literal["success", "unsynthesizable"]
    reason: Optional[str] = None
    design: Optional[DesignDoc] = None
    artifacts: Optional[ArtifactBundle] = None
    log: list[dict]


class CheckRequest(BaseModel):
    design: DesignDoc
    workspace: str
    catalog: Optional[str] = None
    ubound: Optional[float] = Field(None, description="re-check under this budget")


class CheckResponse(BaseModel):
    ok: bool
    rho: Optional[float] = None        # None encodes an infinite sentinel
    rho_text: str
    violation_step: Optional[int] = None
    reason: Optional[str] = None


class RobustnessRequest(BaseModel):
    workspace: str
    catalog: Optional[str] = None
    word: str
    lengths: list[float]
    path: Optional[list[int]] = Field(None, description="cell path; planned when omitted")
    options: SynthesisOptions = SynthesisOptions()


class RobustnessResponse(BaseModel):
    rho: Optional[float] = None
    rho_text: str
    status: str
    path: list[int]


class PlanRequest(BaseModel):
    workspace: str
    options: SynthesisOptions = SynthesisOptions()
    blocked: list[list[int]] = Field(default_factory=list,
                                     description="cell paths to exclude")


class PlanResponse(BaseModel):
    feasible: bool
    path: list[int] = Field(default_factory=list)
    centers: list[list[float]] = Field(default_factory=list)
    cells_total: int = 0


class HealthResponse(BaseModel):
    status: str
    version: str
