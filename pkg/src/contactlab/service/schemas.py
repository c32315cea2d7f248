"""Request/response models for the lab service.

Every request that runs randomness carries an explicit seed, and every
response echoes enough configuration to reproduce it exactly.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator


class GraphIn(BaseModel):
    """A graph, either as a generator spec (line:N, star:N, tree:N:SEED)
    or as inline edge-list text."""

    graph: Optional[str] = None
    edge_list: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.graph is None) == (self.edge_list is None):
            raise ValueError("provide exactly one of graph / edge_list")
        return self


class ConstantsIn(BaseModel):
    c_line: Optional[float] = None
    c_star: Optional[float] = None
    c0: Optional[float] = None
    c_coup: Optional[float] = None
    c_split: Optional[float] = None
    c_eps: Optional[float] = None


class ConstantsOut(BaseModel):
    c_line: float
    c_star: float
    c0: float
    c_coup: float
    c_split: float
    c_eps: float
    provenance: str


class ReportOut(BaseModel):
    quantity: str
    estimate: Optional[float]
    se: Optional[float]
    replicas: int
    censored: int
    seed: int
    config: dict


class BoundCheckOut(BaseModel):
    name: str
    lhs: float
    lhs_se: Optional[float]
    rhs: float
    margin: float
    verdict: str
    note: str


class HealthOut(BaseModel):
    status: str
    version: str


class GenRequest(GraphIn):
    pass


class GenResponse(BaseModel):
    n_vertices: int
    n_edges: int
    edges: list[tuple[int, int]]
    edge_list: str


class SimulateRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    seed: int = 0
    time_cap: float = Field(1e6, gt=0)
    checkpoint_dt: Optional[float] = None
    start: Optional[list[int]] = None

    model_config = {"populate_by_name": True}


class CheckpointOut(BaseModel):
    time: float
    infected: list[int]


class SimulateResponse(BaseModel):
    n_vertices: int
    seed: int
    time_cap: float
    extinction_time: Optional[float]
    censored: bool
    checkpoints: list[CheckpointOut]
    csv: Optional[str]


class MeanTauRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    replicas: int = Field(1000, ge=2)
    time_cap: float = Field(1e6, gt=0)
    seed: int = 0
    jobs: int = Field(1, ge=1)
    include_samples: bool = False
    constants: Optional[ConstantsIn] = None

    model_config = {"populate_by_name": True}


class MeanTauResponse(BaseModel):
    report: ReportOut
    samples_csv: Optional[str]


class ExactRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    quantity: Literal["mean", "survival", "cdf"] = "mean"
    t: Optional[float] = None
    t_grid: Optional[list[float]] = None
    start: Optional[list[int]] = None
    tol: float = Field(1e-10, gt=0)

    model_config = {"populate_by_name": True}


class ExactResponse(BaseModel):
    quantity: str
    value: Optional[float]
    values: Optional[list[float]]
    t_grid: Optional[list[float]]
    tag: str = "exact"


class Exp1Request(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    replicas: int = Field(1000, ge=50)
    time_cap: float = Field(1e6, gt=0)
    seed: int = 0
    alpha: float = Field(0.01, gt=0, lt=1)
    jobs: int = Field(1, ge=1)

    model_config = {"populate_by_name": True}


class Exp1Response(BaseModel):
    ks_distance: float
    threshold: float
    alpha: float
    n_samples: int
    censored: int
    passed: bool
    mean: float


class CouplingRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    start: list[int] = Field(default_factory=lambda: [0])
    t_grid: list[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    replicas: int = Field(500, ge=1)
    seed: int = 0

    model_config = {"populate_by_name": True}


class CouplingResponse(BaseModel):
    curve: list[ReportOut]


class SplitRequest(GraphIn):
    degree_bound: int = Field(..., ge=2)


class SplitResponse(BaseModel):
    removed_edge: tuple[int, int]
    side_a: list[int]
    side_b: list[int]


class ClassifyRequest(GraphIn):
    a_const: float = Field(1.0, gt=0)
    exponent_eps: float = Field(0.5, gt=0)
    mode: Literal["level3", "level4"] = "level4"


class ClassifyResponse(BaseModel):
    kind: str
    witness: Optional[int]
    level_k: Optional[int]
    branch: str
    parts: list[list[int]]


class BoundsRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    check: Literal["attract", "product", "floor"] = "attract"
    t_grid: Optional[list[float]] = None
    parts: Optional[list[list[int]]] = None
    auto_split: Optional[int] = Field(None, ge=1)
    min_part_size: int = Field(1, ge=1)
    replicas: int = Field(2000, ge=0)
    seed: int = 0
    eps: float = Field(0.5, gt=0)
    constants: Optional[ConstantsIn] = None

    model_config = {"populate_by_name": True}


class BoundsResponse(BaseModel):
    checks: list[BoundCheckOut]


class GrowthRequest(BaseModel):
    family: Literal["line", "star", "random_tree"]
    sizes: list[int]
    lam: float = Field(2.0, alias="lambda", gt=0)
    replicas: int = Field(500, ge=2)
    time_cap: float = Field(1e6, gt=0)
    seed: int = 0
    jobs: int = Field(1, ge=1)

    model_config = {"populate_by_name": True}


class GrowthResponse(BaseModel):
    family: str
    sizes: list[int]
    per_size: list[ReportOut]
    used_sizes: list[int]
    slope: Optional[float]
    slope_se: Optional[float]
    ci95: Optional[tuple[float, float]]
    intercept: Optional[float]


class CalibrateRequest(BaseModel):
    lam: float = Field(2.0, alias="lambda", gt=0)
    budget: int = Field(4000, ge=1)
    seed: int = 0
    eps: float = Field(0.5, gt=0)

    model_config = {"populate_by_name": True}


class CalibrateResponse(BaseModel):
    constants: ConstantsOut
    probe_log: list[dict]


class DualCheckRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    t: float = Field(3.0, gt=0)
    fixtures: int = Field(1000, ge=1)
    seed: int = 0

    model_config = {"populate_by_name": True}


class DualCheckResponse(BaseModel):
    checked: int
    failures: int
    graph: str
    lam: float = Field(..., alias="lambda")
    t: float
    seed: int

    model_config = {"populate_by_name": True}


class LitRequest(GraphIn):
    lam: float = Field(2.0, alias="lambda", gt=0)
    configuration: list[int]
    c0: float = Field(..., gt=0)
    replicas: int = Field(2000, ge=1)
    seed: int = 0

    model_config = {"populate_by_name": True}


class LitResponse(BaseModel):
    report: ReportOut
    threshold: float
    time_horizon: float
    lit: bool
    decisive: bool


class RightEdgeRequest(BaseModel):
    n: int = Field(..., ge=1)
    lam: float = Field(2.0, alias="lambda", gt=0)
    seed: int = 0
    t_max: float = Field(100.0, gt=0)

    model_config = {"populate_by_name": True}


class RightEdgePoint(BaseModel):
    time: float
    right_edge: int


class RightEdgeResponse(BaseModel):
    points: list[RightEdgePoint]
    extinction_time: Optional[float]
    t_max: float
