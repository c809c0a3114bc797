from typing import Annotated, Any, Dict, List, Literal, Optional, TypedDict
import operator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .configuration import ConstantsVariant

TraceStatus = Literal["converged", "max_iters", "stage_cap", "failed", "timeout"]


def _as_array(v):
    """Coerce list-like input to a float ndarray."""
    if v is None or isinstance(v, np.ndarray):
        return v
    return np.asarray(v, dtype=float)


class PathConstants(BaseModel):
    """The (beta, gamma) pair driving a path-following scheme."""
    beta: float = Field(description="Centering radius, dimensionless, in (0, 1)")
    gamma: float = Field(description="Path step length, dimensionless, > 0")
    variant: ConstantsVariant = Field(description="Which admissibility conditions apply")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def parse(cls, text: str, variant: ConstantsVariant) -> "PathConstants":
        """Parse a "beta,gamma" string as used by the CLI."""
        beta, gamma = (float(part) for part in text.split(","))
        return cls(beta=beta, gamma=gamma, variant=variant)


PFS_CONSTANTS = PathConstants(beta=0.026, gamma=0.1125, variant=ConstantsVariant.PFS)
PCPFS_CONSTANTS = PathConstants(beta=0.0015, gamma=0.158, variant=ConstantsVariant.PCPFS)
BARRIER_PC_CONSTANTS = PathConstants(beta=0.06, gamma=0.254, variant=ConstantsVariant.BARRIER_PC)


class ConditionCheck(BaseModel):
    """One admissibility inequality lhs <= rhs."""
    name: str = Field(description="Condition identifier")
    lhs: float
    rhs: float
    slack: float = Field(description="rhs - lhs; negative means violated")
    ok: bool


class ValidationReport(BaseModel):
    """Outcome of validate_constants."""
    beta: float
    gamma: float
    variant: ConstantsVariant
    ok: bool
    conditions: List[ConditionCheck] = Field(default_factory=list)
    kappa: Optional[float] = Field(default=None, description="Predictor-corrector progress constant")

    @property
    def violated(self) -> List[str]:
        return [c.name for c in self.conditions if not c.ok]

    def slack(self, name: str) -> float:
        for c in self.conditions:
            if c.name == name:
                return c.slack
        raise KeyError(name)


class IterationRecord(BaseModel):
    """One line of a solver trace."""
    iteration: int
    value: float = Field(description="f(x_k), or the objective the scheme monitors")
    lam: float = Field(description="lambda_f(x_k), or the scheme's centering residual")
    t: Optional[float] = Field(default=None, description="Path parameter t_k (or sigma_k)")
    step_norm: Optional[float] = Field(default=None, description="Local norm of the step taken from x_k")
    c_norm: Optional[float] = Field(default=None, description="||c||*_{x_k} of the path direction")
    residual: Optional[float] = Field(default=None, description="Centering residual of the pair (t_k, x_k)")
    gamma: Optional[float] = Field(default=None, description="Step length actually used")
    tries: Optional[int] = Field(default=None, description="Newton steps spent by an adaptive iterate")
    certificate: Optional[float] = Field(default=None, description="Accuracy certificate at this iterate")
    stage: str = Field(default="main", description="Stage id: damped, standard, path, finish, stage-k, ...")
    wall_time: float = Field(default=0.0, description="Seconds since the solve started")
    flags: List[str] = Field(default_factory=list)


class SolveTrace(BaseModel):
    """Per-iteration log shared by every solver."""
    method: str
    records: List[IterationRecord] = Field(default_factory=list)
    status: TraceStatus = "converged"
    switch_iteration: Optional[int] = Field(
        default=None, description="First iteration index in the quadratic region"
    )
    stage_boundaries: List[int] = Field(default_factory=list)
    message: str = ""

    def add(self, **kwargs) -> IterationRecord:
        record = IterationRecord(iteration=len(self.records), **kwargs)
        self.records.append(record)
        return record

    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    def ts(self) -> np.ndarray:
        return np.array([np.nan if r.t is None else r.t for r in self.records])

    def stage_records(self, stage: str) -> List[IterationRecord]:
        return [r for r in self.records if r.stage == stage]

    @property
    def iterations(self) -> int:
        """Number of steps taken (records minus the starting point)."""
        return max(len(self.records) - 1, 0)


class CenteredPair(BaseModel):
    """A (t, x) pair near the central path."""
    t: float = Field(description="Path parameter")
    x: Any = Field(description="Point")
    residual: float = Field(description="Centering residual of (t, x)")
    c: Any = Field(description="Path direction covector")
    centered: bool = True

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @field_validator("x", "c", mode="before")
    @classmethod
    def coerce_array(cls, v):
        return _as_array(v)


class BoundCheck(BaseModel):
    """Result of checking a sequence of inequalities on a trace."""
    name: str
    checked: int = 0
    violations: int = 0
    max_violation: float = 0.0
    min_slack: Optional[float] = None
    details: List[Dict[str, float]] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def record(self, lhs: float, rhs: float, tol: float, **info) -> None:
        self.checked += 1
        slack = rhs - lhs
        self.min_slack = slack if self.min_slack is None else min(self.min_slack, slack)
        if lhs > rhs + tol:
            self.violations += 1
            self.max_violation = max(self.max_violation, lhs - rhs)
            self.details.append({"lhs": lhs, "rhs": rhs, **info})


class PfsReport(BaseModel):
    """Outcome of a path-following solve."""
    trace: SolveTrace
    n_path: int = Field(description="Path iterations before t hit 0 or the quadratic region was reached")
    t_sequence: List[float] = Field(default_factory=list)
    constants: PathConstants
    kappa: Optional[float] = None
    f0: float
    lambda0: float
    M_f: float
    predicted_t: List[float] = Field(default_factory=list, description="Rate bound on t_k when f* is known")
    rate_check: Optional[BoundCheck] = None
    D_bound: Optional[float] = Field(default=None, description="Level-set diameter used for bound reporting")


class PredictorBound(BaseModel):
    """Upper bound on the centering residual after a predictor move."""
    lambda_before: float
    tau: float
    r: float
    M_f: float
    bound: float


class ComplexityEstimate(BaseModel):
    """A priori iteration bounds for one instance."""
    delta: float = Field(description="M_f^2 (f(x0) - f*)")
    D: Optional[float] = Field(default=None, description="Level-set diameter in the x0 local norm")
    nu: Optional[float] = None
    M_f: float
    bounds: Dict[str, float] = Field(default_factory=dict)


class RestartPlan(BaseModel):
    """Stage schedule of the multi-stage restart wrapper."""
    p: float = Field(description="Rate exponent of the base method")
    c: float = Field(description="Rate constant of the base method")
    k_p: int = Field(description="Length of the first stage")
    stage_lengths: List[int] = Field(default_factory=list)
    target: float = Field(description="Threshold sigma^3/(2 H^2) of the quadratic region")

    def length(self, k: int) -> int:
        """Length of stage k (1-based)."""
        return max(1, int(np.ceil(self.k_p / 2.0 ** ((k - 1) / (2.0 * self.p)) - 1e-12)))

    def extend(self, stages: int) -> "RestartPlan":
        self.stage_lengths = [self.length(k) for k in range(1, stages + 1)]
        return self


class ParamSearchResult(BaseModel):
    """Grid evaluation of the (beta, gamma) optimization problem."""
    betas: Any
    gammas: Any
    objective: Any = Field(description="gamma (gamma - 2 beta) on the grid, shape (len(betas), len(gammas))")
    feasible_contraction: Any = Field(description="Mask of gamma <= sqrt(beta)/(1+sqrt(beta)) - beta")
    feasible_margin: Any = Field(description="Mask of gamma(1-2beta)/4 >= omega_star(beta+gamma)")
    feasible: Any
    argmax: tuple = Field(description="(beta, gamma) maximizing the objective over feasible nodes")
    best_objective: float
    labels: Any = Field(default=None, description="Connected-component label of each feasible node (0 = infeasible)")
    components: int = Field(default=0, description="Number of connected feasible components")

    model_config = ConfigDict(arbitrary_types_allowed=True)


class InvariantReport(BaseModel):
    """Pass/fail summary of one numerically checked inequality."""
    name: str
    checked: int
    violations: int
    max_violation: float = 0.0

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.checked > 0

    @classmethod
    def from_check(cls, check: BoundCheck) -> "InvariantReport":
        return cls(name=check.name, checked=check.checked, violations=check.violations,
                   max_violation=check.max_violation)


class StrategyRow(BaseModel):
    """One line of the feasibility strategy comparison."""
    strategy: str
    iterations: int
    predicted_order: float
    residual: float
    status: TraceStatus


class InstanceRef(BaseModel):
    """Zoo reference inside an experiment spec."""
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None


class MethodRef(BaseModel):
    """Method reference inside an experiment spec."""
    id: str
    constants: Optional[str] = Field(default=None, description="\"beta,gamma\" override")
    options: Dict[str, Any] = Field(default_factory=dict)


class ExperimentSpec(BaseModel):
    """Everything needed to reproduce a benchmark table."""
    instances: List[InstanceRef] = Field(default_factory=list)
    methods: List[MethodRef] = Field(default_factory=list)
    sweeps: Dict[str, List[Any]] = Field(
        default_factory=dict, description="Zoo parameter -> ladder values; rows span the cartesian product"
    )
    output: Optional[str] = None
    seed: int = 0
    regress_on: str = Field(default="delta", description="Row column used as the regression abscissa")


class RowResult(BaseModel):
    """One CSV row of an experiment."""
    key: str
    instance: str
    method: str
    sweep: Dict[str, Any] = Field(default_factory=dict)
    seed: int
    status: TraceStatus = "converged"
    iterations_to_region: Optional[int] = None
    total_iterations: Optional[int] = None
    final_lambda: Optional[float] = None
    certificate: Optional[float] = None
    delta: Optional[float] = None
    log_inv_eps: Optional[float] = None
    nu: Optional[float] = None
    wall_time: Optional[float] = None
    error: str = ""


# Experiment graph states
class ExperimentStateInput(TypedDict):
    spec: ExperimentSpec


class ExperimentStateOutput(TypedDict):
    rows: List[RowResult]
    summary: Dict[str, Any]


class ExperimentState(TypedDict):
    # Input
    spec: ExperimentSpec

    # Intermediate state
    planned_rows: List[Dict[str, Any]]  # Row descriptors produced by the planner
    completed_rows: Annotated[List[RowResult], operator.add]  # Results from parallel rows

    # Output
    rows: List[RowResult]
    summary: Dict[str, Any]


# Individual row execution state (for Send() API)
class RowState(TypedDict):
    row: Dict[str, Any]
    completed_rows: List[RowResult]


class RowOutput(TypedDict):
    completed_rows: List[RowResult]
