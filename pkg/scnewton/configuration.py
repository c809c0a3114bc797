import os
import logging
import time
from enum import Enum
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Tuple

from langchain_core.runnables import RunnableConfig
from dotenv import load_dotenv
from rich.logging import RichHandler

# Load environment variables from .env file
load_dotenv()

# Keep graph-runtime chatter out of solver logs
logging.getLogger('httpx').setLevel(logging.WARNING)
logging.getLogger('langgraph').setLevel(logging.WARNING)

DEFAULT_OUTPUT_DIR = os.getenv("SCNEWTON_OUTPUT_DIR", "results")
DEFAULT_LOG_LEVEL = os.getenv("SCNEWTON_LOG_LEVEL", "WARNING")
DEFAULT_SEED = int(os.getenv("SCNEWTON_SEED", "0"))

CSV_SCHEMA_VERSION = 1


class MethodType(Enum):
    """Solver identifiers accepted by the CLI and experiment specs."""
    DNM = "dnm"
    PFS = "pfs"
    PCPFS = "pcpfs"
    ADAPTIVE_PFS = "adaptive-pfs"
    ADAPTIVE_PCPFS = "adaptive-pcpfs"
    CRNM = "crnm"
    MULTISTAGE_CRNM = "multistage-crnm"
    PRIMAL_PC = "primal-pc"
    DUAL_PC = "dual-pc"
    FEAS_DNM = "feas-dnm"
    FEAS_PFS = "feas-pfs"
    FEAS_DUAL_PF = "feas-dual-pf"


class ConstantsVariant(Enum):
    """Which admissibility conditions a (beta, gamma) pair must satisfy."""
    PFS = "PFS"
    PCPFS = "PCPFS"
    BARRIER_PC = "BarrierPC"


def configure_logging(level: str = DEFAULT_LOG_LEVEL) -> logging.Logger:
    """Attach a rich handler to the package logger (idempotent)."""
    logger = logging.getLogger("scnewton")
    logger.setLevel(level.upper() if isinstance(level, str) else level)
    if not any(isinstance(h, RichHandler) for h in logger.handlers):
        handler = RichHandler(rich_tracebacks=True, show_path=False, markup=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(handler)
    logger.propagate = False
    return logger


def _from_configurable(cls, config: Optional[RunnableConfig]):
    configurable = (
        config["configurable"] if config and "configurable" in config else {}
    )
    values: dict[str, Any] = {}

    for f in fields(cls):
        if not f.init:
            continue

        value = configurable.get(f.name)

        # Only include non-None values
        if value is not None:
            values[f.name] = value

    return cls(**values)


@dataclass(kw_only=True)
class SolverConfiguration:
    """Stopping rules and tolerances shared by the Newton-type drivers."""

    max_iters: int = 10_000  # Hard cap on outer iterations
    target_lambda: Optional[float] = None  # None -> 1/(2 M_f), the quadratic region
    quad_finish_tol: Optional[float] = None  # None -> 1e-10/M_f (absolute when M_f = 0)
    centering_tol: float = 1e-9  # Relative slack allowed on centering checks
    inner_tol: float = 1e-12  # Gradient residual of conjugate inner solves
    debug_units: bool = False  # Assert dimensionless arguments to omega/omega_star
    time_limit: Optional[float] = None  # Wall-clock seconds per solve; None -> unlimited

    def __post_init__(self):
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if self.target_lambda is not None and self.target_lambda <= 0:
            raise ValueError("target_lambda must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")

    def expired(self, started: float) -> bool:
        """True once `time_limit` seconds have passed since the perf_counter reading `started`."""
        return self.time_limit is not None and time.perf_counter() - started > self.time_limit

    def resolve(self, M_f: float) -> Tuple[float, float]:
        """Return concrete (target_lambda, quad_finish_tol) for a given M_f."""
        if M_f > 0:
            target = self.target_lambda if self.target_lambda is not None else 1.0 / (2.0 * M_f)
            if target * M_f > 0.5 + 1e-15:
                raise ValueError(
                    f"target_lambda*M_f = {target * M_f:.4g} exceeds 1/2; "
                    "the damped phase would stop outside the quadratic region"
                )
            finish = self.quad_finish_tol if self.quad_finish_tol is not None else 1e-10 / M_f
        else:
            target = self.target_lambda if self.target_lambda is not None else float("inf")
            finish = self.quad_finish_tol if self.quad_finish_tol is not None else 1e-10
        return target, finish

    @classmethod
    def from_runnable_config(
        cls, config: Optional[RunnableConfig] = None
    ) -> "SolverConfiguration":
        """Create a SolverConfiguration from a RunnableConfig's configurable dict.

        Args:
            config: Optional RunnableConfig containing configuration values

        Returns:
            SolverConfiguration with values from config, defaults for unspecified fields
        """
        return _from_configurable(cls, config)


@dataclass(kw_only=True)
class BenchConfiguration:
    """Configuration for the experiment runner."""

    output_dir: str = DEFAULT_OUTPUT_DIR  # Where rows.csv and summary.json go
    row_timeout: float = 60.0  # Seconds per (instance, method, sweep point) row
    max_concurrency: int = 4  # Rows solved at once
    include_timing: bool = False  # Wall time breaks byte-for-byte reproducibility
    write_files: bool = True  # Tests may skip writing
    min_regression_points: int = 6  # Ladder points required for a slope fit
    solver: Optional[SolverConfiguration] = None

    def __post_init__(self):
        if self.solver is None:
            self.solver = SolverConfiguration()
        elif isinstance(self.solver, dict):
            self.solver = SolverConfiguration(**self.solver)

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    @classmethod
    def from_runnable_config(
        cls, config: Optional[RunnableConfig] = None
    ) -> "BenchConfiguration":
        """Create a BenchConfiguration from a RunnableConfig's configurable dict."""
        return _from_configurable(cls, config)
