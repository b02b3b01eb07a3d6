"""Cycle accounting for region-proposal traces and pipeline op counts.

The controller's minimal execution time is linear in the object count N:
8N+8 cycles for the in-memory phase alone and 10N+12 with controller
bookkeeping. The default cost table is calibrated so a minimal trace
(one full-axis projection, one region projection per object, one
controller entry per object plus fixed overhead) reproduces both lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

FULL_AXIS_PROJECTION = "full_axis_projection"
REGION_PROJECTION = "region_projection"
CONTROLLER_OBJECT = "controller_object"
CONTROLLER_FIXED = "controller_fixed"

OP_KINDS = (FULL_AXIS_PROJECTION, REGION_PROJECTION, CONTROLLER_OBJECT, CONTROLLER_FIXED)

DIFFUSION_OPS_PER_CELL = 5  # 4 neighbor adds + 1 scale per cell per substep


@dataclass(frozen=True)
class CostTable:
    """Cycles charged per primitive operation."""

    full_axis_projection: int = 8
    region_projection: int = 8
    controller_object: int = 2
    controller_fixed: int = 4

    def __post_init__(self):
        for kind in OP_KINDS:
            if getattr(self, kind) < 0:
                raise ConfigError(f"cost for {kind} must be >= 0")

    def cost(self, kind: str) -> int:
        if kind not in OP_KINDS:
            raise ConfigError(f"unknown op kind {kind!r}")
        return getattr(self, kind)


@dataclass
class CycleTrace:
    """Ordered record of (op_kind, count) primitive operations."""

    entries: list[tuple[str, int]] = field(default_factory=list)

    def append(self, kind: str, count: int = 1) -> None:
        if kind not in OP_KINDS:
            raise ConfigError(f"unknown op kind {kind!r}")
        if count < 1:
            raise ConfigError(f"entry count must be >= 1, got {count}")
        self.entries.append((kind, count))

    def concat(self, other: "CycleTrace") -> "CycleTrace":
        return CycleTrace(self.entries + other.entries)

    def total(self, kind: str) -> int:
        return sum(count for k, count in self.entries if k == kind)


def trace_cycles(trace: CycleTrace, costs: CostTable | None = None) -> int:
    """Total cycles of a trace under a cost table (additive over concatenation)."""
    costs = costs or CostTable()
    return sum(count * costs.cost(kind) for kind, count in trace.entries)


def minimal_cycles_imc(n_objects: int) -> int:
    """Best-case in-memory cycles for n_objects well-separated objects: 8N+8."""
    if n_objects < 0:
        raise ConfigError("object count must be >= 0")
    return 8 * n_objects + 8


def minimal_cycles_total(n_objects: int) -> int:
    """Best-case cycles including controller bookkeeping: 10N+12."""
    if n_objects < 0:
        raise ConfigError("object count must be >= 0")
    return 10 * n_objects + 12


@dataclass
class PipelineRun:
    """What a pipeline invocation actually touched, for op-count reporting.

    cells counts the diffused array including the dummy ring;
    projection_cells holds the cells sensed by each projection, in order.
    """

    pulses: int = 0
    substeps_per_pulse: int = 0
    cells: int = 0
    projection_cells: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class OpCounts:
    diffusion_ops: int
    projection_ops: int


def op_count(run: PipelineRun) -> OpCounts:
    """Pixel-ops for diffusion and cell-reads for projections in a run."""
    diffusion = run.pulses * run.substeps_per_pulse * run.cells * DIFFUSION_OPS_PER_CELL
    projection = sum(run.projection_cells)
    return OpCounts(diffusion_ops=diffusion, projection_ops=projection)
