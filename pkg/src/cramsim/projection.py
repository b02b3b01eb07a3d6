"""Line projection, the iterative region-proposal search, and box consolidation.

Projection mode reads a whole line at once: every enabled cell storing 1
charges its projection line, and a per-line detector compares the line
voltage against a DAC-programmed reference. The search alternates row and
column projections, refining each candidate box on the projected axis and
splitting it when the projection detects multiple runs, until the object
count stops changing. A consolidation pass then drops undersized boxes and
merges boxes whose row and column gaps are both under the slot thresholds,
which stitches fragmented objects back together.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import ConfigError
from .grid import BinaryFrame
from .timing import (
    CONTROLLER_FIXED,
    CONTROLLER_OBJECT,
    FULL_AXIS_PROJECTION,
    REGION_PROJECTION,
    CycleTrace,
)

Axis = Literal["rows", "cols"]

DAC_BITS = 4
DAC_MAX = 2**DAC_BITS - 1


@dataclass(frozen=True)
class ProjectionConfig:
    """Line-detector knobs: 4-bit DAC reference and charge saturation constant."""

    dac_code: int = 7
    line_charge_constant: float = 0.7

    def __post_init__(self):
        if not 0 <= self.dac_code <= DAC_MAX:
            raise ConfigError(f"dac_code must be in [0, {DAC_MAX}], got {self.dac_code}")
        if self.line_charge_constant <= 0.0:
            raise ConfigError("line_charge_constant must be > 0")

    @property
    def vref(self) -> float:
        return self.dac_code / DAC_MAX


@dataclass(frozen=True)
class Box:
    """Inclusive rectangular extent: rows r0..r1, columns c0..c1."""

    r0: int
    r1: int
    c0: int
    c1: int

    def __post_init__(self):
        if not (0 <= self.r0 <= self.r1 and 0 <= self.c0 <= self.c1):
            raise ValueError(f"invalid box extents {self}")

    @property
    def height(self) -> int:
        return self.r1 - self.r0 + 1

    @property
    def width(self) -> int:
        return self.c1 - self.c0 + 1

    @property
    def area(self) -> int:
        return self.height * self.width

    def union(self, other: "Box") -> "Box":
        return Box(
            min(self.r0, other.r0),
            max(self.r1, other.r1),
            min(self.c0, other.c0),
            max(self.c1, other.c1),
        )

    def row_gap(self, other: "Box") -> int:
        return _interval_gap(self.r0, self.r1, other.r0, other.r1)

    def col_gap(self, other: "Box") -> int:
        return _interval_gap(self.c0, self.c1, other.c0, other.c1)

    def to_json_obj(self) -> dict[str, int]:
        # JSON naming is x/y with x = column
        return {"x0": self.c0, "y0": self.r0, "x1": self.c1, "y1": self.r1}

    @classmethod
    def from_json_obj(cls, obj: dict[str, int]) -> "Box":
        return cls(r0=obj["y0"], r1=obj["y1"], c0=obj["x0"], c1=obj["x1"])


def _interval_gap(a0: int, a1: int, b0: int, b1: int) -> int:
    # number of free lines strictly between the intervals; overlap -> 0
    if b0 > a1:
        return b0 - a1 - 1
    if a0 > b1:
        return a0 - b1 - 1
    return 0


def _sort_key(box: Box) -> tuple[int, int, int, int]:
    return (box.r0, box.c0, box.r1, box.c1)


@dataclass(frozen=True)
class RpConfig:
    """Region-proposal thresholds: noise size floor, merge slots, iteration cap."""

    size_min: int = 4
    slot_r: int = 4
    slot_c: int = 4
    max_iters: int = 16
    size_metric: Literal["area", "max_side"] = "area"
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)

    def __post_init__(self):
        if self.size_min < 0:
            raise ConfigError("size_min must be >= 0")
        if self.slot_r < 0 or self.slot_c < 0:
            raise ConfigError("slot thresholds must be >= 0")
        if self.max_iters < 2:
            raise ConfigError("max_iters must be >= 2")
        if self.size_metric not in ("area", "max_side"):
            raise ConfigError(f"unknown size_metric {self.size_metric!r}")


def line_voltage(n_ones: int, cfg: ProjectionConfig) -> float:
    """Saturating line voltage from n enabled 1-cells: 1 - exp(-n/lambda).

    Zero enabled 1s leaves the line floating at zero; the voltage grows
    monotonically with the count and saturates at VDD = 1.
    """
    if n_ones < 0:
        raise ConfigError("n_ones must be >= 0")
    return 1.0 - math.exp(-n_ones / cfg.line_charge_constant)


def _detect(counts: np.ndarray, cfg: ProjectionConfig) -> np.ndarray:
    volts = 1.0 - np.exp(-counts.astype(np.float64) / cfg.line_charge_constant)
    return (volts > cfg.vref).astype(np.uint8)


def project(
    frame: BinaryFrame,
    axis: Axis,
    mask: Iterable[int] | np.ndarray,
    cfg: ProjectionConfig,
) -> np.ndarray:
    """Project the frame onto one axis with the orthogonal axis masked.

    Returns one detection bit per line on `axis`: 1 iff the line's voltage,
    charged by 1-pixels at enabled orthogonal indices, exceeds vref.
    """
    mask_arr = np.unique(np.asarray(list(mask) if not isinstance(mask, np.ndarray) else mask,
                                    dtype=np.intp))
    if mask_arr.size == 0:
        raise ConfigError("projection mask must not be empty")
    if axis == "rows":
        if mask_arr[0] < 0 or mask_arr[-1] >= frame.width:
            raise ConfigError("mask index outside frame columns")
        counts = frame.pixels[:, mask_arr].sum(axis=1)
    elif axis == "cols":
        if mask_arr[0] < 0 or mask_arr[-1] >= frame.height:
            raise ConfigError("mask index outside frame rows")
        counts = frame.pixels[mask_arr, :].sum(axis=0)
    else:
        raise ConfigError(f"unknown axis {axis!r}")
    return _detect(counts, cfg)


def runs_from_bits(bits: Sequence[int] | np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of consecutive 1 bits as inclusive (start, end) intervals."""
    b = np.asarray(bits, dtype=np.int8)
    edges = np.flatnonzero(np.diff(np.concatenate(([0], b, [0]))))
    starts, ends = edges[::2], edges[1::2] - 1
    return list(zip(starts.tolist(), ends.tolist()))


@dataclass
class IssResult:
    boxes: list[Box]
    iterations: int
    trace: CycleTrace
    projection_cells: list[int] = field(default_factory=list)


def _refine(
    pixels: np.ndarray, cand: Box, axis: Axis, cfg: ProjectionConfig
) -> list[Box]:
    """Project one candidate onto `axis`, masked by its extent on the other axis.

    Only lines inside the candidate's current extent on the projected axis are
    sensed; each detected run replaces that extent, so multiple runs split the
    candidate.
    """
    block = pixels[cand.r0:cand.r1 + 1, cand.c0:cand.c1 + 1]
    if axis == "cols":
        counts = block.sum(axis=0)
    else:
        counts = block.sum(axis=1)
    bits = _detect(counts, cfg)
    out = []
    for lo, hi in runs_from_bits(bits):
        if axis == "cols":
            out.append(Box(cand.r0, cand.r1, cand.c0 + lo, cand.c0 + hi))
        else:
            out.append(Box(cand.r0 + lo, cand.r0 + hi, cand.c0, cand.c1))
    return out


def iss(frame: BinaryFrame, cfg: RpConfig) -> IssResult:
    """Alternating-projection region search.

    Iteration 1 projects every row with the full column mask; each detected
    row run opens a candidate spanning all columns. Every later iteration
    alternates axis and re-projects each candidate within its own extents.
    The search stops once the candidate count matches the previous
    iteration's count (a row and a column pass have then both completed),
    when no candidates remain, or at the max_iters cap.
    """
    pcfg = cfg.projection
    trace = CycleTrace()
    cells: list[int] = []

    trace.append(FULL_AXIS_PROJECTION)
    cells.append(frame.width * frame.height)
    row_bits = _detect(frame.pixels.sum(axis=1), pcfg)
    candidates = [Box(lo, hi, 0, frame.width - 1) for lo, hi in runs_from_bits(row_bits)]
    iterations = 1
    prev_count = len(candidates)

    while candidates and iterations < cfg.max_iters:
        axis: Axis = "cols" if iterations % 2 == 1 else "rows"
        iterations += 1
        refined: list[Box] = []
        for cand in candidates:
            trace.append(REGION_PROJECTION)
            cells.append(cand.area)
            refined.extend(_refine(frame.pixels, cand, axis, pcfg))
        candidates = refined
        if len(candidates) == prev_count:
            break
        prev_count = len(candidates)

    return IssResult(sorted(candidates, key=_sort_key), iterations, trace, cells)


def _box_size(box: Box, metric: str) -> int:
    if metric == "max_side":
        return max(box.height, box.width)
    return box.area


def rp_update(new_boxes: Sequence[Box], cfg: RpConfig) -> list[Box]:
    """Consolidate proposals: size-filter, then merge near boxes to a fixpoint.

    Boxes smaller than size_min are dropped as noise. Any two boxes whose row
    gap is under slot_r AND column gap under slot_c (strict; overlapping
    extents gap 0) merge into their bounding union, repeatedly, until stable.
    Merging only grows boxes and shrinks gaps, so the fixpoint is unique and
    the result is independent of input order.
    """
    boxes = sorted(
        (b for b in new_boxes if _box_size(b, cfg.size_metric) >= cfg.size_min),
        key=_sort_key,
    )
    merged = True
    while merged:
        merged = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                a, b = boxes[i], boxes[j]
                if a.row_gap(b) < cfg.slot_r and a.col_gap(b) < cfg.slot_c:
                    boxes[i] = a.union(b)
                    del boxes[j]
                    boxes.sort(key=_sort_key)
                    merged = True
                    break
            if merged:
                break
    return boxes


@dataclass
class ProposeResult:
    boxes: list[Box]
    trace: CycleTrace
    iss_boxes: list[Box]
    iterations: int
    projection_cells: list[int] = field(default_factory=list)


def region_propose(frame: BinaryFrame, cfg: RpConfig) -> ProposeResult:
    """Projection-phase search followed by the controller consolidation pass.

    The returned trace appends one controller entry per proposal handed to
    consolidation plus a fixed controller overhead entry.
    """
    found = iss(frame, cfg)
    boxes = rp_update(found.boxes, cfg)
    trace = CycleTrace(list(found.trace.entries))
    if found.boxes:
        trace.append(CONTROLLER_OBJECT, len(found.boxes))
    trace.append(CONTROLLER_FIXED)
    return ProposeResult(boxes, trace, found.boxes, found.iterations, found.projection_cells)


def boxes_to_json(boxes: Sequence[Box]) -> str:
    """Serialize boxes sorted by (y0, x0) as a JSON array of x/y extents."""
    ordered = sorted(boxes, key=_sort_key)
    return json.dumps([b.to_json_obj() for b in ordered], indent=2) + "\n"


def boxes_from_json(text: str) -> list[Box]:
    return [Box.from_json_obj(obj) for obj in json.loads(text)]
