"""Behavioral simulator for a diffuse-then-project in-memory vision pipeline.

The package models an event-camera front end whose binary frames are
restored by resistor-capacitor diffusion inside the pixel array, then
searched for objects by iterative row/column projection, with a cycle
model tracking what the array and its controller would spend.
"""

from .diffusion import (
    DiffusionConfig,
    ProbeResult,
    apply_pulses,
    blank_frame_detect,
    diffuse_substep,
    probe_diffusion_speed,
    restore_image,
    threshold_restore,
)
from .errors import (
    ConfigError,
    CramSimError,
    EventRangeError,
    FrameFormatError,
    GuardError,
    InputError,
)
from .grid import (
    AnalogState,
    BinaryFrame,
    Event,
    embed,
    frame_from_events,
    load_analog,
    load_events_bin,
    load_events_csv,
    load_frame,
    save_analog,
    save_events_bin,
    save_events_csv,
    save_frame,
)
from .oracle import (
    EvalPipeline,
    EvalReport,
    FrameSample,
    MatchResult,
    ccl,
    evaluate,
    evaluate_sweep,
    iou,
    match_boxes,
)
from .projection import (
    Box,
    IssResult,
    ProjectionConfig,
    ProposeResult,
    RpConfig,
    boxes_from_json,
    boxes_to_json,
    iss,
    line_voltage,
    project,
    region_propose,
    rp_update,
)
from .synth import Scene, SynthConfig, generate_corpus, generate_scene
from .timing import (
    CostTable,
    CycleTrace,
    OpCounts,
    PipelineRun,
    minimal_cycles_imc,
    minimal_cycles_total,
    op_count,
    trace_cycles,
)

__version__ = "0.1.0"

__all__ = [
    "AnalogState",
    "BinaryFrame",
    "Box",
    "ConfigError",
    "CostTable",
    "CramSimError",
    "CycleTrace",
    "DiffusionConfig",
    "EvalPipeline",
    "EvalReport",
    "Event",
    "EventRangeError",
    "FrameFormatError",
    "FrameSample",
    "GuardError",
    "InputError",
    "IssResult",
    "MatchResult",
    "OpCounts",
    "PipelineRun",
    "ProbeResult",
    "ProjectionConfig",
    "ProposeResult",
    "RpConfig",
    "Scene",
    "SynthConfig",
    "apply_pulses",
    "blank_frame_detect",
    "boxes_from_json",
    "boxes_to_json",
    "ccl",
    "diffuse_substep",
    "embed",
    "evaluate",
    "evaluate_sweep",
    "frame_from_events",
    "generate_corpus",
    "generate_scene",
    "iou",
    "iss",
    "line_voltage",
    "load_analog",
    "load_events_bin",
    "load_events_csv",
    "load_frame",
    "match_boxes",
    "minimal_cycles_imc",
    "minimal_cycles_total",
    "op_count",
    "probe_diffusion_speed",
    "project",
    "region_propose",
    "restore_image",
    "rp_update",
    "save_analog",
    "save_events_bin",
    "save_events_csv",
    "save_frame",
    "threshold_restore",
    "trace_cycles",
]
