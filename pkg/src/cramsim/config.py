"""Run configuration: a flat key-file format plus command-line overrides.

A config file holds one ``section.key = value`` pair per line.  Blank
lines and lines starting with ``#`` are skipped.  The same dotted keys
can be passed on the command line as ``--section.key value``; overrides
are applied after the file is read.  Unknown keys are rejected rather
than ignored so that typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .diffusion import DiffusionConfig
from .errors import ConfigError
from .oracle import EvalPipeline
from .projection import ProjectionConfig, RpConfig
from .synth import SynthConfig


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> list[float]:
    stripped = text.strip()
    if not stripped:
        return []
    return [float(tok) for tok in stripped.split(",")]


def _parse_int_list(text: str) -> list[int]:
    stripped = text.strip()
    if not stripped:
        return []
    return [int(tok) for tok in stripped.split(",")]


@dataclass
class RunConfig:
    """Everything a pipeline run needs, with workable defaults.

    Field defaults describe the full-size 320x240 sensor; the synth
    object sizes are scaled to cover roughly 5% of that frame.  Smaller
    experiments override frame geometry and sizes together.
    """

    frame_width: int = 320
    frame_height: int = 240
    ring: int = 1
    blank_max_ones: int = 0
    alpha: float = 0.2
    substeps_per_pulse: int = 8
    amplitude: float = 1.0
    pulses: int = 1
    vth: float = 0.5
    redigitize_between_pulses: bool = True
    dac_code: int = 7
    line_charge_constant: float = 0.7
    size_min: int = 4
    slot_r: int = 4
    slot_c: int = 4
    max_iters: int = 16
    size_metric: str = "area"
    pipeline_restore: bool = True
    pipeline_consolidate: bool = True
    propose_restore: bool = False
    iou_thresholds: list[float] = field(default_factory=lambda: [0.3, 0.5, 0.7])
    sweep_amplitudes: list[float] = field(default_factory=list)
    sweep_substeps: list[int] = field(default_factory=list)
    synth_frames: int = 16
    objects_min: int = 1
    objects_max: int = 4
    side_min: int = 24
    side_max: int = 48
    band_min: int = 4
    noise_density: float = 0.0
    fragment_gap: int = 0
    seed: int = 0

    def diffusion_config(self) -> DiffusionConfig:
        return DiffusionConfig(
            alpha=self.alpha,
            substeps_per_pulse=self.substeps_per_pulse,
            amplitude=self.amplitude,
            pulses=self.pulses,
            vth=self.vth,
            redigitize_between_pulses=self.redigitize_between_pulses,
        )

    def projection_config(self) -> ProjectionConfig:
        return ProjectionConfig(
            dac_code=self.dac_code,
            line_charge_constant=self.line_charge_constant,
        )

    def rp_config(self) -> RpConfig:
        return RpConfig(
            size_min=self.size_min,
            slot_r=self.slot_r,
            slot_c=self.slot_c,
            max_iters=self.max_iters,
            size_metric=self.size_metric,
            projection=self.projection_config(),
        )

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            width=self.frame_width,
            height=self.frame_height,
            objects_min=self.objects_min,
            objects_max=self.objects_max,
            side_min=self.side_min,
            side_max=self.side_max,
            band_min=self.band_min,
            noise_density=self.noise_density,
            fragment_gap=self.fragment_gap,
            seed=self.seed,
        )

    def eval_pipeline(self) -> EvalPipeline:
        return EvalPipeline(
            diffusion=self.diffusion_config(),
            rp=self.rp_config(),
            ring=self.ring,
            restore=self.pipeline_restore,
            consolidate=self.pipeline_consolidate,
        )


_KEYS = {
    "frame.width": ("frame_width", int),
    "frame.height": ("frame_height", int),
    "frame.ring": ("ring", int),
    "blank.max_ones": ("blank_max_ones", int),
    "diffusion.alpha": ("alpha", float),
    "diffusion.substeps_per_pulse": ("substeps_per_pulse", int),
    "diffusion.amplitude": ("amplitude", float),
    "diffusion.pulses": ("pulses", int),
    "diffusion.vth": ("vth", float),
    "diffusion.redigitize_between_pulses": ("redigitize_between_pulses", _parse_bool),
    "projection.dac_code": ("dac_code", int),
    "projection.line_charge_constant": ("line_charge_constant", float),
    "rp.size_min": ("size_min", int),
    "rp.slot_r": ("slot_r", int),
    "rp.slot_c": ("slot_c", int),
    "rp.max_iters": ("max_iters", int),
    "rp.size_metric": ("size_metric", str),
    "pipeline.restore": ("pipeline_restore", _parse_bool),
    "pipeline.consolidate": ("pipeline_consolidate", _parse_bool),
    "propose.restore": ("propose_restore", _parse_bool),
    "eval.iou_thresholds": ("iou_thresholds", _parse_float_list),
    "eval.sweep_amplitudes": ("sweep_amplitudes", _parse_float_list),
    "eval.sweep_substeps": ("sweep_substeps", _parse_int_list),
    "synth.frames": ("synth_frames", int),
    "synth.objects_min": ("objects_min", int),
    "synth.objects_max": ("objects_max", int),
    "synth.side_min": ("side_min", int),
    "synth.side_max": ("side_max", int),
    "synth.band_min": ("band_min", int),
    "synth.noise_density": ("noise_density", float),
    "synth.fragment_gap": ("fragment_gap", int),
    "synth.seed": ("seed", int),
}

_FIELD_NAMES = {f.name for f in fields(RunConfig)}
assert all(attr in _FIELD_NAMES for attr, _ in _KEYS.values())


def set_key(cfg: RunConfig, key: str, value: str) -> None:
    """Assign one dotted key on ``cfg``, converting the string value."""
    try:
        attr, conv = _KEYS[key]
    except KeyError:
        raise ConfigError(f"unknown configuration key: {key!r}") from None
    try:
        setattr(cfg, attr, conv(value))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def parse_config_text(text: str, cfg: RunConfig | None = None, source: str = "<config>") -> RunConfig:
    cfg = cfg if cfg is not None else RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        set_key(cfg, key.strip(), value.strip())
    return cfg


def load_config(path: str | None, overrides: list[tuple[str, str]] | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus ``(key, value)`` overrides."""
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        parse_config_text(text, cfg, source=path)
    for key, value in overrides or []:
        set_key(cfg, key, value)
    return cfg


def known_keys() -> list[str]:
    return sorted(_KEYS)
