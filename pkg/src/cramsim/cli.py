"""cram-sim command-line front end.

Five subcommands cover the pipeline end to end:

  synth    write a synthetic corpus (PBM frames + ground-truth boxes)
  restore  diffuse-and-threshold input frames, flag blank results
  propose  run region proposal on input frames, report cycle counts
  eval     score proposals against ground truth over a corpus
  probe    measure diffusion step counts at center and corner

All commands accept ``--config FILE`` plus ``--section.key value``
overrides for any known configuration key, and write their outputs
under ``--out`` (default: current directory).  Files are written via a
temp-and-rename so an interrupted run never leaves partial output.
Worker-thread count comes from the CRAM_SIM_THREADS environment
variable; unset or 0 means one worker per CPU.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

from .config import RunConfig, known_keys, load_config
from .diffusion import apply_pulses, blank_frame_detect, probe_diffusion_speed, restore_image
from .errors import CramSimError, InputError
from .grid import analog_to_bytes, frame_to_bytes, load_frame
from .oracle import FrameSample, evaluate, evaluate_sweep
from .projection import boxes_from_json, boxes_to_json, region_propose
from .timing import (
    FULL_AXIS_PROJECTION,
    REGION_PROJECTION,
    CycleTrace,
    PipelineRun,
    op_count,
    trace_cycles,
)


def worker_count() -> int:
    """Resolve CRAM_SIM_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get("CRAM_SIM_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise CramSimError(f"CRAM_SIM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise CramSimError("CRAM_SIM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(path: str, text: str) -> None:
    _write_bytes(path, text.encode("utf-8"))


def _ensure_out(out: str) -> str:
    os.makedirs(out, exist_ok=True)
    return out


def _collect_pbm_inputs(paths: list[str]) -> list[str]:
    """Expand files and directories into a sorted list of PBM paths."""
    found: list[str] = []
    for p in paths:
        if os.path.isdir(p):
            names = sorted(n for n in os.listdir(p) if n.endswith(".pbm"))
            if not names:
                raise InputError(f"no .pbm files in directory {p}")
            found.extend(os.path.join(p, n) for n in names)
        elif os.path.isfile(p):
            found.append(p)
        else:
            raise InputError(f"input not found: {p}")
    if not found:
        raise InputError("no input frames given")
    return found


def _stem(path: str) -> str:
    name = os.path.basename(path)
    if name.endswith(".pbm"):
        name = name[: -len(".pbm")]
    return name


def _map_frames(func, items: list, workers: int) -> list:
    """Apply func over items, in order, optionally on a thread pool."""
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


# ---------------------------------------------------------------- synth


def cmd_synth(cfg: RunConfig, out: str) -> int:
    from .synth import generate_corpus

    scenes = generate_corpus(cfg.synth_config(), cfg.synth_frames)
    for i, scene in enumerate(scenes):
        base = os.path.join(out, f"frame_{i:05d}")
        _write_bytes(base + ".pbm", frame_to_bytes(scene.frame))
        _write_text(base + ".gt.json", boxes_to_json(scene.gt))
    print(f"wrote {len(scenes)} frames to {out}")
    return 0


# -------------------------------------------------------------- restore


def cmd_restore(cfg: RunConfig, inputs: list[str], out: str, emit_analog: bool) -> int:
    paths = _collect_pbm_inputs(inputs)
    dcfg = cfg.diffusion_config()

    def one(path: str) -> tuple[str, bool]:
        frame = load_frame(path)
        restored = restore_image(frame, dcfg, ring=cfg.ring)
        stem = _stem(path)
        _write_bytes(os.path.join(out, stem + ".restored.pbm"), frame_to_bytes(restored))
        if emit_analog:
            state = apply_pulses(frame, dcfg, ring=cfg.ring)
            _write_bytes(os.path.join(out, stem + ".analog.pgm"), analog_to_bytes(state))
        return stem, blank_frame_detect(restored, max_ones=cfg.blank_max_ones)

    rows = _map_frames(one, paths, worker_count())
    lines = ["frame,blank"]
    lines += [f"{stem},{'true' if blank else 'false'}" for stem, blank in rows]
    _write_text(os.path.join(out, "blank.csv"), "\n".join(lines) + "\n")
    print(f"restored {len(rows)} frames to {out}")
    return 0


# -------------------------------------------------------------- propose


def cmd_propose(cfg: RunConfig, inputs: list[str], out: str) -> int:
    paths = _collect_pbm_inputs(inputs)
    dcfg = cfg.diffusion_config()
    rp = cfg.rp_config()

    def one(path: str) -> tuple[str, str]:
        frame = load_frame(path)
        if cfg.propose_restore:
            frame = restore_image(frame, dcfg, ring=cfg.ring)
        res = region_propose(frame, rp)
        imc_entries = [e for e in res.trace.entries
                       if e[0] in (FULL_AXIS_PROJECTION, REGION_PROJECTION)]
        imc = trace_cycles(CycleTrace(imc_entries))
        total = trace_cycles(res.trace)
        run = PipelineRun(
            pulses=dcfg.pulses if cfg.propose_restore else 0,
            substeps_per_pulse=dcfg.substeps_per_pulse,
            cells=(frame.height + 2 * cfg.ring) * (frame.width + 2 * cfg.ring),
            projection_cells=list(res.projection_cells),
        )
        ops = op_count(run)
        stem = _stem(path)
        _write_text(os.path.join(out, stem + ".boxes.json"), boxes_to_json(res.boxes))
        row = (f"{stem},{len(res.boxes)},{imc},{total},"
               f"{ops.diffusion_ops},{ops.projection_ops}")
        return stem, row

    rows = _map_frames(one, paths, worker_count())
    lines = ["frame_id,n_objects,imc_cycles,total_cycles,diffusion_ops,projection_ops"]
    lines += [row for _, row in rows]
    _write_text(os.path.join(out, "cycles.csv"), "\n".join(lines) + "\n")
    print(f"proposed regions for {len(rows)} frames to {out}")
    return 0


# ----------------------------------------------------------------- eval


def _load_corpus(corpus: str) -> list[FrameSample]:
    if not os.path.isdir(corpus):
        raise InputError(f"corpus directory not found: {corpus}")
    names = sorted(n for n in os.listdir(corpus)
                   if n.endswith(".pbm") and not n.endswith(".restored.pbm"))
    if not names:
        raise InputError(f"no .pbm frames in {corpus}")
    samples = []
    for name in names:
        stem = name[: -len(".pbm")]
        gt_path = os.path.join(corpus, stem + ".gt.json")
        if not os.path.isfile(gt_path):
            raise InputError(f"missing ground truth for {name}: {gt_path}")
        with open(gt_path, "r", encoding="utf-8") as fh:
            gt = boxes_from_json(fh.read())
        samples.append(FrameSample(frame=load_frame(os.path.join(corpus, name)), gt=gt))
    return samples


def _report_rows(setting_id: str, reports) -> list[str]:
    rows = []
    for r in reports:
        rows.append(
            f"{r.iou_threshold:g},{r.tp},{r.fp},{r.fn},"
            f"{r.precision:.6f},{r.recall:.6f},{r.f1:.6f},"
            f"{setting_id},{r.weighted_f1:.6f}"
        )
    return rows


def cmd_eval(cfg: RunConfig, corpus: str, out: str) -> int:
    samples = _load_corpus(corpus)
    pipeline = cfg.eval_pipeline()
    workers = worker_count()
    lines = ["iou,tp,fp,fn,precision,recall,f1,setting_id,weighted_f1"]
    if cfg.sweep_amplitudes and cfg.sweep_substeps:
        results = evaluate_sweep(
            samples, pipeline, cfg.sweep_amplitudes, cfg.sweep_substeps,
            cfg.iou_thresholds, workers=workers,
        )
        for setting_id, reports in results:
            lines += _report_rows(setting_id, reports)
    else:
        reports = evaluate(samples, pipeline, cfg.iou_thresholds, workers=workers)
        lines += _report_rows("default", reports)
    _write_text(os.path.join(out, "report.csv"), "\n".join(lines) + "\n")
    print(f"evaluated {len(samples)} frames; report in {out}/report.csv")
    return 0


# ---------------------------------------------------------------- probe


def cmd_probe(cfg: RunConfig, out: str) -> int:
    dcfg = cfg.diffusion_config()
    lines = ["location,steps"]
    for location in ("center", "corner"):
        res = probe_diffusion_speed(
            cfg.frame_width, cfg.frame_height, location, dcfg, ring=cfg.ring,
        )
        lines.append(f"{res.location},{res.steps_to_threshold}")
    _write_text(os.path.join(out, "probe.csv"), "\n".join(lines) + "\n")
    print(f"probe results in {out}/probe.csv")
    return 0


# ----------------------------------------------------------- dispatcher


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cram-sim",
        description="Behavioral simulator for a diffuse-then-project vision pipeline.",
        epilog="Any configuration key may be overridden as --key value; "
               "see cram-sim keys for the list.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="path to a key=value config file")
        p.add_argument("--out", default=".", help="output directory (created if missing)")

    common(sub.add_parser("synth", help="generate a synthetic corpus"))

    p_restore = sub.add_parser("restore", help="denoise frames by diffuse-and-threshold")
    common(p_restore)
    p_restore.add_argument("inputs", nargs="+", help="PBM files or directories")
    p_restore.add_argument("--emit-analog", action="store_true",
                           help="also write pre-threshold voltages as PGM")

    p_propose = sub.add_parser("propose", help="run region proposal on frames")
    common(p_propose)
    p_propose.add_argument("inputs", nargs="+", help="PBM files or directories")

    p_eval = sub.add_parser("eval", help="score proposals against ground truth")
    common(p_eval)
    p_eval.add_argument("corpus", help="directory of frame_*.pbm plus *.gt.json")

    common(sub.add_parser("probe", help="measure diffusion steps to threshold"))

    sub.add_parser("keys", help="list recognized configuration keys")
    return parser


def _split_overrides(extra: list[str]) -> list[tuple[str, str]]:
    """Turn leftover ``--key value`` tokens into override pairs."""
    pairs = []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok:
            raise CramSimError(f"unrecognized argument: {tok}")
        key = tok[2:]
        if "=" in key:
            key, _, value = key.partition("=")
        else:
            i += 1
            if i >= len(extra):
                raise CramSimError(f"missing value for override --{key}")
            value = extra[i]
        pairs.append((key, value))
        i += 1
    return pairs


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        if args.command == "keys":
            for key in known_keys():
                print(key)
            return 0
        overrides = _split_overrides(extra)
        cfg = load_config(args.config, overrides)
        out = _ensure_out(args.out)
        if args.command == "synth":
            return cmd_synth(cfg, out)
        if args.command == "restore":
            return cmd_restore(cfg, args.inputs, out, args.emit_analog)
        if args.command == "propose":
            return cmd_propose(cfg, args.inputs, out)
        if args.command == "eval":
            return cmd_eval(cfg, args.corpus, out)
        if args.command == "probe":
            return cmd_probe(cfg, out)
        raise CramSimError(f"unknown command {args.command!r}")
    except CramSimError as exc:
        print(f"cram-sim: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"cram-sim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
