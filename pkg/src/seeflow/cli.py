"""Command-line interface: synth | extract | evaluate | report.

Configuration precedence: built-in defaults, then the config file (flat
``key = value`` lines, pointed at by --config or the SEEFLOW_CONFIG
environment variable), then explicit flags.

Exit codes: 0 success, 2 usage error, 3 input error, 4 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import InputError, SeeflowError
from .evaluation import (
    EvaluationReport,
    SweepRow,
    evaluate,
    read_gt_jsonl,
)
from .pipeline import PipelineConfig, config_from_file, extract_steps
from .steps import read_steps_jsonl, write_steps_jsonl
from .synth import (
    DEFAULT_STEP_MIX,
    RandomScriptParams,
    generate_random_script,
    read_script,
    render_session,
)

CONFIG_ENV_VAR = "SEEFLOW_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INVARIANT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seeflow",
        description="Extract line-granularity coding steps from screencast frame sequences.",
    )
    parser.add_argument("--config", help="config file (key = value lines); "
                        f"defaults to ${CONFIG_ENV_VAR} when set")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario directory")
    p_synth.add_argument("--script", help="session script JSON; omit for a random script")
    p_synth.add_argument("--events", type=int, default=60, help="random script event count")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--canvas", default="256x192", help="canvas WxH in pixels")
    p_synth.add_argument("--mix", help="step-type mix, e.g. enter=0.365,delete=0.005,edit=0.209,select=0.421")
    p_synth.add_argument("--idle-rate", type=float, default=0.10)
    p_synth.add_argument("--scroll-rate", type=float, default=0.06)
    p_synth.add_argument("--popup-rate", type=float, default=0.0)
    p_synth.add_argument("--switch-rate", type=float, default=0.0)
    p_synth.add_argument("--noise", type=int, default=0, help="per-pixel jitter amplitude")
    p_synth.add_argument("--source-id", help="defaults to the output directory name")
    p_synth.add_argument("--out", required=True, help="scenario output directory")

    p_extract = sub.add_parser("extract", help="extract coding steps from frame directories")
    p_extract.add_argument("frames_dir", nargs="+", help="directories of frame_NNNNNN.png files")
    p_extract.add_argument("--out", help="steps.jsonl path (single input) or output directory")
    p_extract.add_argument("--fps", type=float)
    p_extract.add_argument("--diff-tolerance", type=int)
    p_extract.add_argument("--vo-threshold", type=float)
    p_extract.add_argument("--line-match-threshold", type=float)
    p_extract.add_argument("--action-backend", choices=("oracle", "heuristic", "sidecar"))
    p_extract.add_argument("--text-backend", choices=("oracle", "raster", "sidecar"))
    p_extract.add_argument("--actions-sidecar", help="explicit actions.jsonl path")
    p_extract.add_argument("--text-sidecar", help="explicit text.jsonl path")
    p_extract.add_argument("--popup-bridge", action="store_true", default=None,
                           help="re-match the active line across pop-up transitions")
    p_extract.add_argument("--jobs", type=int, default=1,
                           help="parallel workers for multiple directories")

    p_eval = sub.add_parser("evaluate", help="score extracted steps against ground truth")
    p_eval.add_argument("--pred", required=True, help="extracted steps.jsonl")
    p_eval.add_argument("--gt", required=True, help="ground-truth gt.jsonl")
    p_eval.add_argument("--out", help="report.json output path")
    p_eval.add_argument("--iou-sweep", help="comma-separated IoU thresholds")
    p_eval.add_argument("--offset-sweep", help="comma-separated offset thresholds")
    p_eval.add_argument("--total-frames", type=int,
                        help="frame count for trailer coverage (single source)")
    p_eval.add_argument("--no-type-check", action="store_true",
                        help="count matches regardless of step type")
    p_eval.add_argument("--quiet", action="store_true", help="suppress the table")

    p_report = sub.add_parser("report", help="print the threshold table of a report.json")
    p_report.add_argument("report", help="report.json produced by evaluate")
    return parser


def _base_config(args) -> PipelineConfig:
    config = PipelineConfig()
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if path:
        config = config_from_file(path, config)
    return config


def _merged_config(args) -> PipelineConfig:
    config = _base_config(args)
    overrides = {}
    for key in ("fps", "diff_tolerance", "vo_threshold", "line_match_threshold",
                "action_backend", "text_backend", "popup_bridge"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "iou_sweep", None):
        overrides["iou_sweep"] = tuple(float(v) for v in args.iou_sweep.split(","))
    if getattr(args, "offset_sweep", None):
        overrides["offset_sweep"] = tuple(int(v) for v in args.offset_sweep.split(","))
    config = replace(config, **overrides)
    config.validate()
    return config


def _parse_mix(text: str) -> dict[str, float]:
    mix = dict(DEFAULT_STEP_MIX)
    for part in text.split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        try:
            mix[key.strip()] = float(value)
        except ValueError as exc:
            raise InputError(f"bad mix entry {part!r}: {exc}") from exc
    return mix


def _parse_canvas(text: str) -> tuple[int, int]:
    try:
        w, _, h = text.lower().partition("x")
        return int(w), int(h)
    except ValueError as exc:
        raise InputError(f"bad canvas spec {text!r}: {exc}") from exc


def cmd_synth(args) -> int:
    if args.script:
        script = read_script(args.script)
    else:
        canvas_w, canvas_h = _parse_canvas(args.canvas)
        params = RandomScriptParams(
            n_events=args.events,
            canvas_w=canvas_w,
            canvas_h=canvas_h,
            step_mix=_parse_mix(args.mix) if args.mix else dict(DEFAULT_STEP_MIX),
            idle_rate=args.idle_rate,
            scroll_rate=args.scroll_rate,
            popup_rate=args.popup_rate,
            switch_rate=args.switch_rate,
        )
        script = generate_random_script(params, seed=args.seed)
    result = render_session(
        script,
        args.out,
        source_id=args.source_id,
        seed=args.seed,
        noise_amplitude=args.noise,
    )
    print(
        f"wrote {len(result.frames)} frames, {len(result.ground_truth)} ground-truth "
        f"steps to {result.out_dir}"
    )
    return EXIT_OK


def _extract_one(frames_dir: str, out_path: str, config: PipelineConfig,
                 actions_sidecar: str | None, text_sidecar: str | None) -> tuple[str, int]:
    result = extract_steps(frames_dir, config, actions_sidecar, text_sidecar)
    write_steps_jsonl(result.steps, out_path)
    return out_path, len(result.steps)


def cmd_extract(args) -> int:
    config = _merged_config(args)
    dirs = [Path(d) for d in args.frames_dir]
    for d in dirs:
        if not d.is_dir():
            raise InputError(f"not a directory: {d}")
    if len(dirs) == 1:
        out = Path(args.out) if args.out else dirs[0] / "steps.jsonl"
        targets = [(str(dirs[0]), str(out))]
    else:
        out_dir = Path(args.out) if args.out else Path.cwd()
        out_dir.mkdir(parents=True, exist_ok=True)
        targets = [(str(d), str(out_dir / f"{d.name}.steps.jsonl")) for d in dirs]

    jobs = max(1, args.jobs)
    if jobs == 1 or len(targets) == 1:
        results = [
            _extract_one(src, dst, config, args.actions_sidecar, args.text_sidecar)
            for src, dst in targets
        ]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_extract_one, src, dst, config,
                            args.actions_sidecar, args.text_sidecar)
                for src, dst in targets
            ]
            results = [f.result() for f in futures]
    for path, count in results:
        print(f"wrote {count} steps to {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _merged_config(args)
    predicted = read_steps_jsonl(args.pred)
    ground_truth = read_gt_jsonl(args.gt)
    report = evaluate(
        predicted,
        ground_truth,
        iou_thresholds=config.iou_sweep,
        offset_thresholds=config.offset_sweep,
        require_type_agreement=not args.no_type_check,
        total_frames=args.total_frames,
    )
    if args.out:
        Path(args.out).write_text(
            json.dumps(report.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    if not args.quiet:
        print(report.format_table())
        if report.trailer is not None:
            t = report.trailer
            print(
                f"\ntrailer: coverage {t.extracted_coverage:.3f}/{t.gt_coverage:.3f} "
                f"iou {t.trailer_iou:.3f} fp {t.false_positive_fraction:.3f} "
                f"fn {t.false_negative_fraction:.3f}"
            )
            e, g = t.extracted_lengths, t.gt_lengths
            print(
                f"lengths: extracted {e.mean:.2f} +/- {e.std:.2f} (n={e.count}), "
                f"ground truth {g.mean:.2f} +/- {g.std:.2f} (n={g.count})"
            )
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.report).read_text(encoding="utf-8"))
        rows = [
            SweepRow(
                kind=r["kind"],
                threshold=float(r["threshold"]),
                label=r["label"],
                precision=float(r["precision"]),
                recall=float(r["recall"]),
                f1=float(r["f1"]),
            )
            for r in data["rows"]
        ]
        counts = data.get("counts", {})
    except (OSError, KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read report {args.report}: {exc}") from exc
    report = EvaluationReport(
        rows=rows,
        matches=[],
        n_predicted=int(counts.get("predicted", 0)),
        n_ground_truth=int(counts.get("ground_truth", 0)),
    )
    print(report.format_table())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "synth": cmd_synth,
        "extract": cmd_extract,
        "evaluate": cmd_evaluate,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SeeflowError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
