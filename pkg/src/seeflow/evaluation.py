"""Scoring of extracted coding steps against ground truth.

Fragments are inclusive frame intervals. Matching walks the predictions in
order and pairs each with the best-overlapping ground-truth fragment at or
after the previous match, so a long ground-truth step may absorb several
consecutive predictions (over-segmentation). A match counts as correct
under an IoU or time-offset criterion, with step-type agreement required
by default, and precision/recall/F1 are swept over threshold grids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import InputError, InvalidFragmentList, NotOverlapping
from .steps import CodingStep, StepType, step_from_record, step_to_record

Interval = tuple[int, int]

DEFAULT_IOU_SWEEP: tuple[float, ...] = (0.0, 0.3, 0.5, 0.7, 0.9, 1.0)
DEFAULT_OFFSET_SWEEP: tuple[int, ...] = (0, 1, 3, 5, 7, 9)


@dataclass(frozen=True)
class GroundTruthStep(CodingStep):
    """A labeled step; provenance marks manual labels vs synthesizer output."""

    provenance: str = "manual"


def gt_from_step(step: CodingStep, provenance: str = "synth") -> GroundTruthStep:
    return GroundTruthStep(
        source_id=step.source_id,
        start_frame=step.start_frame,
        end_frame=step.end_frame,
        start_time_s=step.start_time_s,
        end_time_s=step.end_time_s,
        step_type=step.step_type,
        text=step.text,
        provenance=provenance,
    )


def write_gt_jsonl(steps: Sequence[GroundTruthStep], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for step in steps:
            record = step_to_record(step)
            record["provenance"] = step.provenance
            fh.write(json.dumps(record) + "\n")


def read_gt_jsonl(path: str | Path) -> list[GroundTruthStep]:
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read ground-truth file {path}: {exc}") from exc
    steps = []
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        base = step_from_record(record)
        steps.append(gt_from_step(base, provenance=str(record.get("provenance", "manual"))))
    return steps


def fragment_iou(r: Interval, gt: Interval) -> float:
    """Intersection over union of two inclusive frame intervals."""
    _check_interval(r)
    _check_interval(gt)
    inter = min(r[1], gt[1]) - max(r[0], gt[0]) + 1
    if inter <= 0:
        return 0.0
    union = (r[1] - r[0] + 1) + (gt[1] - gt[0] + 1) - inter
    return inter / union


def time_offset(r: Interval, gt: Interval) -> int:
    """Least boundary-to-boundary frame distance of an overlapping pair."""
    if fragment_iou(r, gt) == 0.0:
        raise NotOverlapping(f"fragments {r} and {gt} do not overlap")
    return min(
        abs(r[0] - gt[0]),
        abs(r[1] - gt[0]),
        abs(r[0] - gt[1]),
        abs(r[1] - gt[1]),
    )


def _check_interval(interval: Interval) -> None:
    if interval[1] < interval[0]:
        raise InvalidFragmentList(f"interval {interval} has end before start")


def _check_fragment_list(fragments: Sequence[Interval], name: str) -> None:
    for frag in fragments:
        _check_interval(frag)
    for prev, nxt in zip(fragments, fragments[1:]):
        if nxt[0] <= prev[1]:
            raise InvalidFragmentList(
                f"{name} fragments {prev} and {nxt} overlap or are unordered"
            )


@dataclass(frozen=True)
class FragmentMatch:
    pred_index: int
    gt_index: int
    iou: float
    time_offset_frames: int
    type_agrees: bool
    source_id: str = ""


def match_fragments(
    predicted: Sequence[Interval],
    ground_truth: Sequence[Interval],
    predicted_types: Sequence[StepType] | None = None,
    ground_truth_types: Sequence[StepType] | None = None,
    source_id: str = "",
) -> list[FragmentMatch]:
    """Order-preserving greedy matching of predictions to ground truth.

    For each prediction in order, among the ground-truth fragments at or
    after the previous match that overlap it, the one with the highest IoU
    wins (ties to the earliest). Several predictions may land on one
    ground-truth fragment; predictions overlapping nothing stay unmatched.
    """
    _check_fragment_list(predicted, "predicted")
    _check_fragment_list(ground_truth, "ground-truth")
    matches: list[FragmentMatch] = []
    lo = 0
    for pi, pred in enumerate(predicted):
        while lo < len(ground_truth) and ground_truth[lo][1] < pred[0]:
            lo += 1
        best_j = -1
        best_iou = 0.0
        for j in range(lo, len(ground_truth)):
            gt = ground_truth[j]
            if gt[0] > pred[1]:
                break
            iou = fragment_iou(pred, gt)
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_j < 0:
            continue
        agrees = True
        if predicted_types is not None and ground_truth_types is not None:
            agrees = predicted_types[pi] == ground_truth_types[best_j]
        matches.append(
            FragmentMatch(
                pred_index=pi,
                gt_index=best_j,
                iou=best_iou,
                time_offset_frames=time_offset(pred, ground_truth[best_j]),
                type_agrees=agrees,
                source_id=source_id,
            )
        )
        lo = best_j
    return matches


def score(
    matches: Sequence[FragmentMatch],
    n_predicted: int,
    n_ground_truth: int,
    criterion: tuple[str, float],
    require_type_agreement: bool = True,
) -> tuple[float, float, float]:
    """Precision, recall and F1 under one threshold criterion.

    ``criterion`` is ("iou", tau) counting matches with IoU > tau (exact
    equality for tau = 1.0), or ("offset", tau) counting matches with time
    offset <= tau. Recall counts distinct ground-truth fragments so that
    over-segmented matches are not double-counted.
    """
    kind, tau = criterion
    correct = []
    for m in matches:
        if require_type_agreement and not m.type_agrees:
            continue
        if kind == "iou":
            ok = m.iou == 1.0 if tau >= 1.0 else m.iou > tau
        elif kind == "offset":
            ok = m.time_offset_frames <= tau
        else:
            raise ValueError(f"unknown criterion kind {kind!r}")
        if ok:
            correct.append(m)
    n_correct = len(correct)
    n_gt_hit = len({(m.source_id, m.gt_index) for m in correct})
    precision = n_correct / n_predicted if n_predicted else (1.0 if not n_ground_truth else 0.0)
    recall = n_gt_hit / n_ground_truth if n_ground_truth else (1.0 if not n_predicted else 0.0)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class SweepRow:
    kind: str
    threshold: float
    label: str
    precision: float
    recall: float
    f1: float


def threshold_label(kind: str, tau: float) -> str:
    if kind == "iou":
        if tau >= 1.0:
            return "=1.0"
        return ">0" if tau == 0 else f">{tau:g}"
    return "=0" if tau == 0 else f"<={int(tau)}"


def sweep(
    matches: Sequence[FragmentMatch],
    n_predicted: int,
    n_ground_truth: int,
    iou_thresholds: Sequence[float] = DEFAULT_IOU_SWEEP,
    offset_thresholds: Sequence[int] = DEFAULT_OFFSET_SWEEP,
    require_type_agreement: bool = True,
) -> list[SweepRow]:
    rows = []
    for kind, taus in (("iou", iou_thresholds), ("offset", offset_thresholds)):
        for tau in taus:
            p, r, f1 = score(
                matches, n_predicted, n_ground_truth, (kind, tau),
                require_type_agreement=require_type_agreement,
            )
            rows.append(SweepRow(kind, float(tau), threshold_label(kind, tau), p, r, f1))
    return rows


@dataclass(frozen=True)
class LengthStats:
    count: int
    mean: float
    std: float

    @staticmethod
    def of(lengths: Sequence[int]) -> "LengthStats":
        n = len(lengths)
        if n == 0:
            return LengthStats(0, 0.0, 0.0)
        mean = sum(lengths) / n
        var = sum((x - mean) ** 2 for x in lengths) / n
        return LengthStats(n, mean, math.sqrt(var))


@dataclass(frozen=True)
class TrailerStats:
    """Frame-level agreement between extracted and ground-truth trailers."""

    extracted_coverage: float
    gt_coverage: float
    trailer_iou: float
    false_positive_fraction: float  # extracted frames not in ground truth
    false_negative_fraction: float  # ground-truth frames not extracted
    extracted_lengths: LengthStats
    gt_lengths: LengthStats


def trailer_stats(
    steps: Sequence[Interval],
    gt: Sequence[Interval],
    total_frames: int,
) -> TrailerStats:
    """Coverage and frame-set agreement statistics for one screencast."""
    _check_fragment_list(steps, "predicted")
    _check_fragment_list(gt, "ground-truth")
    if total_frames <= 0:
        raise InputError("total_frames must be positive")
    step_frames = _frames_of(steps)
    gt_frames = _frames_of(gt)
    inter = len(step_frames & gt_frames)
    union = len(step_frames | gt_frames)
    return TrailerStats(
        extracted_coverage=len(step_frames) / total_frames,
        gt_coverage=len(gt_frames) / total_frames,
        trailer_iou=inter / union if union else 1.0,
        false_positive_fraction=(
            len(step_frames - gt_frames) / len(step_frames) if step_frames else 0.0
        ),
        false_negative_fraction=(
            len(gt_frames - step_frames) / len(gt_frames) if gt_frames else 0.0
        ),
        extracted_lengths=LengthStats.of([e - s + 1 for s, e in steps]),
        gt_lengths=LengthStats.of([e - s + 1 for s, e in gt]),
    )


def _frames_of(fragments: Sequence[Interval]) -> set[int]:
    frames: set[int] = set()
    for s, e in fragments:
        frames.update(range(s, e + 1))
    return frames


@dataclass
class EvaluationReport:
    rows: list[SweepRow]
    matches: list[FragmentMatch]
    n_predicted: int
    n_ground_truth: int
    trailer: TrailerStats | None = None
    require_type_agreement: bool = True

    def row(self, kind: str, tau: float) -> SweepRow:
        for row in self.rows:
            if row.kind == kind and row.threshold == float(tau):
                return row
        raise KeyError(f"no sweep row ({kind}, {tau})")

    def to_json_dict(self) -> dict:
        out: dict = {
            "counts": {"predicted": self.n_predicted, "ground_truth": self.n_ground_truth},
            "require_type_agreement": self.require_type_agreement,
            "rows": [
                {
                    "kind": r.kind,
                    "threshold": r.threshold,
                    "label": r.label,
                    "precision": r.precision,
                    "recall": r.recall,
                    "f1": r.f1,
                }
                for r in self.rows
            ],
            "matches": [
                {
                    "source_id": m.source_id,
                    "pred_index": m.pred_index,
                    "gt_index": m.gt_index,
                    "iou": m.iou,
                    "time_offset_frames": m.time_offset_frames,
                    "type_agrees": m.type_agrees,
                }
                for m in self.matches
            ],
        }
        if self.trailer is not None:
            t = self.trailer
            out["trailer"] = {
                "extracted_coverage": t.extracted_coverage,
                "gt_coverage": t.gt_coverage,
                "trailer_iou": t.trailer_iou,
                "false_positive_fraction": t.false_positive_fraction,
                "false_negative_fraction": t.false_negative_fraction,
                "extracted_lengths": vars(t.extracted_lengths),
                "gt_lengths": vars(t.gt_lengths),
            }
        return out

    def format_table(self) -> str:
        """Aligned text table with side-by-side IoU and time-offset columns."""
        iou_rows = [r for r in self.rows if r.kind == "iou"]
        off_rows = [r for r in self.rows if r.kind == "offset"]
        header = f"{'IoU':<8}{'Prec':>7}{'Reca':>7}{'F1':>7}    {'TO':<6}{'Prec':>7}{'Reca':>7}{'F1':>7}"
        lines = [header]
        for k in range(max(len(iou_rows), len(off_rows))):
            left = right = ""
            if k < len(iou_rows):
                r = iou_rows[k]
                left = f"{r.label:<8}{r.precision:>7.3f}{r.recall:>7.3f}{r.f1:>7.3f}"
            else:
                left = " " * 29
            if k < len(off_rows):
                r = off_rows[k]
                right = f"{r.label:<6}{r.precision:>7.3f}{r.recall:>7.3f}{r.f1:>7.3f}"
            lines.append(f"{left}    {right}".rstrip())
        return "\n".join(lines)


def evaluate(
    predicted: Sequence[CodingStep],
    ground_truth: Sequence[CodingStep],
    iou_thresholds: Sequence[float] = DEFAULT_IOU_SWEEP,
    offset_thresholds: Sequence[int] = DEFAULT_OFFSET_SWEEP,
    require_type_agreement: bool = True,
    total_frames: Mapping[str, int] | int | None = None,
) -> EvaluationReport:
    """Match and score step lists, grouped per screencast and pooled.

    ``total_frames`` feeds the trailer coverage denominators: a mapping per
    source id, one integer for single-source inputs, or None to fall back
    to the last referenced frame + 1 per source.
    """
    sources = sorted(
        {s.source_id for s in predicted} | {s.source_id for s in ground_truth}
    )
    all_matches: list[FragmentMatch] = []
    fp_frames = 0
    fn_frames = 0
    inter_frames = 0
    union_frames = 0
    pred_frame_count = 0
    gt_frame_count = 0
    total = 0
    for source in sources:
        pred = [s for s in predicted if s.source_id == source]
        gt = [s for s in ground_truth if s.source_id == source]
        pred_iv = [s.frame_interval for s in pred]
        gt_iv = [s.frame_interval for s in gt]
        all_matches.extend(
            match_fragments(
                pred_iv,
                gt_iv,
                [s.step_type for s in pred],
                [s.step_type for s in gt],
                source_id=source,
            )
        )
        if isinstance(total_frames, Mapping):
            source_total = total_frames.get(source)
        elif isinstance(total_frames, int):
            source_total = total_frames if len(sources) == 1 else None
        else:
            source_total = None
        if source_total is None:
            last = max([e for _, e in pred_iv + gt_iv], default=-1)
            source_total = last + 1
        pred_frames = _frames_of(pred_iv)
        gt_frames = _frames_of(gt_iv)
        fp_frames += len(pred_frames - gt_frames)
        fn_frames += len(gt_frames - pred_frames)
        inter_frames += len(pred_frames & gt_frames)
        union_frames += len(pred_frames | gt_frames)
        pred_frame_count += len(pred_frames)
        gt_frame_count += len(gt_frames)
        total += source_total

    trailer = TrailerStats(
        extracted_coverage=pred_frame_count / total if total else 0.0,
        gt_coverage=gt_frame_count / total if total else 0.0,
        trailer_iou=inter_frames / union_frames if union_frames else 1.0,
        false_positive_fraction=fp_frames / pred_frame_count if pred_frame_count else 0.0,
        false_negative_fraction=fn_frames / gt_frame_count if gt_frame_count else 0.0,
        extracted_lengths=LengthStats.of(
            [s.end_frame - s.start_frame + 1 for s in predicted]
        ),
        gt_lengths=LengthStats.of([s.end_frame - s.start_frame + 1 for s in ground_truth]),
    )
    rows = sweep(
        all_matches,
        len(predicted),
        len(ground_truth),
        iou_thresholds,
        offset_thresholds,
        require_type_agreement,
    )
    return EvaluationReport(
        rows=rows,
        matches=all_matches,
        n_predicted=len(predicted),
        n_ground_truth=len(ground_truth),
        trailer=trailer,
        require_type_agreement=require_type_agreement,
    )
