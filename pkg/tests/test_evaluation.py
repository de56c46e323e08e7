import random

import pytest

from seeflow.errors import InputError, InvalidFragmentList, NotOverlapping
from seeflow.evaluation import (
    DEFAULT_IOU_SWEEP,
    DEFAULT_OFFSET_SWEEP,
    FragmentMatch,
    GroundTruthStep,
    LengthStats,
    evaluate,
    fragment_iou,
    gt_from_step,
    match_fragments,
    read_gt_jsonl,
    score,
    sweep,
    time_offset,
    trailer_stats,
    write_gt_jsonl,
)
from seeflow.steps import CodingStep, StepType


# set-based references

def ref_iou(r, g):
    a = set(range(r[0], r[1] + 1))
    b = set(range(g[0], g[1] + 1))
    return len(a & b) / len(a | b)


def ref_offset(r, g):
    return min(abs(x - y) for x in r for y in g)


def ref_match(preds, gts):
    """Exhaustive per-prediction search over every overlapping gt fragment."""
    out = []
    for pi, r in enumerate(preds):
        candidates = [
            (ref_iou(r, g), -j) for j, g in enumerate(gts) if ref_iou(r, g) > 0
        ]
        if candidates:
            iou, neg_j = max(candidates)
            out.append((pi, -neg_j, iou))
    return out


def random_fragments(rng, max_fragments=6, frame_range=50):
    fragments = []
    cursor = rng.randint(0, 4)
    for _ in range(rng.randint(0, max_fragments)):
        start = cursor + rng.randint(0, 5)
        end = start + rng.randint(0, 8)
        if end >= frame_range:
            break
        fragments.append((start, end))
        cursor = end + 1
    return fragments


class TestFragmentIoU:
    def test_identity(self):
        assert fragment_iou((5, 10), (5, 10)) == 1.0

    def test_three_inside_four_is_075(self):
        assert fragment_iou((5, 7), (5, 8)) == 0.75

    def test_partial(self):
        assert fragment_iou((5, 10), (7, 12)) == 0.5

    def test_disjoint(self):
        assert fragment_iou((0, 2), (5, 8)) == 0.0

    def test_symmetry_and_identity_characterization(self):
        rng = random.Random(0)
        for _ in range(500):
            r = tuple(sorted((rng.randint(0, 30), rng.randint(0, 30))))
            g = tuple(sorted((rng.randint(0, 30), rng.randint(0, 30))))
            assert fragment_iou(r, g) == fragment_iou(g, r) == ref_iou(r, g)
            assert (fragment_iou(r, g) == 1.0) == (r == g)

    def test_invalid_interval(self):
        with pytest.raises(InvalidFragmentList):
            fragment_iou((5, 4), (0, 1))


class TestTimeOffset:
    def test_shared_start(self):
        assert time_offset((5, 10), (5, 12)) == 0

    def test_formula(self):
        assert time_offset((5, 10), (7, 12)) == 2
        assert time_offset((7, 9), (6, 10)) == 1

    def test_disjoint_raises(self):
        with pytest.raises(NotOverlapping):
            time_offset((0, 2), (5, 8))

    def test_zero_iff_boundary_coincides(self):
        rng = random.Random(1)
        checked = 0
        while checked < 300:
            r = tuple(sorted((rng.randint(0, 20), rng.randint(0, 20))))
            g = tuple(sorted((rng.randint(0, 20), rng.randint(0, 20))))
            if fragment_iou(r, g) == 0:
                continue
            checked += 1
            offset = time_offset(r, g)
            assert offset == ref_offset(r, g)
            coincides = r[0] in g or r[1] in g
            assert (offset == 0) == coincides


class TestMatchFragments:
    def test_identical_lists(self):
        fragments = [(0, 3), (5, 9), (12, 12)]
        matches = match_fragments(fragments, fragments)
        assert [(m.pred_index, m.gt_index, m.iou, m.time_offset_frames) for m in matches] == [
            (0, 0, 1.0, 0), (1, 1, 1.0, 0), (2, 2, 1.0, 0),
        ]

    def test_over_segmentation_shares_one_gt(self):
        matches = match_fragments([(0, 3), (4, 7)], [(0, 7)])
        assert [(m.pred_index, m.gt_index) for m in matches] == [(0, 0), (1, 0)]
        assert [m.iou for m in matches] == [0.5, 0.5]

    def test_disjoint_lists_have_no_matches(self):
        assert match_fragments([(0, 2)], [(5, 8)]) == []

    def test_highest_iou_wins_ties_to_earliest(self):
        # prediction overlaps both gts equally; earliest index wins
        matches = match_fragments([(4, 5)], [(3, 4), (5, 6)])
        assert [(m.pred_index, m.gt_index) for m in matches] == [(0, 0)]

    def test_invalid_lists_rejected(self):
        with pytest.raises(InvalidFragmentList):
            match_fragments([(0, 5), (3, 8)], [])
        with pytest.raises(InvalidFragmentList):
            match_fragments([(5, 8), (0, 2)], [])
        with pytest.raises(InvalidFragmentList):
            match_fragments([(0, 5)], [(4, 2)])

    def test_types_recorded(self):
        matches = match_fragments(
            [(0, 3)], [(0, 3)],
            [StepType.ENTER_TEXT], [StepType.EDIT_TEXT],
        )
        assert matches[0].type_agrees is False

    def test_matches_reference_on_random_instances(self):
        rng = random.Random(7)
        for _ in range(1000):
            preds = random_fragments(rng)
            gts = random_fragments(rng)
            got = [(m.pred_index, m.gt_index, m.iou) for m in match_fragments(preds, gts)]
            assert got == ref_match(preds, gts)


def _match(pred_index, gt_index, iou, offset, agrees=True, source=""):
    return FragmentMatch(pred_index, gt_index, iou, offset, agrees, source)


class TestScore:
    def test_perfect(self):
        matches = [_match(0, 0, 1.0, 0), _match(1, 1, 1.0, 0)]
        for criterion in [("iou", 0.0), ("iou", 1.0), ("offset", 0)]:
            assert score(matches, 2, 2, criterion) == (1.0, 1.0, 1.0)

    def test_half_precision_full_recall(self):
        matches = [_match(0, 0, 1.0, 0)]
        p, r, f1 = score(matches, 2, 1, ("iou", 1.0))
        assert (p, r) == (0.5, 1.0)
        assert f1 == pytest.approx(2 / 3)

    def test_iou_threshold_is_strict_and_equality_at_one(self):
        matches = [_match(0, 0, 0.75, 1)]
        assert score(matches, 1, 1, ("iou", 0.7))[0] == 1.0
        assert score(matches, 1, 1, ("iou", 0.75))[0] == 0.0
        assert score(matches, 1, 1, ("iou", 1.0))[0] == 0.0

    def test_offset_threshold_is_inclusive(self):
        matches = [_match(0, 0, 0.4, 3)]
        assert score(matches, 1, 1, ("offset", 3))[0] == 1.0
        assert score(matches, 1, 1, ("offset", 2))[0] == 0.0

    def test_type_agreement_required_by_default(self):
        matches = [_match(0, 0, 1.0, 0, agrees=False)]
        assert score(matches, 1, 1, ("iou", 0.0)) == (0.0, 0.0, 0.0)
        assert score(matches, 1, 1, ("iou", 0.0), require_type_agreement=False)[0] == 1.0

    def test_over_segmented_recall_counts_distinct_gt(self):
        matches = [_match(0, 0, 0.5, 0), _match(1, 0, 0.5, 0)]
        p, r, f1 = score(matches, 2, 1, ("iou", 0.3))
        assert (p, r) == (1.0, 1.0)

    def test_empty_inputs(self):
        assert score([], 0, 0, ("iou", 0.0)) == (1.0, 1.0, 1.0)
        assert score([], 0, 3, ("iou", 0.0)) == (0.0, 0.0, 0.0)
        assert score([], 3, 0, ("iou", 0.0)) == (0.0, 0.0, 0.0)

    def test_loosest_iou_equals_unbounded_offset(self):
        rng = random.Random(3)
        matches = [
            _match(i, rng.randint(0, 3), rng.uniform(0.01, 1.0), rng.randint(0, 9),
                   agrees=rng.random() < 0.8)
            for i in range(12)
        ]
        assert score(matches, 15, 10, ("iou", 0.0)) == score(matches, 15, 10, ("offset", 999))


class TestSweep:
    def test_rows_and_labels(self):
        rows = sweep([_match(0, 0, 1.0, 0)], 1, 1)
        labels = [(r.kind, r.label) for r in rows]
        assert labels == [
            ("iou", ">0"), ("iou", ">0.3"), ("iou", ">0.5"), ("iou", ">0.7"),
            ("iou", ">0.9"), ("iou", "=1.0"),
            ("offset", "=0"), ("offset", "<=1"), ("offset", "<=3"),
            ("offset", "<=5"), ("offset", "<=7"), ("offset", "<=9"),
        ]

    def test_monotone_in_threshold(self):
        rng = random.Random(9)
        matches = [
            _match(i, i, rng.uniform(0.01, 1.0), rng.randint(0, 9))
            for i in range(20)
        ]
        rows = sweep(matches, 25, 22)
        iou_f1 = [r.f1 for r in rows if r.kind == "iou"]
        off_f1 = [r.f1 for r in rows if r.kind == "offset"]
        assert all(a >= b for a, b in zip(iou_f1, iou_f1[1:]))
        assert all(a <= b for a, b in zip(off_f1, off_f1[1:]))


class TestTrailerStats:
    def test_identical(self):
        stats = trailer_stats([(0, 9)], [(0, 9)], total_frames=20)
        assert stats.trailer_iou == 1.0
        assert stats.false_positive_fraction == 0.0
        assert stats.false_negative_fraction == 0.0

    def test_spec_example(self):
        stats = trailer_stats([(0, 9)], [(5, 14)], total_frames=100)
        assert stats.extracted_coverage == 0.10
        assert stats.gt_coverage == 0.10
        assert stats.trailer_iou == pytest.approx(5 / 15)
        assert stats.false_positive_fraction == 0.5
        assert stats.false_negative_fraction == 0.5

    def test_length_stats(self):
        stats = trailer_stats([(0, 2), (4, 8)], [(0, 8)], total_frames=10)
        assert stats.extracted_lengths == LengthStats(2, 4.0, 1.0)
        assert stats.gt_lengths.count == 1 and stats.gt_lengths.mean == 9.0

    def test_rejects_bad_totals(self):
        with pytest.raises(InputError):
            trailer_stats([], [], total_frames=0)


def _step(source, start, end, step_type=StepType.ENTER_TEXT, text="x"):
    return CodingStep(source, start, end, float(start), float(end), step_type, text)


class TestEvaluate:
    def test_perfect_run(self):
        steps = [_step("a", 0, 3), _step("a", 6, 9, StepType.EDIT_TEXT)]
        gt = [gt_from_step(s) for s in steps]
        report = evaluate(steps, gt, total_frames=20)
        for row in report.rows:
            assert (row.precision, row.recall, row.f1) == (1.0, 1.0, 1.0)
        assert report.trailer.trailer_iou == 1.0
        assert report.trailer.extracted_coverage == pytest.approx(8 / 20)

    def test_sources_do_not_cross_match(self):
        pred = [_step("a", 0, 3)]
        gt = [gt_from_step(_step("b", 0, 3))]
        report = evaluate(pred, gt)
        assert report.matches == []
        assert report.row("iou", 0.0).f1 == 0.0

    def test_multi_source_pooling(self):
        pred = [_step("a", 0, 3), _step("b", 0, 3)]
        gt = [gt_from_step(_step("a", 0, 3)), gt_from_step(_step("b", 5, 9))]
        report = evaluate(pred, gt, total_frames={"a": 10, "b": 10})
        row = report.row("iou", 1.0)
        assert row.precision == 0.5 and row.recall == 0.5
        assert report.trailer.extracted_coverage == pytest.approx(8 / 20)

    def test_table_layout(self):
        steps = [_step("a", 0, 3)]
        report = evaluate(steps, [gt_from_step(s) for s in steps])
        table = report.format_table()
        lines = table.splitlines()
        assert lines[0].split() == ["IoU", "Prec", "Reca", "F1", "TO", "Prec", "Reca", "F1"]
        assert len(lines) == 1 + max(len(DEFAULT_IOU_SWEEP), len(DEFAULT_OFFSET_SWEEP))
        assert ">0.3" in table and "=1.0" in table and "<=9" in table

    def test_report_json_shape(self):
        steps = [_step("a", 0, 3)]
        report = evaluate(steps, [gt_from_step(s) for s in steps])
        data = report.to_json_dict()
        assert data["counts"] == {"predicted": 1, "ground_truth": 1}
        assert len(data["rows"]) == 12
        assert data["trailer"]["trailer_iou"] == 1.0


class TestGroundTruthIO:
    def test_round_trip_with_provenance(self, tmp_path):
        gt = [
            gt_from_step(_step("cast", 0, 4), provenance="synth"),
            gt_from_step(_step("cast", 6, 8, StepType.SELECT_TEXT), provenance="manual"),
        ]
        path = tmp_path / "gt.jsonl"
        write_gt_jsonl(gt, path)
        back = read_gt_jsonl(path)
        assert back == gt
        assert back[0].provenance == "synth"
        assert isinstance(back[0], GroundTruthStep)
