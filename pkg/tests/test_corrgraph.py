"""Correlation scalars and the per-major course graph.

Frozen scalar cases were derived by hand: grades (4,3,2) against (4,2,3)
have deviations (1,0,-1) and (1,-1,0), so Sxy = 1, Sxx = Syy = 2 and
r = 1/2 exactly in binary arithmetic.
"""

import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campusflow.config import PipelineConfig
from campusflow.corrgraph import (build_all_course_graphs, build_course_graph,
                                  c_value, course_stats, pcc)
from campusflow.records import GRADE_TOKENS, build_timelines

CFG = PipelineConfig(min_enrollment=1, min_graduates=2, min_course_students=1)


class TestPcc:
    def test_half_exact(self):
        assert pcc([4.0, 3.0, 2.0], [4.0, 2.0, 3.0]) == 0.5

    def test_identical_vectors_exactly_one(self):
        for v in ([4.0, 3.0, 2.0], [1.3, 2.7, 3.3, 0.0], [2.0, 4.0]):
            assert pcc(v, v) == 1.0

    def test_opposite_order_exactly_minus_one(self):
        assert pcc([4.0, 3.0, 2.0], [0.0, 1.0, 2.0]) == -1.0

    def test_short_and_degenerate_inputs(self):
        assert pcc([], []) == 0.0
        assert pcc([3.0], [2.0]) == 0.0
        assert pcc([2.0, 2.0, 2.0], [4.0, 3.0, 0.0]) == 0.0
        assert pcc([4.0, 3.0, 0.0], [2.0, 2.0, 2.0]) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            pcc([1.0, 2.0], [1.0])

    def test_duplicating_pairs_is_bit_stable(self):
        x = [4.0, 3.7, 2.0, 1.3, 0.0]
        y = [3.3, 4.0, 2.7, 1.0, 2.0]
        assert pcc(x + x, y + y) == pcc(x, y)

    grade_values = st.sampled_from(
        [0.0, 1.0, 1.3, 1.7, 2.0, 2.3, 2.7, 3.0, 3.3, 3.7, 4.0])

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.tuples(grade_values, grade_values),
                    min_size=2, max_size=40))
    def test_matches_stdlib_reference(self, pairs):
        x = [p[0] for p in pairs]
        y = [p[1] for p in pairs]
        ours = pcc(x, y)
        try:
            ref = statistics.correlation(x, y)
        except statistics.StatisticsError:
            # constant input: stdlib raises, ours returns 0
            assert ours == 0.0
            return
        assert abs(ours - ref) < 1e-12
        assert -1.0 <= ours <= 1.0


class TestCValue:
    def test_scales_by_count(self):
        assert c_value([4.0, 3.0, 2.0], [4.0, 2.0, 3.0]) == 1.5

    def test_duplicating_pairs_doubles_c(self):
        x = [4.0, 3.0, 2.0, 1.0]
        y = [3.0, 4.0, 1.0, 2.0]
        assert c_value(x + x, y + y) == 2.0 * c_value(x, y)


def tiny_major_world(csv_world):
    """Four graduates of MAA over three courses with hand-set grades.

    CA and CB were designed to correlate positively, CC runs against CA.
    One student retook CA; only the later B grade (3.0) may count.
    """
    grades = [
        ("s1", "2018-FA", "CA", "A"), ("s1", "2018-FA", "CB", "A"),
        ("s1", "2019-SP", "CC", "C"),
        ("s2", "2018-FA", "CA", "F"), ("s2", "2019-SP", "CA", "B"),
        ("s2", "2018-FA", "CB", "B"), ("s2", "2019-SP", "CC", "B+"),
        ("s3", "2018-FA", "CA", "C"), ("s3", "2018-FA", "CB", "C+"),
        ("s3", "2019-SP", "CC", "A"),
        ("s4", "2018-FA", "CA", "B+"), ("s4", "2018-FA", "CB", "B-"),
        ("s4", "2019-SP", "CC", "W"),
    ]
    graduations = [(s, "2021-SP", "MAA") for s in ("s1", "s2", "s3", "s4")]
    students = [("s1", "F"), ("s2", "F"), ("s3", "M"), ("s4", "U")]
    store, _ = csv_world(grades, graduations, [("MAA", "Alpha")],
                         students=students, config=CFG)
    return store


class TestBuildCourseGraph:
    def test_matches_scalar_reference(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        assert graph.course_ids == ["CA", "CB", "CC"]
        # final grades after retake collapse
        ca = [4.0, 3.0, 2.0, 3.3]
        cb = [4.0, 3.0, 2.3, 2.7]
        # W carries no points, so CC pairs only students s1..s3
        cc = [2.0, 3.3, 4.0]
        expect = {
            (0, 1): pcc(ca, cb),
            (0, 2): pcc(ca[:3], cc),
            (1, 2): pcc(cb[:3], cc),
        }
        for (i, j), want in expect.items():
            assert graph.r[i, j] == pytest.approx(want, abs=1e-12)
            assert graph.r[j, i] == graph.r[i, j]
        assert graph.n[0, 1] == 4
        assert graph.n[0, 2] == 3
        assert graph.n[0, 0] == 4

    def test_c_is_count_times_r(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        assert np.array_equal(graph.c, graph.n * graph.r)

    def test_total_c_excludes_diagonal(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        for i in range(graph.n_courses):
            off = math.fsum(graph.c[i, j] for j in range(graph.n_courses)
                            if j != i)
            assert graph.total_c[i] == pytest.approx(off, abs=1e-12)

    def test_core_rank_orders_by_total_c(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        assert sorted(graph.core_rank) == [1, 2, 3]
        by_rank = np.argsort(graph.core_rank)
        totals = graph.total_c[by_rank]
        assert all(totals[i] >= totals[i + 1] for i in range(len(totals) - 1))
        assert graph.core_set(2) == [graph.course_ids[i] for i in by_rank[:2]]
        assert graph.core_set(99) == [graph.course_ids[i] for i in by_rank]

    def test_rank_ties_break_by_course_order(self, csv_world):
        # two exclusive courses never co-taken: both have total C = 0
        grades = [("s1", "2018-FA", "CA", "A"), ("s2", "2018-FA", "CB", "B")]
        graduations = [("s1", "2020-SP", "M0"), ("s2", "2020-SP", "M0")]
        store, _ = csv_world(grades, graduations, [("M0", "Zed")], config=CFG)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "M0", CFG)
        assert list(graph.core_rank) == [1, 2]

    def test_retake_keeps_last_attempt(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        i = graph.course_ids.index("CA")
        assert graph.enrollment[i] == 4
        f_idx = GRADE_TOKENS.index("F")
        assert graph.histogram[i, f_idx] == 0
        assert graph.histogram[i, GRADE_TOKENS.index("B")] == 1

    def test_failure_rate_counts_f_and_w(self, csv_world):
        grades = [("s1", "2018-FA", "CA", "A"), ("s2", "2018-FA", "CA", "F"),
                  ("s3", "2018-FA", "CA", "W"), ("s4", "2018-FA", "CA", "B")]
        graduations = [(s, "2020-SP", "M0") for s in ("s1", "s2", "s3", "s4")]
        store, _ = csv_world(grades, graduations, [("M0", "Zed")], config=CFG)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "M0", CFG)
        assert graph.failure_rate[0] == 0.5

    def test_histogram_covers_final_grades(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        i = graph.course_ids.index("CC")
        assert graph.histogram[i].sum() == 4  # includes the W row
        assert graph.histogram[i, GRADE_TOKENS.index("W")] == 1

    def test_gender_fractions(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        i = graph.course_ids.index("CA")
        # s1,s2 female; s3 male; s4 unknown
        assert graph.gender[i].tolist() == [0.5, 0.25, 0.25]

    def test_avg_semester(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "MAA", CFG)
        # CA's final attempts: stage 1 for s1,s3,s4 and stage 2 for s2
        i = graph.course_ids.index("CA")
        assert graph.avg_semester[i] == pytest.approx(1.25)
        j = graph.course_ids.index("CC")
        assert graph.avg_semester[j] == pytest.approx(2.0)

    def test_below_min_graduates_returns_none(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        strict = PipelineConfig(min_enrollment=1, min_graduates=5)
        assert build_course_graph(store, tl, "MAA", strict) is None

    def test_min_course_students_filters_thin_courses(self, csv_world):
        grades = [(f"s{i}", "2018-FA", "CA", "B") for i in range(5)]
        grades += [(f"s{i}", "2018-FA", "CB", "A") for i in range(3)]
        graduations = [(f"s{i}", "2020-SP", "M0") for i in range(5)]
        store, _ = csv_world(grades, graduations, [("M0", "Zed")], config=CFG)
        tl = build_timelines(store, CFG)
        picky = PipelineConfig(min_enrollment=1, min_graduates=2,
                               min_course_students=4)
        graph = build_course_graph(store, tl, "M0", picky)
        assert graph.course_ids == ["CA"]

    def test_constant_grades_give_zero_r(self, csv_world):
        grades = []
        for i in range(4):
            grades.append((f"s{i}", "2018-FA", "CA", "B"))
            grades.append((f"s{i}", "2018-FA", "CB", "A" if i % 2 else "C"))
        graduations = [(f"s{i}", "2020-SP", "M0") for i in range(4)]
        store, _ = csv_world(grades, graduations, [("M0", "Zed")], config=CFG)
        tl = build_timelines(store, CFG)
        graph = build_course_graph(store, tl, "M0", CFG)
        i = graph.course_ids.index("CA")
        j = graph.course_ids.index("CB")
        assert graph.r[i, j] == 0.0
        assert graph.c[i, j] == 0.0

    def test_bulk_matches_scalar_on_generated_world(self, demo_world):
        store = demo_world["store"]
        tl = demo_world["timelines"]
        cfg = PipelineConfig()
        graph = build_course_graph(store, tl, "M000", cfg)
        assert graph is not None
        rng = np.random.default_rng(0)
        pts = {}
        order, offsets = store.graduations_by_major()
        m = store.major_index("M000")
        grads = np.unique(store.grad_student[order[offsets[m]:offsets[m + 1]]])
        grad_set = set(grads.tolist())
        per_course: dict[int, dict[int, float]] = {}
        for e in range(store.n_events):
            s = int(store.ev_student[e])
            if s not in grad_set or math.isnan(store.ev_points[e]):
                continue
            c = int(store.ev_course[e])
            per_course.setdefault(c, {})[s] = float(store.ev_points[e])
        pairs = rng.choice(graph.n_courses, size=(25, 2))
        for i, j in pairs:
            ci = int(graph.course_idx[i])
            cj = int(graph.course_idx[j])
            a, b = per_course.get(ci, {}), per_course.get(cj, {})
            shared = sorted(set(a) & set(b))
            x = [a[s] for s in shared]
            y = [b[s] for s in shared]
            assert graph.n[i, j] == len(shared)
            want = pcc(x, y) if i != j else 1.0 if len(shared) >= 2 else 0.0
            assert graph.r[i, j] == pytest.approx(want, abs=1e-12)


class TestCourseStats:
    def test_shape(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        stats = course_stats(store, tl, "MAA", "CA", CFG)
        assert stats["enrollment"] == 4
        assert stats["gender"] == {"f": 0.5, "m": 0.25, "u": 0.25}
        assert stats["histogram"] == {"A": 1, "B+": 1, "B": 1, "C": 1}

    def test_unknown_course_raises(self, csv_world):
        store = tiny_major_world(csv_world)
        tl = build_timelines(store, CFG)
        with pytest.raises(KeyError, match="CX"):
            course_stats(store, tl, "MAA", "CX", CFG)


class TestBuildAll:
    def test_skip_report(self, csv_world):
        grades = [("s1", "2018-FA", "CA", "A"), ("s2", "2018-FA", "CA", "B")]
        graduations = [("s1", "2020-SP", "MBIG"), ("s2", "2020-SP", "MBIG")]
        majors = [("MBIG", "Big"), ("MTINY", "Tiny"), ("MNONE", "None")]
        store, _ = csv_world(grades + [("t1", "2018-FA", "CA", "B")],
                             graduations + [("t1", "2020-SP", "MTINY")],
                             majors, config=CFG)
        tl = build_timelines(store, CFG)
        graphs, skipped = build_all_course_graphs(store, tl, CFG)
        assert set(graphs) == {"MBIG"}
        assert any(s.startswith("MTINY: 1 graduates") for s in skipped)
        assert "MNONE: no graduates" in skipped
