"""Per-major course-course correlation model.

For each major with enough graduates, grades of its graduates are paired
course-by-course: the Pearson correlation r over the students who took
both courses, scaled by that shared-student count N, gives the
count-scaled correlation C = N * r that weighs an edge. Courses are
ranked by their total C over the other courses; the top k are the core
set. Per-course display statistics (average semester, failure rate,
gender split, grade histogram) ride along.

The scalar `pcc` / `c_value` functions are the reference arithmetic
(compensated sums, one square root of the variance product); the bulk
matrix builder reproduces them through matmuls over a masked grade
matrix with pairwise deletion of missing values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affinity import graduate_course_counts
from .config import PipelineConfig
from .records import GRADE_TOKENS, RecordStore, Timelines

_VAR_CLAMP = 1e-10  # per shared observation; quantized grades give >= 0.045


def pcc(x, y) -> float:
    """Pearson correlation of two paired grade vectors.

    Fewer than two pairs or a zero-variance side yields 0 by convention.
    Computed as Sxy / sqrt(Sxx * Syy) with compensated sums, so identical
    vectors give exactly 1.0 and duplicating every pair is bit-stable.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("paired vectors must have equal length")
    n = len(x)
    if n < 2:
        return 0.0
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = x - mx
    dy = y - my
    sxx = math.fsum(dx * dx)
    syy = math.fsum(dy * dy)
    if sxx <= 0.0 or syy <= 0.0:
        return 0.0
    # collinear inputs can overshoot +/-1 by an ulp; keep r in range
    return min(1.0, max(-1.0, math.fsum(dx * dy) / math.sqrt(sxx * syy)))


def c_value(x, y) -> float:
    """Count-scaled correlation: N * r over the paired observations."""
    x = np.asarray(x, dtype=np.float64)
    return len(x) * pcc(x, np.asarray(y, dtype=np.float64))


@dataclass
class CourseGraph:
    """Pairwise grade-correlation model of one major's courses."""

    major: str
    graduates: int
    course_idx: np.ndarray        # indexes into store.courses, ascending
    course_ids: list[str]
    n: np.ndarray                 # shared-student counts, symmetric int
    r: np.ndarray                 # correlations, symmetric
    c: np.ndarray                 # n * r elementwise, symmetric
    total_c: np.ndarray           # row sums of c excluding the diagonal
    core_rank: np.ndarray         # permutation of 1..n_courses
    avg_semester: np.ndarray
    enrollment: np.ndarray        # graduate takers per course (after collapse)
    failure_rate: np.ndarray
    histogram: np.ndarray         # courses x grade tokens, final grades
    gender: np.ndarray            # courses x (f, m, u) fractions

    @property
    def n_courses(self) -> int:
        return len(self.course_idx)

    def core_set(self, k: int) -> list[str]:
        """Top-k course ids by total C (rank order)."""
        order = np.argsort(self.core_rank)
        return [self.course_ids[i] for i in order[:min(k, self.n_courses)]]


def _symmetrize(m: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one (bit-exact symmetry)."""
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


def _collapse_retakes(store: RecordStore, timelines: Timelines,
                      students: np.ndarray, course_idx: np.ndarray):
    """Final-attempt event per (student, course) for the given graduates.

    Returns local arrays (s_local, c_local, points, token, stage) where
    retakes keep only the chronologically last term's grade.
    """
    in_students = np.zeros(store.n_students, dtype=bool)
    in_students[students] = True
    course_local = np.full(store.n_courses, -1, dtype=np.int64)
    course_local[course_idx] = np.arange(len(course_idx))
    mask = in_students[store.ev_student] & (course_local[store.ev_course] >= 0)
    rows = np.flatnonzero(mask)
    s_local = np.searchsorted(students, store.ev_student[rows])
    c_local = course_local[store.ev_course[rows]]
    key = s_local * len(course_idx) + c_local
    order = np.lexsort((store.ev_term[rows], key))
    key_sorted = key[order]
    is_last = np.empty(len(order), dtype=bool)
    if len(order):
        is_last[:-1] = key_sorted[1:] != key_sorted[:-1]
        is_last[-1] = True
    final = rows[order[is_last]]
    return (s_local[order[is_last]], c_local[order[is_last]],
            store.ev_points[final], store.ev_grade[final],
            timelines.stage[final].astype(np.float64))


def build_course_graph(store: RecordStore, timelines: Timelines, major: str,
                       config: PipelineConfig | None = None) -> CourseGraph | None:
    """Correlation model for one major; None when it has too few graduates."""
    config = config or PipelineConfig()
    m = store.major_index(major)
    order, offsets = store.graduations_by_major()
    students = np.unique(store.grad_student[order[offsets[m]:offsets[m + 1]]])
    if len(students) < config.min_graduates:
        return None

    counts = graduate_course_counts(store)[m]
    course_idx = np.flatnonzero(counts >= config.min_course_students)
    course_ids = [str(store.courses[c]) for c in course_idx]
    nc = len(course_idx)
    ns = len(students)

    s_local, c_local, points, tokens, stages = _collapse_retakes(
        store, timelines, students, course_idx)

    # display statistics over final grades
    enrollment = np.bincount(c_local, minlength=nc)
    fail_tokens = np.array([GRADE_TOKENS.index(t) for t in config.failure_tokens])
    failures = np.bincount(c_local[np.isin(tokens, fail_tokens)], minlength=nc)
    with np.errstate(invalid="ignore", divide="ignore"):
        failure_rate = np.where(enrollment > 0, failures / np.maximum(enrollment, 1), 0.0)
        avg_semester = np.where(enrollment > 0,
                                np.bincount(c_local, weights=stages, minlength=nc)
                                / np.maximum(enrollment, 1), 0.0)
    histogram = np.zeros((nc, len(GRADE_TOKENS)), dtype=np.int64)
    np.add.at(histogram, (c_local, tokens), 1)
    gender_counts = np.zeros((nc, 3), dtype=np.int64)
    np.add.at(gender_counts, (c_local, store.gender[students[s_local]]), 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        gender = np.where(enrollment[:, None] > 0,
                          gender_counts[:, [1, 2, 0]] / np.maximum(enrollment, 1)[:, None],
                          0.0)  # columns: f, m, u

    # pairwise-deleted correlation through masked matmuls
    if nc:
        x = np.full((ns, nc), np.nan)
        x[s_local, c_local] = points
        z = (~np.isnan(x)).astype(np.float64)
        x0 = np.nan_to_num(x)
        n_pair = _symmetrize(z.T @ z)
        sx = x0.T @ z                      # sum of x over shared students
        sxx = (x0 * x0).T @ z
        sxy = _symmetrize(x0.T @ x0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cov = sxy - sx * sx.T / n_pair
            var_x = sxx - sx * sx / n_pair
            var_ok = (var_x > _VAR_CLAMP * n_pair) & (var_x.T > _VAR_CLAMP * n_pair)
            denom = np.sqrt(var_x * var_x.T)
            r = np.where((n_pair >= 2) & var_ok & (denom > 0), cov / denom, 0.0)
        r = np.clip(_symmetrize(r), -1.0, 1.0)
        c = n_pair * r
        total_c = c.sum(axis=1) - np.diag(c)
    else:
        n_pair = np.zeros((0, 0))
        r = np.zeros((0, 0))
        c = np.zeros((0, 0))
        total_c = np.zeros(0)

    # rank 1 = highest total C; ties broken by course id (ascending index)
    by_total = np.lexsort((np.arange(nc), -total_c))
    core_rank = np.empty(nc, dtype=np.int64)
    core_rank[by_total] = np.arange(1, nc + 1)

    return CourseGraph(major=major, graduates=ns, course_idx=course_idx,
                       course_ids=course_ids, n=n_pair.astype(np.int64), r=r, c=c,
                       total_c=total_c, core_rank=core_rank,
                       avg_semester=avg_semester, enrollment=enrollment,
                       failure_rate=failure_rate, histogram=histogram,
                       gender=gender)


def course_stats(store: RecordStore, timelines: Timelines, major: str,
                 course: str, config: PipelineConfig | None = None) -> dict:
    """Display statistics for one course within one major's graph."""
    config = config or PipelineConfig()
    graph = build_course_graph(store, timelines, major, config)
    if graph is None:
        raise KeyError(f"major {major} is not modeled (too few graduates)")
    if course not in graph.course_ids:
        raise KeyError(f"course {course} not in {major}'s graph")
    i = graph.course_ids.index(course)
    return {
        "course": course,
        "enrollment": int(graph.enrollment[i]),
        "failure_rate": float(graph.failure_rate[i]),
        "avg_semester": float(graph.avg_semester[i]),
        "gender": {"f": float(graph.gender[i, 0]),
                   "m": float(graph.gender[i, 1]),
                   "u": float(graph.gender[i, 2])},
        "histogram": {GRADE_TOKENS[t]: int(graph.histogram[i, t])
                      for t in range(len(GRADE_TOKENS))
                      if graph.histogram[i, t] > 0},
    }


def build_all_course_graphs(store: RecordStore, timelines: Timelines,
                            config: PipelineConfig | None = None
                            ) -> tuple[dict[str, CourseGraph], list[str]]:
    """Graphs for every major with enough graduates, plus a skip report."""
    config = config or PipelineConfig()
    graphs: dict[str, CourseGraph] = {}
    skipped: list[str] = []
    counts = store.graduate_counts()
    for m, code in enumerate(store.major_codes):
        code = str(code)
        if counts[m] == 0:
            skipped.append(f"{code}: no graduates")
            continue
        graph = build_course_graph(store, timelines, code, config)
        if graph is None:
            order, offsets = store.graduations_by_major()
            ns = len(np.unique(store.grad_student[order[offsets[m]:offsets[m + 1]]]))
            skipped.append(f"{code}: {ns} graduates < min_graduates {config.min_graduates}")
        else:
            graphs[code] = graph
    return graphs, skipped
