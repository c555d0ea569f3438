"""Major-course affinity values and per-stage major similarity matrices.

The affinity of a major to a course set sums, over the courses, the
major's distinct-graduate count divided by the Euclidean norm of all
majors' counts for that course, normalized by the major's graduate
population. Courses shared broadly across majors are down-weighted by
the norm; exclusive courses contribute at full strength.

Two evaluation paths exist on purpose. The scalar path (`m_value`,
`pairwise_similarity`) uses compensated summation and is the reference
for the exact algebraic properties (symmetry, doubling, down-weighting).
The matrix path (`similarity_matrix`) batches the same arithmetic through
BLAS for whole-stage computation; it agrees with the scalar path to
float precision and preserves exact symmetry by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .config import PipelineConfig
from .records import RecordStore, StageCourseSets, build_stage_course_sets, build_timelines


class UndefinedMajorError(ValueError):
    """Affinity requested for a major with no graduates."""


@dataclass(frozen=True)
class MajorAffinity:
    """Affinity of one major to one course set."""

    major: str
    value: float
    courses_evaluated: int
    empty_course_set: bool = False


@dataclass
class StageSimilarity:
    """Symmetric pairwise-similarity matrix for one semester stage."""

    stage: int
    majors: list[str]
    values: np.ndarray
    warnings: list[str]

    def to_json_dict(self) -> dict:
        return {"stage": self.stage, "majors": list(self.majors),
                "values": [[float(v) for v in row] for row in self.values]}


def _concat_ranges(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenate arange(start, start+length) for each pair, vectorized."""
    keep = lengths > 0
    starts, lengths = starts[keep], lengths[keep]
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    out = np.ones(total, dtype=np.int64)
    ends = np.cumsum(lengths)
    out[0] = starts[0]
    out[ends[:-1]] = starts[1:] - (starts[:-1] + lengths[:-1] - 1)
    return np.cumsum(out)


def graduate_course_counts(store: RecordStore) -> np.ndarray:
    """Dense majors x courses matrix of distinct-graduate enrollment counts.

    Entry (m, c) counts graduates of major m who took course c in at
    least one term. A student graduating in two majors contributes to
    both rows. Cached on the store.
    """
    if "grad_course_counts" not in store._cache:
        pair_course, offsets = store.distinct_enrollments()
        per_student = np.diff(offsets)
        reps = per_student[store.grad_student]
        major_rep = np.repeat(store.grad_major.astype(np.int64), reps)
        idx = _concat_ranges(offsets[store.grad_student], reps)
        flat = major_rep * store.n_courses + pair_course[idx]
        counts = np.bincount(flat, minlength=store.n_majors * store.n_courses)
        G = counts.reshape(store.n_majors, store.n_courses).astype(np.float64)
        G.setflags(write=False)
        store._cache["grad_course_counts"] = G
    return store._cache["grad_course_counts"]


def course_norms(store: RecordStore) -> np.ndarray:
    """Euclidean norm over majors of each course's graduate-count vector."""
    if "course_norms" not in store._cache:
        G = graduate_course_counts(store)
        norms = np.sqrt(np.einsum("mc,mc->c", G, G))
        norms.setflags(write=False)
        store._cache["course_norms"] = norms
    return store._cache["course_norms"]


def _m_value_indexed(store: RecordStore, major_idx: int,
                     course_idx: np.ndarray) -> float:
    """Affinity over course indexes; compensated sum, one final divide."""
    grads = store.graduate_counts()
    if grads[major_idx] == 0:
        raise UndefinedMajorError(
            f"major {store.major_codes[major_idx]} has no graduates")
    if len(course_idx) == 0:
        return 0.0
    norms = course_norms(store)[course_idx]
    if np.any(norms == 0.0):
        bad = store.courses[course_idx[np.argmax(norms == 0.0)]]
        raise ValueError(f"course {bad} has no graduate enrollments (zero norm)")
    terms = graduate_course_counts(store)[major_idx, course_idx] / norms
    return math.fsum(terms) / int(grads[major_idx])


def m_value(store: RecordStore, major: str,
            course_set: Iterable[str]) -> MajorAffinity:
    """Affinity of one major to an explicit course set.

    Requires the major to have graduates and every course in the set to
    have at least one graduate enrollment somewhere. An empty set yields
    value 0 with the warning flag raised.
    """
    m = store.major_index(major)
    courses = sorted(set(course_set))
    if not courses:
        grads = store.graduate_counts()
        if grads[m] == 0:
            raise UndefinedMajorError(f"major {major} has no graduates")
        return MajorAffinity(major, 0.0, 0, empty_course_set=True)
    idx = np.array([store.course_index(c) for c in courses], dtype=np.int64)
    return MajorAffinity(major, _m_value_indexed(store, m, idx), len(courses))


def taken_course_subset(store: RecordStore, major_idx: int,
                        course_idx: np.ndarray) -> np.ndarray:
    """Courses from the given set taken by at least one graduate of the major."""
    G = graduate_course_counts(store)
    return course_idx[G[major_idx, course_idx] > 0]


def pairwise_similarity(store: RecordStore, a: str, b: str, stage: int,
                        stage_sets: StageCourseSets | None = None,
                        config: PipelineConfig | None = None) -> float:
    """Similarity of two majors at one stage.

    Each major's affinity is evaluated on the stage's course set
    restricted to courses the other major's graduates actually took; the
    two values are averaged, which makes the result exactly symmetric.
    """
    config = config or PipelineConfig()
    if stage_sets is None:
        stage_sets = build_stage_course_sets(store, build_timelines(store, config), config)
    stage_courses = stage_sets.sets[stage - 1]
    ia, ib = store.major_index(a), store.major_index(b)
    grads = store.graduate_counts()
    for idx, code in ((ia, a), (ib, b)):
        if grads[idx] == 0:
            raise UndefinedMajorError(f"major {code} has no graduates")
    set_b = taken_course_subset(store, ib, stage_courses)
    set_a = taken_course_subset(store, ia, stage_courses)
    m_a = _m_value_indexed(store, ia, set_b)
    m_b = _m_value_indexed(store, ib, set_a)
    return (m_a + m_b) / 2.0


def similarity_matrix(store: RecordStore, stage_course_idx: np.ndarray,
                      major_idx: np.ndarray) -> np.ndarray:
    """Symmetric similarity matrix over the given majors for one course set.

    Vectorized equivalent of calling `pairwise_similarity` on every pair:
    row-normalized counts against taken-indicator columns, averaged with
    the transpose. Every listed major must have graduates.
    """
    grads = store.graduate_counts()[major_idx].astype(np.float64)
    if np.any(grads == 0):
        bad = store.major_codes[major_idx[np.argmax(grads == 0)]]
        raise UndefinedMajorError(f"major {bad} has no graduates")
    n = len(major_idx)
    norms = course_norms(store)[stage_course_idx]
    usable = stage_course_idx[norms > 0]
    if len(usable) == 0:
        return np.zeros((n, n))
    G = graduate_course_counts(store)[np.ix_(major_idx, usable)]
    W = G / course_norms(store)[usable]
    T = (G > 0).astype(np.float64)
    P = (W @ T.T) / grads[:, None]
    return (P + P.T) / 2.0


def stage_similarity(store: RecordStore, stage_sets: StageCourseSets, stage: int,
                     major_idx: np.ndarray | None = None) -> StageSimilarity:
    """Full similarity matrix for one stage over majors with graduates."""
    if major_idx is None:
        major_idx = np.flatnonzero(store.graduate_counts() > 0)
    warnings = []
    stage_courses = stage_sets.sets[stage - 1]
    if len(stage_courses) == 0:
        warnings.append(f"stage {stage}: empty course set, similarity all zero")
    values = similarity_matrix(store, stage_courses, major_idx)
    majors = [str(store.major_codes[i]) for i in major_idx]
    if len(stage_courses):
        G = graduate_course_counts(store)[np.ix_(major_idx, stage_courses)]
        for row in np.flatnonzero(~(G > 0).any(axis=1)):
            warnings.append(f"stage {stage}: major {majors[row]} took no stage courses")
    return StageSimilarity(stage=stage, majors=majors, values=values,
                           warnings=warnings)
