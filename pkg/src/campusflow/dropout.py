"""Withdrawn-student intent inference and per-major dropout statistics.

Each withdrawn student with enough courses on record is attributed to the
modeled major whose core courses they covered most completely; ties fall
back to the share of the student's courses inside the candidate major's
curriculum, then to lexicographic major code. Per-major aggregates (the
estimated dropout count and the average curriculum overlap, which doubles
as the display confidence) feed the hierarchy leaves and the report CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .affinity import graduate_course_counts
from .config import PipelineConfig
from .hierarchy import MajorHierarchy
from .records import RecordStore, Status, Timelines


@dataclass(frozen=True)
class DropoutAttribution:
    student: str
    major: str | None             # None = unattributed (too few courses)
    core_coverage: float
    overlap_ratio: float
    courses_taken: int


@dataclass
class MajorDropoutStats:
    major: str
    major_name: str
    graduates: int
    dropouts: int
    average_overlap: float | None  # None when no students were attributed

    @property
    def confidence(self) -> float | None:
        return self.average_overlap


def curriculum_set(store: RecordStore, major: str,
                   config: PipelineConfig | None = None) -> set[str]:
    """Courses taken by at least the configured fraction of the major's graduates."""
    config = config or PipelineConfig()
    m = store.major_index(major)
    counts = store.graduate_counts()
    if counts[m] == 0:
        raise ValueError(f"major {major} has no graduates")
    row = graduate_course_counts(store)[m]
    idx = np.flatnonzero(row >= config.curriculum_min_frac * counts[m])
    return {str(store.courses[c]) for c in idx}


def infer_intended_major(student: str, taken: set[str],
                         curricula: dict[str, set[str]],
                         core_sets: dict[str, set[str]],
                         config: PipelineConfig | None = None) -> DropoutAttribution:
    """Attribute one withdrawn student to a candidate major.

    Primary score: fraction of the candidate's core courses the student
    took. Tie-break: fraction of the student's courses inside the
    candidate's curriculum; final tie-break: lexicographic major code.
    Students with fewer courses than the attribution floor stay
    unattributed.
    """
    config = config or PipelineConfig()
    if len(taken) < config.min_courses_for_attribution or not core_sets:
        return DropoutAttribution(student, None, 0.0, 0.0, len(taken))
    best: tuple[float, float, str] | None = None
    for major in sorted(core_sets):
        core = core_sets[major]
        coverage = len(taken & core) / len(core) if core else 0.0
        overlap = len(taken & curricula.get(major, set())) / len(taken)
        key = (coverage, overlap)
        if best is None or key > (best[0], best[1]):
            best = (coverage, overlap, major)
    return DropoutAttribution(student, best[2], best[0], best[1], len(taken))


def attribute_all(store: RecordStore, timelines: Timelines,
                  core_sets: dict[str, set[str]],
                  config: PipelineConfig | None = None) -> list[DropoutAttribution]:
    """Vectorized attribution of every withdrawn student.

    Equivalent to calling `infer_intended_major` per student; candidate
    majors are those with a core set (modeled majors).
    """
    config = config or PipelineConfig()
    withdrawn = np.flatnonzero(timelines.status == Status.WITHDRAWN)
    if len(withdrawn) == 0:
        return []
    majors = sorted(core_sets)
    if not majors:
        pair_course, offsets = store.distinct_enrollments()
        return [DropoutAttribution(str(store.students[s]), None, 0.0, 0.0,
                                   int(offsets[s + 1] - offsets[s]))
                for s in withdrawn]

    pair_course, offsets = store.distinct_enrollments()
    taken_counts = (offsets[1:] - offsets[:-1])[withdrawn]

    # incidence matrices: students x courses, majors x courses
    nc = store.n_courses
    b = np.zeros((len(withdrawn), nc))
    for pos, s in enumerate(withdrawn):
        b[pos, pair_course[offsets[s]:offsets[s + 1]]] = 1.0

    course_index = {str(c): i for i, c in enumerate(store.courses)}
    k = np.zeros((len(majors), nc))
    core_sizes = np.zeros(len(majors))
    for j, major in enumerate(majors):
        idx = [course_index[c] for c in core_sets[major] if c in course_index]
        k[j, idx] = 1.0
        core_sizes[j] = max(len(core_sets[major]), 1)

    counts = store.graduate_counts()
    g = graduate_course_counts(store)
    q = np.zeros((len(majors), nc))
    for j, major in enumerate(majors):
        m = store.major_index(major)
        q[j] = g[m] >= config.curriculum_min_frac * counts[m]

    coverage = (b @ k.T) / core_sizes[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        overlap = (b @ q.T) / np.maximum(taken_counts, 1)[:, None]

    best_cov = coverage.max(axis=1, keepdims=True)
    tied = coverage == best_cov
    overlap_tied = np.where(tied, overlap, -1.0)
    best_ov = overlap_tied.max(axis=1, keepdims=True)
    winner = np.argmax(tied & (overlap_tied == best_ov), axis=1)

    out = []
    eligible = taken_counts >= config.min_courses_for_attribution
    for pos, s in enumerate(withdrawn):
        student = str(store.students[s])
        if not eligible[pos]:
            out.append(DropoutAttribution(student, None, 0.0, 0.0,
                                          int(taken_counts[pos])))
            continue
        j = int(winner[pos])
        out.append(DropoutAttribution(student, majors[j],
                                      float(coverage[pos, j]),
                                      float(overlap[pos, j]),
                                      int(taken_counts[pos])))
    return out


def aggregate_dropouts(attributions: list[DropoutAttribution],
                       store: RecordStore) -> dict[str, MajorDropoutStats]:
    """Per-major dropout counts and average overlap, for majors with graduates."""
    counts = store.graduate_counts()
    by_major: dict[str, list[float]] = {}
    for att in attributions:
        if att.major is not None:
            by_major.setdefault(att.major, []).append(att.overlap_ratio)
    stats: dict[str, MajorDropoutStats] = {}
    for m, code in enumerate(store.major_codes):
        code = str(code)
        if counts[m] == 0:
            continue
        overlaps = by_major.get(code, [])
        stats[code] = MajorDropoutStats(
            major=code,
            major_name=str(store.major_names[m]),
            graduates=int(counts[m]),
            dropouts=len(overlaps),
            average_overlap=(sum(overlaps) / len(overlaps)) if overlaps else None)
    return stats


def attach_to_hierarchy(hierarchy: MajorHierarchy,
                        stats: dict[str, MajorDropoutStats]) -> None:
    """Fill per-leaf dropout rate and confidence from the aggregates.

    A leaf's rate is dropouts / (dropouts + graduates) over its members;
    confidence is the dropout-weighted mean overlap, None when the leaf
    has no attributed dropouts.
    """
    for node in hierarchy.leaves():
        dropouts = 0
        graduates = 0
        weighted = 0.0
        for code in node.members:
            s = stats.get(code)
            if s is None:
                continue
            dropouts += s.dropouts
            graduates += s.graduates
            if s.average_overlap is not None:
                weighted += s.dropouts * s.average_overlap
        node.dropouts = dropouts
        node.dropout_rate = dropouts / (dropouts + graduates) if (dropouts + graduates) else 0.0
        node.dropout_confidence = (weighted / dropouts) if dropouts else None


def unattributed_count(attributions: list[DropoutAttribution]) -> int:
    return sum(1 for a in attributions if a.major is None)


def write_report(stats: dict[str, MajorDropoutStats], path: str | Path) -> None:
    """Write the per-major dropout table as CSV.

    The overlap column is a percentage with two decimals; majors without
    attributed dropouts show a dash placeholder.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["major_code", "major_name", "graduates",
                         "estimated_dropouts", "average_overlap_pct"])
        for code in sorted(stats):
            s = stats[code]
            pct = f"{100.0 * s.average_overlap:.2f}%" if s.average_overlap is not None else "-"
            writer.writerow([s.major, s.major_name, s.graduates, s.dropouts, pct])
