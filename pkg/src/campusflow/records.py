"""Domain types and the columnar record store.

Everything downstream (affinity, hierarchy, course graphs, dropout
inference) reads from one immutable :class:`RecordStore` built at ingest
time: integer-coded event columns plus vocabularies, with CSR-style
indexes for per-student and per-course access.
"""

from __future__ import annotations

import io
import json
import zipfile
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .config import PipelineConfig

SEASONS = ("SP", "SU", "FA")  # chronological within a calendar year
_SEASON_ORDER = {s: i for i, s in enumerate(SEASONS)}

# Letter-grade scale. W/I/P/NP carry no points and are excluded from
# correlation math; they still count as enrollments.
GRADE_POINTS: dict[str, float | None] = {
    "A": 4.0, "A-": 3.7, "B+": 3.3, "B": 3.0, "B-": 2.7,
    "C+": 2.3, "C": 2.0, "C-": 1.7, "D+": 1.3, "D": 1.0, "F": 0.0,
    "W": None, "I": None, "P": None, "NP": None,
}
GRADE_TOKENS = tuple(GRADE_POINTS)
POINT_SCALE = tuple(v for v in GRADE_POINTS.values() if v is not None)


def grade_points(token: str) -> float | None:
    """Numeric points for a letter grade; None for non-performance tokens."""
    if token not in GRADE_POINTS:
        raise KeyError(f"unknown grade token: {token!r}")
    return GRADE_POINTS[token]


@dataclass(frozen=True, order=True)
class Term:
    """An academic term, ordered chronologically.

    Fall of year y precedes Spring of year y+1: the sort key is
    (calendar year, season index) with Spring < Summer < Fall.
    """

    year: int
    season_index: int

    @property
    def season(self) -> str:
        return SEASONS[self.season_index]

    @classmethod
    def parse(cls, text: str) -> "Term":
        if len(text) != 7 or text[4] != "-" or not text[:4].isdigit():
            raise ValueError(f"bad term format: {text!r}")
        season = text[5:]
        if season not in _SEASON_ORDER:
            raise ValueError(f"bad term format: {text!r}")
        return cls(int(text[:4]), _SEASON_ORDER[season])

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.season}"


class Status(IntEnum):
    GRADUATED = 0
    WITHDRAWN = 1
    CENSORED = 2


def write_npz_deterministic(path: str | Path, arrays: dict[str, np.ndarray]) -> None:
    """Write arrays as an npz-compatible zip with pinned entry metadata.

    zipfile stamps the current time on each entry, which would make two
    otherwise identical archives differ; pinning the date keeps snapshots
    byte-identical for identical content. Readable with numpy.load.
    """
    with zipfile.ZipFile(path, "w", zipfile.ZIP_STORED) as zf:
        for name in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[name]),
                                      allow_pickle=False)
            info = zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, buf.getvalue())


@dataclass
class StudentTimeline:
    """Single-student view used by tests and detail endpoints."""

    student: str
    terms: list[tuple[Term, int]]     # (term, relative index 1..T)
    status: Status
    majors: tuple[str, ...] = ()      # graduation majors, empty unless graduated


@dataclass
class RecordStore:
    """Immutable columnar store of grade events, graduations, and catalog.

    Event columns are parallel int32 arrays indexing the vocab lists.
    ``gender`` is one int8 per student: 0 unknown, 1 female, 2 male.
    """

    students: np.ndarray          # unicode vocab, sorted
    courses: np.ndarray
    terms: list[Term]             # sorted chronologically
    major_codes: np.ndarray       # sorted
    major_names: np.ndarray       # parallel to major_codes
    ev_student: np.ndarray
    ev_course: np.ndarray
    ev_term: np.ndarray
    ev_grade: np.ndarray          # index into GRADE_TOKENS
    ev_points: np.ndarray         # float64, NaN where the token has no points
    grad_student: np.ndarray
    grad_major: np.ndarray
    grad_term: np.ndarray
    wd_student: np.ndarray        # explicit withdrawals, may be empty
    wd_term: np.ndarray
    gender: np.ndarray            # int8 per student
    content_key: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    # ---------------------------------------------------------------- build

    def __post_init__(self) -> None:
        for arr in (self.students, self.courses, self.major_codes, self.major_names,
                    self.ev_student, self.ev_course, self.ev_term, self.ev_grade,
                    self.ev_points, self.grad_student, self.grad_major,
                    self.grad_term, self.wd_student, self.wd_term, self.gender):
            arr.setflags(write=False)

    @property
    def n_events(self) -> int:
        return len(self.ev_student)

    @property
    def n_students(self) -> int:
        return len(self.students)

    @property
    def n_courses(self) -> int:
        return len(self.courses)

    @property
    def n_majors(self) -> int:
        return len(self.major_codes)

    def student_index(self, student: str) -> int:
        i = int(np.searchsorted(self.students, student))
        if i >= len(self.students) or self.students[i] != student:
            raise KeyError(f"unknown student: {student!r}")
        return i

    def course_index(self, course: str) -> int:
        i = int(np.searchsorted(self.courses, course))
        if i >= len(self.courses) or self.courses[i] != course:
            raise KeyError(f"unknown course: {course!r}")
        return i

    def major_index(self, code: str) -> int:
        i = int(np.searchsorted(self.major_codes, code))
        if i >= len(self.major_codes) or self.major_codes[i] != code:
            raise KeyError(f"unknown major: {code!r}")
        return i

    def major_name(self, code: str) -> str:
        return str(self.major_names[self.major_index(code)])

    # ------------------------------------------------------------- indexes

    def _csr(self, key: str, ids: np.ndarray, n_groups: int):
        if key not in self._cache:
            order = np.argsort(ids, kind="stable").astype(np.int64)
            counts = np.bincount(ids, minlength=n_groups)
            offsets = np.zeros(n_groups + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            self._cache[key] = (order, offsets)
        return self._cache[key]

    def events_by_student(self):
        """(order, offsets): event rows grouped by student index."""
        return self._csr("by_student", self.ev_student, self.n_students)

    def events_by_course(self):
        return self._csr("by_course", self.ev_course, self.n_courses)

    def graduations_by_major(self):
        return self._csr2("grad_by_major", self.grad_major, self.n_majors)

    def _csr2(self, key: str, ids: np.ndarray, n_groups: int):
        if key not in self._cache:
            order = np.argsort(ids, kind="stable").astype(np.int64)
            counts = np.bincount(ids, minlength=n_groups) if len(ids) else np.zeros(n_groups, dtype=np.int64)
            offsets = np.zeros(n_groups + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            self._cache[key] = (order, offsets)
        return self._cache[key]

    def graduate_counts(self) -> np.ndarray:
        """Graduation-record count per major index."""
        if "grad_counts" not in self._cache:
            counts = (np.bincount(self.grad_major, minlength=self.n_majors)
                      if len(self.grad_major) else np.zeros(self.n_majors, dtype=np.int64))
            self._cache["grad_counts"] = counts
        return self._cache["grad_counts"]

    def distinct_enrollments(self):
        """Distinct (student, course) pairs as a CSR keyed by student.

        Returns (pair_course, offsets): courses of student s are
        pair_course[offsets[s]:offsets[s + 1]], each course listed once.
        """
        if "pairs" not in self._cache:
            key = self.ev_student.astype(np.int64) * self.n_courses + self.ev_course
            uniq = np.unique(key)
            pair_student = (uniq // self.n_courses).astype(np.int64)
            pair_course = (uniq % self.n_courses).astype(np.int64)
            counts = np.bincount(pair_student, minlength=self.n_students)
            offsets = np.zeros(self.n_students + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            self._cache["pairs"] = (pair_course, offsets)
        return self._cache["pairs"]

    # --------------------------------------------------------------- cache

    def save(self, path: str | Path) -> None:
        """Write a deterministic binary snapshot (byte-identical per content)."""
        meta = {
            "format": 1,
            "content_key": self.content_key,
            "terms": [str(t) for t in self.terms],
        }
        arrays = {
            "students": self.students,
            "courses": self.courses,
            "major_codes": self.major_codes,
            "major_names": self.major_names,
            "ev_student": self.ev_student,
            "ev_course": self.ev_course,
            "ev_term": self.ev_term,
            "ev_grade": self.ev_grade,
            "ev_points": self.ev_points,
            "grad_student": self.grad_student,
            "grad_major": self.grad_major,
            "grad_term": self.grad_term,
            "wd_student": self.wd_student,
            "wd_term": self.wd_term,
            "gender": self.gender,
            "meta": np.array(json.dumps(meta, sort_keys=True)),
        }
        write_npz_deterministic(path, arrays)
    @classmethod
    def load(cls, path: str | Path) -> "RecordStore":
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"].ravel()[0]))
            return cls(
                students=data["students"],
                courses=data["courses"],
                terms=[Term.parse(t) for t in meta["terms"]],
                major_codes=data["major_codes"],
                major_names=data["major_names"],
                ev_student=data["ev_student"],
                ev_course=data["ev_course"],
                ev_term=data["ev_term"],
                ev_grade=data["ev_grade"],
                ev_points=data["ev_points"],
                grad_student=data["grad_student"],
                grad_major=data["grad_major"],
                grad_term=data["grad_term"],
                wd_student=data["wd_student"],
                wd_term=data["wd_term"],
                gender=data["gender"],
                content_key=meta["content_key"],
            )


# ---------------------------------------------------------------- timelines


@dataclass
class Timelines:
    """Per-student status and per-event relative semester indexes."""

    store: RecordStore
    rel_index: np.ndarray        # per event: 1-based rank of the term
    stage: np.ndarray            # per event: rel_index capped at stage_count
    term_count: np.ndarray       # per student: T (0 if no events)
    last_term: np.ndarray        # per student: index into store.terms, -1 if none
    status: np.ndarray           # per student: Status value
    quality_report: list[str]

    def timeline(self, student: str) -> StudentTimeline:
        store = self.store
        s = store.student_index(student)
        order, offsets = store.events_by_student()
        rows = order[offsets[s]:offsets[s + 1]]
        term_idx = np.unique(store.ev_term[rows])
        terms = [(store.terms[int(t)], i + 1) for i, t in enumerate(term_idx)]
        majors = tuple(sorted(str(store.major_codes[m])
                              for m in store.grad_major[store.grad_student == s]))
        return StudentTimeline(student=student, terms=terms,
                               status=Status(int(self.status[s])), majors=majors)


def build_timelines(store: RecordStore, config: PipelineConfig | None = None) -> Timelines:
    """Assign relative semester indexes and a status to every student.

    Relative index t is the chronological rank of the student's distinct
    enrolled terms (first term = 1). Status: graduated if any graduation
    record exists; else withdrawn when the last enrolled term precedes the
    dataset's final term by at least ``censor_gap`` positions in the
    dataset's term sequence (or the student appears in the withdrawals
    file); else censored.
    """
    config = config or PipelineConfig()
    n = store.n_events
    quality: list[str] = []

    rel = np.zeros(n, dtype=np.int32)
    term_count = np.zeros(store.n_students, dtype=np.int32)
    last_term = np.full(store.n_students, -1, dtype=np.int64)
    if n:
        order = np.lexsort((store.ev_term, store.ev_student))
        s = store.ev_student[order]
        t = store.ev_term[order]
        new_student = np.empty(n, dtype=bool)
        new_student[0] = True
        new_student[1:] = s[1:] != s[:-1]
        new_term = np.empty(n, dtype=bool)
        new_term[0] = True
        new_term[1:] = (t[1:] != t[:-1]) | new_student[1:]
        cum = np.cumsum(new_term)
        seg = np.cumsum(new_student) - 1
        seg_base = cum[new_student] - 1
        rel_sorted = (cum - seg_base[seg]).astype(np.int32)
        rel[order] = rel_sorted
        seg_students = s[new_student]
        seg_ends = np.flatnonzero(new_student)[1:] - 1
        seg_ends = np.append(seg_ends, n - 1)
        term_count[seg_students] = rel_sorted[seg_ends]
        last_term[seg_students] = t[seg_ends]

    stage = np.minimum(rel, config.stage_count)

    status = np.full(store.n_students, Status.CENSORED, dtype=np.int8)
    final_term = len(store.terms) - 1
    gap = final_term - last_term
    status[(last_term >= 0) & (gap >= config.censor_gap)] = Status.WITHDRAWN
    if len(store.wd_student):
        status[store.wd_student] = Status.WITHDRAWN
    graduated = np.unique(store.grad_student)
    status[graduated] = Status.GRADUATED

    no_events = graduated[term_count[graduated] == 0]
    for s_idx in no_events:
        quality.append(f"graduated student {store.students[s_idx]} has no grade events")
    if len(store.wd_student):
        for s_idx in np.intersect1d(store.wd_student, graduated):
            quality.append(f"withdrawal record ignored for graduate {store.students[s_idx]}")

    return Timelines(store=store, rel_index=rel, stage=stage,
                     term_count=term_count, last_term=last_term,
                     status=status, quality_report=quality)


# ------------------------------------------------------------- stage sets


@dataclass
class StageCourseSets:
    """Which courses are canonical to each relative semester 1..stage_count."""

    sets: list[np.ndarray]        # per stage: sorted course indexes
    mean_stage: np.ndarray        # per course: mean capped relative index (NaN below floor)
    assigned: np.ndarray          # per course: stage or 0 when unassigned
    warnings: list[str]


def build_stage_course_sets(store: RecordStore, timelines: Timelines,
                            config: PipelineConfig | None = None) -> StageCourseSets:
    """Partition qualifying courses into semester sets by rounded mean index.

    A course lands in stage t when the half-up-rounded mean of its
    enrollments' capped relative indexes equals t and it has at least
    ``min_enrollment`` enrollments. Courses below the floor belong to no set.
    """
    config = config or PipelineConfig()
    n_courses = store.n_courses
    counts = np.bincount(store.ev_course, minlength=n_courses)
    sums = np.bincount(store.ev_course, weights=timelines.stage.astype(np.float64),
                       minlength=n_courses)
    mean = np.full(n_courses, np.nan)
    ok = counts >= config.min_enrollment
    mean[ok] = sums[ok] / counts[ok]

    assigned = np.zeros(n_courses, dtype=np.int32)
    assigned[ok] = np.floor(mean[ok] + 0.5).astype(np.int32)  # half-up

    warnings = []
    sets = []
    for t in range(1, config.stage_count + 1):
        members = np.flatnonzero(assigned == t)
        if len(members) == 0:
            warnings.append(f"stage {t}: empty course set")
        sets.append(members)
    return StageCourseSets(sets=sets, mean_stage=mean, assigned=assigned,
                           warnings=warnings)


def semester_course_set(store: RecordStore, timelines: Timelines, t: int,
                        config: PipelineConfig | None = None) -> set[str]:
    """Course ids canonical to relative semester t (1-based)."""
    config = config or PipelineConfig()
    if not 1 <= t <= config.stage_count:
        raise ValueError(f"stage out of range: {t}")
    sets = build_stage_course_sets(store, timelines, config)
    return {str(store.courses[c]) for c in sets.sets[t - 1]}
