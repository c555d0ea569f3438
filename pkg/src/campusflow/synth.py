"""Synthetic student-records generator with planted ground truth.

Worlds are built around three planted structures that the models must
recover: a staged partition schedule of majors (shared curricula that
diverge at fixed split stages), a per-major core-course set whose grades
load more strongly on a per-student latent aptitude factor, and a set of
withdrawn students with known intended majors. The manifest written next
to the CSVs records all three so tests can score recovery exactly.

Grades follow a single-factor model: value = mu_course +
lambda_course * aptitude + noise, clamped to [0, 4] and rounded to the
nearest letter grade (ties round down). Generation is deterministic per
seed; rows are emitted in canonical order (student, term, course).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .records import GRADE_POINTS, SEASONS

# ascending point scale and matching tokens, used for nearest-letter rounding
_POINTS_ASC = np.array(sorted(v for v in GRADE_POINTS.values() if v is not None))
_TOKENS_ASC = sorted((v, k) for k, v in GRADE_POINTS.items() if v is not None)
_TOKENS_ASC = np.array([k for _, k in _TOKENS_ASC])
_MIDPOINTS = (_POINTS_ASC[:-1] + _POINTS_ASC[1:]) / 2.0

MANIFEST_NAME = "manifest.json"


class WorldConfigError(ValueError):
    """Inconsistent world parameters, reported before any file is written."""


@dataclass(frozen=True)
class WorldConfig:
    """Parameters of a planted world."""

    majors: int = 12
    students: int = 20000
    stages: int = 8
    courses_per_stage: int = 3
    split_stages: tuple[int, ...] = (3, 5, 7)  # last one splits to singletons
    branching: int = 2
    core_count: int = 6
    noise: float = 0.35
    lambda_core: float = 1.0
    lambda_noncore: float = 0.5
    uniform_mu: float | None = None       # force one mu for every course
    uniform_lambda: float | None = None   # force one loading for every course
    mu_low: float = 2.3
    mu_high: float = 3.3
    dropout_rate: float = 0.10
    dropout_stage_min: int = 2
    dropout_stage_max: int = 8
    withdraw_token_rate: float = 0.01
    cohorts: int = 3
    start_year: int = 2018
    gender_probs: tuple[float, float, float] = (0.48, 0.48, 0.04)  # F, M, U

    def validate(self) -> None:
        if self.majors < 1 or self.students < 1:
            raise WorldConfigError("majors and students must be positive")
        if self.stages < 1 or self.courses_per_stage < 1 or self.cohorts < 1:
            raise WorldConfigError("stages, courses_per_stage, cohorts must be positive")
        if self.split_stages:
            if list(self.split_stages) != sorted(set(self.split_stages)):
                raise WorldConfigError("split_stages must be strictly ascending")
            if self.split_stages[0] < 2 or self.split_stages[-1] > self.stages:
                raise WorldConfigError("split stages must lie in 2..stages")
        if self.majors > 1 and not self.split_stages:
            raise WorldConfigError("multiple majors require at least one split stage")
        if self.branching < 2:
            raise WorldConfigError("branching must be at least 2")
        exclusive_from = self.split_stages[-1] if self.split_stages else 1
        exclusive_courses = (self.stages - exclusive_from + 1) * self.courses_per_stage
        if self.core_count > exclusive_courses:
            raise WorldConfigError(
                f"core_count {self.core_count} exceeds the {exclusive_courses} "
                "exclusive courses available after the final split")
        if not 1 <= self.dropout_stage_min <= self.dropout_stage_max <= self.stages:
            raise WorldConfigError("dropout stage bounds must satisfy "
                                   "1 <= min <= max <= stages")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise WorldConfigError("dropout_rate must be in [0, 1)")
        if abs(sum(self.gender_probs) - 1.0) > 1e-9:
            raise WorldConfigError("gender_probs must sum to 1")


def planted_partitions(config: WorldConfig) -> list[list[list[int]]]:
    """Partition of major indexes at each stage 1..stages.

    Splits happen at the configured stages; each split divides every
    group into `branching` near-equal contiguous chunks, except the final
    split stage which dissolves groups into singletons.
    """
    current: list[list[int]] = [list(range(config.majors))]
    out = []
    final_split = config.split_stages[-1] if config.split_stages else None
    for stage in range(1, config.stages + 1):
        if stage in config.split_stages:
            new: list[list[int]] = []
            for group in current:
                if stage == final_split:
                    new.extend([m] for m in group)
                elif len(group) == 1:
                    new.append(group)
                else:
                    new.extend([list(chunk) for chunk in
                                np.array_split(np.array(group), config.branching)
                                if len(chunk)])
            current = new
        out.append([list(g) for g in current])
    return out


def _term_table(config: WorldConfig) -> tuple[list[str], np.ndarray]:
    """All terms in chronological order plus per-(cohort, stage) term index.

    Cohort i starts in Fall of start_year + i and alternates Fall/Spring
    with no summers, so cohort i's stage-t term has global index 2i+t-1.
    """
    n_terms = 2 * (config.cohorts - 1) + config.stages
    terms = []
    year = config.start_year
    season = 2  # FA
    for _ in range(n_terms):
        terms.append(f"{year:04d}-{SEASONS[season]}")
        if season == 2:
            year += 1
            season = 0
        else:
            season = 2
    index = np.empty((config.cohorts, config.stages), dtype=np.int64)
    for i in range(config.cohorts):
        for t in range(config.stages):
            index[i, t] = 2 * i + t
    return terms, index


def _round_to_letter(values: np.ndarray) -> np.ndarray:
    """Indexes into the ascending token table; midpoints round down."""
    return np.searchsorted(_MIDPOINTS, values, side="left")


@dataclass
class PlantedWorld:
    """In-memory description of the world before rows are materialized."""

    config: WorldConfig
    major_codes: list[str]
    partitions: list[list[list[int]]]
    curriculum: np.ndarray          # majors x stages x courses_per_stage course idx
    course_ids: list[str]
    course_stage: np.ndarray        # per course: planted stage
    cores: dict[str, list[str]]
    mu: np.ndarray
    lam: np.ndarray


def _build_world(config: WorldConfig, rng: np.random.Generator) -> PlantedWorld:
    partitions = planted_partitions(config)
    major_codes = [f"M{i:03d}" for i in range(config.majors)]

    course_ids: list[str] = []
    course_stage: list[int] = []
    curriculum = np.empty((config.majors, config.stages, config.courses_per_stage),
                          dtype=np.int64)
    for stage in range(1, config.stages + 1):
        for group in partitions[stage - 1]:
            ids = []
            for _ in range(config.courses_per_stage):
                ids.append(len(course_ids))
                course_ids.append(f"CRS{len(course_ids):05d}")
                course_stage.append(stage)
            for m in group:
                curriculum[m, stage - 1, :] = ids

    n_courses = len(course_ids)
    if config.uniform_mu is not None:
        mu = np.full(n_courses, float(config.uniform_mu))
    else:
        mu = rng.uniform(config.mu_low, config.mu_high, n_courses)
    lam = np.full(n_courses, config.lambda_noncore)

    final_split = config.split_stages[-1] if config.split_stages else 1
    cores: dict[str, list[str]] = {}
    for m, code in enumerate(major_codes):
        exclusive = [int(c) for stage in range(final_split, config.stages + 1)
                     for c in curriculum[m, stage - 1]]
        chosen = exclusive[:config.core_count]
        cores[code] = [course_ids[c] for c in chosen]
        lam[chosen] = config.lambda_core
    if config.uniform_lambda is not None:
        lam = np.full(n_courses, float(config.uniform_lambda))

    return PlantedWorld(config=config, major_codes=major_codes,
                        partitions=partitions, curriculum=curriculum,
                        course_ids=course_ids,
                        course_stage=np.array(course_stage, dtype=np.int64),
                        cores=cores, mu=mu, lam=lam)


def generate(out_dir: str | Path, seed: int = 0,
             config: WorldConfig | None = None) -> dict:
    """Write grades/graduations/majors/students CSVs plus the manifest.

    Returns the manifest dict. Deterministic for a fixed (seed, config):
    repeated runs emit byte-identical files.
    """
    config = config or WorldConfig()
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(seed))
    world = _build_world(config, rng)

    n = config.students
    student_ids = np.array([f"S{i:06d}" for i in range(n)])
    aptitude = rng.normal(0.0, 1.0, n)
    gender = rng.choice(np.array(["F", "M", "U"]), size=n, p=config.gender_probs)
    major_of = rng.integers(0, config.majors, n)
    cohort_of = rng.integers(0, config.cohorts, n)

    terms, term_index = _term_table(config)
    final_term = len(terms) - 1

    # Withdrawn students must stop at least censor-gap terms before the
    # dataset's final term so the gap rule can classify them without a
    # withdrawals file: stage d in cohort i ends at term 2i+d-1, so
    # d <= 2*(cohorts-1-i) + stages - 2 keeps the gap >= 2.
    last_stage = np.full(n, config.stages, dtype=np.int64)
    withdrawn_mask = np.zeros(n, dtype=bool)
    w_count = int(round(config.dropout_rate * n))
    if w_count:
        max_stage_of_cohort = np.array(
            [min(config.dropout_stage_max, 2 * (config.cohorts - 1 - i) + config.stages - 2)
             for i in range(config.cohorts)])
        valid_cohorts = np.flatnonzero(max_stage_of_cohort >= config.dropout_stage_min)
        if len(valid_cohorts) == 0:
            raise WorldConfigError(
                "no cohort can host withdrawn students detectable by the "
                "censor gap; add cohorts or lower dropout_stage_min")
        withdrawn_idx = rng.choice(n, size=w_count, replace=False)
        withdrawn_mask[withdrawn_idx] = True
        cohort_of[withdrawn_idx] = rng.choice(valid_cohorts, size=w_count)
        spans = max_stage_of_cohort[cohort_of[withdrawn_idx]]
        draws = rng.random(w_count)
        last_stage[withdrawn_idx] = (config.dropout_stage_min
                                     + np.floor(draws * (spans - config.dropout_stage_min + 1)).astype(np.int64))

    # ---- grade rows, stage by stage ---------------------------------------
    cps = config.courses_per_stage
    chunks = []
    for stage in range(1, config.stages + 1):
        active = np.flatnonzero(last_stage >= stage)
        if len(active) == 0:
            continue
        rows_student = np.repeat(active, cps)
        slot = np.tile(np.arange(cps), len(active))
        rows_course = world.curriculum[major_of[rows_student], stage - 1, slot]
        value = world.mu[rows_course] + world.lam[rows_course] * aptitude[rows_student]
        if config.noise > 0:
            value = value + rng.normal(0.0, config.noise, len(value))
        letter = _round_to_letter(np.clip(value, 0.0, 4.0))
        token = _TOKENS_ASC[letter]
        if config.withdraw_token_rate > 0:
            wmask = rng.random(len(value)) < config.withdraw_token_rate
            token = np.where(wmask, "W", token)
        rows_term = term_index[cohort_of[rows_student], stage - 1]
        chunks.append((rows_student, rows_term, rows_course, token))

    ev_student = np.concatenate([c[0] for c in chunks])
    ev_term = np.concatenate([c[1] for c in chunks])
    ev_course = np.concatenate([c[2] for c in chunks])
    ev_token = np.concatenate([c[3] for c in chunks])
    order = np.lexsort((ev_course, ev_term, ev_student))
    ev_student, ev_term, ev_course, ev_token = (
        a[order] for a in (ev_student, ev_term, ev_course, ev_token))

    term_arr = np.array(terms)
    course_arr = np.array(world.course_ids)
    grades_path = out_dir / "grades.csv"
    with open(grades_path, "w", newline="") as fh:
        fh.write("student_id,term,course_id,grade\n")
        step = 500_000
        for lo in range(0, len(ev_student), step):
            hi = min(lo + step, len(ev_student))
            frame = pd.DataFrame({
                "student_id": student_ids[ev_student[lo:hi]],
                "term": term_arr[ev_term[lo:hi]],
                "course_id": course_arr[ev_course[lo:hi]],
                "grade": ev_token[lo:hi],
            })
            frame.to_csv(fh, header=False, index=False)

    # ---- graduations, majors, students ------------------------------------
    grads = np.flatnonzero(~withdrawn_mask)
    grad_terms = term_arr[term_index[cohort_of[grads], config.stages - 1]]
    pd.DataFrame({
        "student_id": student_ids[grads],
        "term": grad_terms,
        "major_code": np.array(world.major_codes)[major_of[grads]],
    }).to_csv(out_dir / "graduations.csv", index=False)

    pd.DataFrame({
        "major_code": world.major_codes,
        "major_name": [f"Program {code[1:]}" for code in world.major_codes],
    }).to_csv(out_dir / "majors.csv", index=False)

    pd.DataFrame({
        "student_id": student_ids,
        "gender": gender,
    }).to_csv(out_dir / "students.csv", index=False)

    # ---- manifest -----------------------------------------------------------
    code_of = world.major_codes
    manifest = {
        "schema_version": 1,
        "seed": seed,
        "config": _config_dict(config),
        "majors": list(code_of),
        "partitions": {
            str(stage): [[code_of[m] for m in group] for group in world.partitions[stage - 1]]
            for stage in range(1, config.stages + 1)
        },
        "curricula": {
            code_of[m]: {
                str(stage): [world.course_ids[c] for c in world.curriculum[m, stage - 1]]
                for stage in range(1, config.stages + 1)
            } for m in range(config.majors)
        },
        "cores": world.cores,
        "course_stage": {cid: int(s) for cid, s in zip(world.course_ids, world.course_stage)},
        "withdrawn": {
            str(student_ids[i]): {"major": code_of[major_of[i]], "stage": int(last_stage[i])}
            for i in np.flatnonzero(withdrawn_mask)
        },
        "counts": {
            "students": int(n),
            "graduates": int(len(grads)),
            "withdrawn": int(w_count),
            "grade_rows": int(len(ev_student)),
            "courses": len(world.course_ids),
            "terms": len(terms),
        },
        "final_term": terms[final_term],
    }
    with open(out_dir / MANIFEST_NAME, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _config_dict(config: WorldConfig) -> dict:
    out = asdict(config)
    out["split_stages"] = list(config.split_stages)
    out["gender_probs"] = list(config.gender_probs)
    return out


def manifest_check(data_dir: str | Path) -> list[str]:
    """Verify every manifest claim against the emitted CSVs.

    Returns a list of human-readable discrepancies; empty means the files
    match the manifest. Never raises on content mismatches.
    """
    data_dir = Path(data_dir)
    problems: list[str] = []
    with open(data_dir / MANIFEST_NAME) as fh:
        manifest = json.load(fh)

    grades = pd.read_csv(data_dir / "grades.csv", dtype=str, na_filter=False)
    grads = pd.read_csv(data_dir / "graduations.csv", dtype=str, na_filter=False)
    students = pd.read_csv(data_dir / "students.csv", dtype=str, na_filter=False)
    majors = pd.read_csv(data_dir / "majors.csv", dtype=str, na_filter=False)

    counts = manifest["counts"]
    if len(grades) != counts["grade_rows"]:
        problems.append(f"grade rows: manifest {counts['grade_rows']}, file {len(grades)}")
    if len(grads) != counts["graduates"]:
        problems.append(f"graduates: manifest {counts['graduates']}, file {len(grads)}")
    if len(students) != counts["students"]:
        problems.append(f"students: manifest {counts['students']}, file {len(students)}")
    if list(majors["major_code"]) != manifest["majors"]:
        problems.append("major catalog does not match manifest majors")

    # partition refinement
    stages = sorted(int(s) for s in manifest["partitions"])
    prev: list[set[str]] | None = None
    for stage in stages:
        groups = [set(g) for g in manifest["partitions"][str(stage)]]
        if prev is not None:
            for group in groups:
                if not any(group <= p for p in prev):
                    problems.append(f"stage {stage}: partition does not refine stage {stage - 1}")
                    break
        prev = groups

    # allowed (major, course) pairs from the curricula
    course_stage = manifest["course_stage"]
    allowed = set()
    for major, by_stage in manifest["curricula"].items():
        for stage, courses in by_stage.items():
            for c in courses:
                allowed.add((major, c))

    major_of_grad = dict(zip(grads["student_id"], grads["major_code"]))
    withdrawn = manifest["withdrawn"]
    both = set(major_of_grad) & set(withdrawn)
    if both:
        problems.append(f"{len(both)} students both graduated and withdrawn")

    intended = {s: d["major"] for s, d in withdrawn.items()}
    stage_of = {s: d["stage"] for s, d in withdrawn.items()}
    expected_rows_grad = manifest["config"]["stages"] * manifest["config"]["courses_per_stage"]

    grades = grades.assign(stage=grades["course_id"].map(course_stage))
    by_student = grades.groupby("student_id", sort=False)
    row_counts = by_student.size()

    cps = manifest["config"]["courses_per_stage"]
    for student, group in grades.groupby("student_id", sort=False):
        if student in intended:
            major = intended[student]
            d = stage_of[student]
            if len(group) != d * cps:
                problems.append(f"withdrawn {student}: {len(group)} rows, expected {d * cps}")
            if group["stage"].max() > d:
                problems.append(f"withdrawn {student}: events past dropout stage {d}")
        elif student in major_of_grad:
            major = major_of_grad[student]
            if len(group) != expected_rows_grad:
                problems.append(f"graduate {student}: {len(group)} rows, expected {expected_rows_grad}")
        else:
            problems.append(f"student {student} has rows but neither graduated nor withdrew")
            continue
        bad = [c for c in group["course_id"] if (major, c) not in allowed]
        if bad:
            problems.append(f"student {student}: {len(bad)} courses outside {major}'s curriculum")

    missing_withdrawn = set(withdrawn) - set(row_counts.index)
    if missing_withdrawn:
        problems.append(f"{len(missing_withdrawn)} withdrawn students have no grade rows")
    return problems
