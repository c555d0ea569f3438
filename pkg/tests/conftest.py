"""Shared fixtures: handcrafted CSV worlds and one generated demo world."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest

from campusflow.config import PipelineConfig
from campusflow.ingest import ingest_csv, ingest_directory
from campusflow.pipeline import Pipeline
from campusflow.records import build_stage_course_sets, build_timelines
from campusflow.synth import WorldConfig, generate

GRADES_HEADER = ["student_id", "term", "course_id", "grade"]
GRADUATIONS_HEADER = ["student_id", "term", "major_code"]
MAJORS_HEADER = ["major_code", "major_name"]
WITHDRAWALS_HEADER = ["student_id", "last_term"]
STUDENTS_HEADER = ["student_id", "gender"]


def write_rows(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_raw(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


@pytest.fixture
def csv_world(tmp_path):
    """Factory: build a store from in-memory row lists.

    grades rows: (student, term, course, grade)
    graduations rows: (student, term, major)
    majors rows: (code, name)
    """
    counter = {"n": 0}

    def build(grades, graduations, majors, withdrawals=None, students=None,
              config: PipelineConfig | None = None):
        counter["n"] += 1
        d = tmp_path / f"world{counter['n']}"
        d.mkdir()
        g = write_rows(d / "grades.csv", GRADES_HEADER, grades)
        r = write_rows(d / "graduations.csv", GRADUATIONS_HEADER, graduations)
        m = write_rows(d / "majors.csv", MAJORS_HEADER, majors)
        w = (write_rows(d / "withdrawals.csv", WITHDRAWALS_HEADER, withdrawals)
             if withdrawals is not None else None)
        s = (write_rows(d / "students.csv", STUDENTS_HEADER, students)
             if students is not None else None)
        return ingest_csv(g, r, m, withdrawals_path=w, students_path=s,
                          config=config or PipelineConfig())

    return build


def affinity_world_rows():
    """Two majors sharing one course: the 3-of-10 vs 4-of-4 construction.

    Course C1 is taken by 3 graduates of MAA and all 4 graduates of MAB,
    so its count vector is (3, 4) with norm exactly 5. C0 is filler taken
    by everyone, CX is exclusive to MAB, CY exclusive to MAA, CZ is taken
    only by a student who never graduates.
    """
    a_students = [f"a{i}" for i in range(10)]
    b_students = [f"b{i}" for i in range(4)]
    grades = []
    for s in a_students + b_students:
        grades.append((s, "2018-FA", "C0", "B"))
    for s in a_students[:3] + b_students:
        grades.append((s, "2018-FA", "C1", "A"))
    for s in b_students:
        grades.append((s, "2019-SP", "CX", "B+"))
    for s in a_students[:2]:
        grades.append((s, "2019-SP", "CY", "C"))
    grades.append(("zz", "2018-FA", "CZ", "D"))
    graduations = [(s, "2020-SP", "MAA") for s in a_students]
    graduations += [(s, "2020-SP", "MAB") for s in b_students]
    majors = [("MAA", "Alpha Studies"), ("MAB", "Beta Studies"),
              ("MZZ", "Zero Grads")]
    return grades, graduations, majors


def duplicate_rows(grades, graduations):
    """Clone every student under a new id, doubling every count."""
    g2 = list(grades) + [(s + "_dup", t, c, gr) for s, t, c, gr in grades]
    r2 = list(graduations) + [(s + "_dup", t, m) for s, t, m in graduations]
    return g2, r2


@pytest.fixture
def affinity_world(csv_world):
    grades, graduations, majors = affinity_world_rows()
    store, report = csv_world(grades, graduations, majors,
                              config=PipelineConfig(min_enrollment=1))
    return store


@pytest.fixture(scope="session")
def demo_config():
    return PipelineConfig()


@pytest.fixture(scope="session")
def demo_world(tmp_path_factory, demo_config):
    """A small generated world shared by integration-style tests."""
    d = tmp_path_factory.mktemp("demo")
    world = WorldConfig(students=1500, majors=6, split_stages=(3, 5),
                        courses_per_stage=3, core_count=6)
    manifest = generate(d / "data", seed=5, config=world)
    store, report = ingest_directory(d / "data", demo_config)
    timelines = build_timelines(store, demo_config)
    stage_sets = build_stage_course_sets(store, timelines, demo_config)
    return {"dir": d, "manifest": manifest, "store": store, "report": report,
            "timelines": timelines, "stage_sets": stage_sets,
            "world_config": world}


@pytest.fixture(scope="session")
def demo_artifacts(tmp_path_factory, demo_config):
    """Full pipeline products for gateway tests; includes one unmodeled major."""
    d = tmp_path_factory.mktemp("artifacts_world")
    world = WorldConfig(students=1200, majors=4, split_stages=(3, 5),
                        courses_per_stage=3)
    generate(d / "data", seed=9, config=world)
    # a catalog-only major: present in majors.csv, no graduates
    with open(d / "data" / "majors.csv", "a", newline="") as fh:
        csv.writer(fh).writerow(["M999", "Ghost Program"])
    pipe = Pipeline(d / "out", demo_config)
    pipe.run_all(d / "data")
    return {"dir": d, "out": d / "out", "artifacts": d / "out" / "artifacts",
            "pipeline": pipe}
