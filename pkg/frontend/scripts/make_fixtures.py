"""Regenerate the golden fixtures under tests/fixtures.

Builds a small deterministic world with the campusflow pipeline, serves
the exported artifacts through the real API app, and freezes:

- raw route responses (catalog, tree scene, one major's graph, course
  details, similarity rows),
- server-filtered edge sets and core flags across a threshold/cores grid,
  including boundary thresholds equal to exact edge weights,
- the tooltip and panel strings the client must render verbatim.

Run from anywhere: python3 frontend/scripts/make_fixtures.py
"""

import json
import math
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from campusflow.api import create_app
from campusflow.pipeline import Pipeline
from campusflow.synth import WorldConfig, generate

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
MAJOR = "M000"
COURSE_SAMPLE = 3


def percent(fraction: float) -> str:
    # must match the client's formatPercent exactly: half-up basis points
    basis = math.floor(fraction * 10000 + 0.5)
    return f"{basis // 100}.{basis % 100:02d}%"


def tree_tooltip(node: dict) -> str:
    parts = [f"{node['population']} graduated",
             f"{node['dropout']['count']} dropped out"]
    if node["dropout"]["confidence"] is not None:
        parts.append(f"{percent(node['dropout']['confidence'])} confidence")
    return ", ".join(parts)


def course_tooltip(course: dict) -> str:
    return (f"{course['id']}: {course['enrollment']} students, "
            f"{percent(course['failure_rate'])} failed")


def panel_lines(detail: dict) -> list[str]:
    lines = [f"{detail['course']} in {detail['major']}"]
    lines.extend(f"{token}: {count}" for token, count in detail["histogram"].items())
    lines.append(f"enrolled: {detail['enrollment']}")
    return lines


def threshold_grid(edges: list[dict]) -> list[float]:
    values = sorted(e["c_value"] for e in edges)
    lo, hi = values[0], values[-1]
    grid = [0.0, hi, hi + 0.5]
    # quartile cuts plus exact edge weights to pin boundary inclusivity
    for q in (0.25, 0.5, 0.75):
        grid.append(values[int(q * (len(values) - 1))])
    grid.extend(values[:: max(len(values) // 5, 1)][:5])
    grid.append(math.nextafter(lo, math.inf))
    grid.append((lo + hi) / 2.0)
    return sorted(set(grid))


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        config = WorldConfig(students=1500, majors=6)
        generate(root / "data", seed=21, config=config)
        pipe = Pipeline(root / "out")
        pipe.run_all(root / "data")
        client = TestClient(create_app(root / "out" / "artifacts"))

        majors = client.get("/api/majors").json()
        tree = client.get("/api/tree").json()
        graph = client.get(f"/api/major/{MAJOR}/graph").json()
        similarity = client.get(f"/api/similarity/{MAJOR}").json()

        course_ids = [c["id"] for c in graph["courses"]][:COURSE_SAMPLE]
        details = {cid: client.get(f"/api/major/{MAJOR}/course/{cid}").json()
                   for cid in course_ids}

        cases = []
        for threshold in threshold_grid(graph["edges"]):
            for cores in (1, 3, graph["core_count"]):
                response = client.get(
                    f"/api/major/{MAJOR}/graph",
                    params={"threshold": repr(threshold), "cores": cores})
                doc = response.json()
                cases.append({
                    "threshold": threshold,
                    "cores": cores,
                    "status": response.status_code,
                    "edges": sorted([e["a"], e["b"]] for e in doc["edges"]),
                    "core_ids": sorted(c["id"] for c in doc["courses"]
                                       if c["core"]),
                })
        rejected = []
        for params, reason in (
                ({"threshold": -1.0}, "threshold_below_floor"),
                ({"cores": 0}, "invalid_core_count")):
            response = client.get(f"/api/major/{MAJOR}/graph", params=params)
            rejected.append({"params": params, "status": response.status_code,
                             "reason": response.json()["reason"]})

        tooltips = {
            "tree": {str(n["id"]): tree_tooltip(n) for n in tree["nodes"]},
            "courses": {c["id"]: course_tooltip(c) for c in graph["courses"]},
            "panel": {cid: panel_lines(d) for cid, d in details.items()},
        }

        blobs = {
            "majors.json": majors,
            "tree.json": tree,
            f"major_{MAJOR}.json": graph,
            f"similarity_{MAJOR}.json": similarity,
            "course_details.json": details,
            "server_filtered.json": {"major": MAJOR, "cases": cases,
                                     "rejected": rejected},
            "expected_tooltips.json": tooltips,
        }
        for name, blob in blobs.items():
            path = FIXTURES / name
            path.write_text(json.dumps(blob, indent=1, sort_keys=False) + "\n")
            print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


if __name__ == "__main__":
    main()
