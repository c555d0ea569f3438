"""Pipeline phases: ingest, model, export, report.

Each phase writes its products under one output directory and records a
content key in manifest.json so reruns with unchanged inputs are cheap
no-ops while any input or config change forces a rebuild downstream.

    out_dir/
      cache/store.npz          columnar record store (deterministic bytes)
      cache/ingest.json        ingest accounting
      cache/rejections_*.csv   per-input rejection reports
      model/hierarchy.json     major tree with dropout stats
      model/similarity.json    per-stage similarity matrices + mean
      model/graphs.npz         per-major correlation model arrays
      model/dropout.json       per-major dropout aggregates
      model/attributions.csv   per-student attribution audit trail
      artifacts/tree.json      radial scene (served verbatim)
      artifacts/major_*.json   node-link scenes
      artifacts/majors.json    catalog with graduate counts
      artifacts/similarity.json
      artifacts/dropouts.csv   report table
      manifest.json            content keys and timings (not an export)
"""

from __future__ import annotations

import csv
import hashlib
import json
import shutil
import time
from pathlib import Path

import numpy as np

from . import affinity, corrgraph, dropout, ingest as ingest_mod, layout, records
from .config import PipelineConfig
from .hierarchy import MajorHierarchy, build_hierarchy
from .records import RecordStore, write_npz_deterministic

SCHEMA_VERSION = 1


class PipelineError(RuntimeError):
    """A phase cannot run (usually a missing upstream artifact)."""


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _graph_arrays(code: str, graph: corrgraph.CourseGraph) -> dict[str, np.ndarray]:
    p = f"{code}/"
    return {
        p + "course_idx": graph.course_idx,
        p + "n": graph.n,
        p + "r": graph.r,
        p + "c": graph.c,
        p + "total_c": graph.total_c,
        p + "core_rank": graph.core_rank,
        p + "avg_semester": graph.avg_semester,
        p + "enrollment": graph.enrollment,
        p + "failure_rate": graph.failure_rate,
        p + "histogram": graph.histogram,
        p + "gender": graph.gender,
        p + "graduates": np.array(graph.graduates, dtype=np.int64),
    }


def _graph_from_arrays(code: str, data, store: RecordStore) -> corrgraph.CourseGraph:
    p = f"{code}/"
    course_idx = data[p + "course_idx"]
    return corrgraph.CourseGraph(
        major=code,
        graduates=int(data[p + "graduates"].ravel()[0]),
        course_idx=course_idx,
        course_ids=[str(store.courses[c]) for c in course_idx],
        n=data[p + "n"], r=data[p + "r"], c=data[p + "c"],
        total_c=data[p + "total_c"], core_rank=data[p + "core_rank"],
        avg_semester=data[p + "avg_semester"], enrollment=data[p + "enrollment"],
        failure_rate=data[p + "failure_rate"], histogram=data[p + "histogram"],
        gender=data[p + "gender"])


class Pipeline:
    """Drives the phases against one output directory."""

    def __init__(self, out_dir: str | Path, config: PipelineConfig | None = None):
        self.out_dir = Path(out_dir)
        self.config = config or PipelineConfig()
        self.cache_dir = self.out_dir / "cache"
        self.model_dir = self.out_dir / "model"
        self.artifacts_dir = self.out_dir / "artifacts"

    # ------------------------------------------------------------- manifest

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / "manifest.json"

    def manifest(self) -> dict:
        if self.manifest_path.exists():
            with open(self.manifest_path) as fh:
                return json.load(fh)
        return {"schema_version": SCHEMA_VERSION, "phases": {}}

    def _record_phase(self, manifest: dict, name: str, seconds: float,
                      **fields) -> None:
        manifest.setdefault("phases", {})[name] = {"seconds": round(seconds, 3)}
        manifest.update(fields)
        manifest["config"] = json.loads(self.config.to_json())
        _write_json(self.manifest_path, manifest)

    def record_data_dir(self, data_dir: str | Path) -> None:
        """Remember where the raw CSVs live so `model` can ingest lazily."""
        doc = self.manifest()
        doc["data_dir"] = str(Path(data_dir).resolve())
        _write_json(self.manifest_path, doc)

    # --------------------------------------------------------------- ingest

    @property
    def store_path(self) -> Path:
        return self.cache_dir / "store.npz"

    def ingest(self, data_dir: str | Path, force: bool = False) -> dict:
        """Build (or reuse) the record-store cache from a data directory."""
        started = time.perf_counter()
        key = ingest_mod.directory_content_key(data_dir, self.config)
        manifest = self.manifest()
        if (not force and self.store_path.exists()
                and manifest.get("store_key") == key):
            return {"phase": "ingest", "skipped": True, "store_key": key}
        store, report = ingest_mod.ingest_directory(data_dir, self.config)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        store.save(self.store_path)
        report.write_rejection_reports(self.cache_dir)
        summary = {
            "accepted": report.accepted,
            "deduplicated": report.deduplicated,
            "rejected": {k: len(v) for k, v in report.rejections.items()},
            "quality": report.quality,
            "students": store.n_students,
            "courses": store.n_courses,
            "events": store.n_events,
            "majors": store.n_majors,
        }
        _write_json(self.cache_dir / "ingest.json", summary)
        self._record_phase(manifest, "ingest", time.perf_counter() - started,
                           store_key=key, data_dir=str(Path(data_dir).resolve()))
        return {"phase": "ingest", "skipped": False, "store_key": key, **summary}

    def load_store(self) -> RecordStore:
        if not self.store_path.exists():
            raise PipelineError(
                f"no record-store cache at {self.store_path}; "
                "run the ingest step first")
        return RecordStore.load(self.store_path)

    # ---------------------------------------------------------------- model

    def _model_files(self) -> list[Path]:
        return [self.model_dir / "hierarchy.json",
                self.model_dir / "similarity.json",
                self.model_dir / "graphs.npz",
                self.model_dir / "dropout.json",
                self.model_dir / "attributions.csv"]

    def _model_key(self, store: RecordStore) -> str:
        """Store content plus the live config; any flag change forces a rebuild."""
        blob = (store.content_key + self.config.to_json()).encode()
        return hashlib.sha256(blob).hexdigest()

    def model(self, force: bool = False) -> dict:
        """Build hierarchy, course graphs, and dropout stats from the store."""
        started = time.perf_counter()
        store = self.load_store()
        manifest = self.manifest()
        key = self._model_key(store)
        if (not force and manifest.get("model_key") == key
                and all(p.exists() for p in self._model_files())):
            return {"phase": "model", "skipped": True}

        config = self.config
        timelines = records.build_timelines(store, config)
        stage_sets = records.build_stage_course_sets(store, timelines, config)
        similarities = [affinity.stage_similarity(store, stage_sets, t)
                        for t in range(1, config.stage_count + 1)]
        tree = build_hierarchy(store, stage_sets, config)
        graphs, skipped = corrgraph.build_all_course_graphs(store, timelines, config)
        core_sets = {code: set(g.core_set(config.layout.core_count))
                     for code, g in graphs.items()}
        attributions = dropout.attribute_all(store, timelines, core_sets, config)
        stats = dropout.aggregate_dropouts(attributions, store)
        dropout.attach_to_hierarchy(tree, stats)

        self.model_dir.mkdir(parents=True, exist_ok=True)
        _write_json(self.model_dir / "hierarchy.json", tree.to_json_dict())

        stack = np.stack([s.values for s in similarities]) if similarities else np.zeros((0, 0, 0))
        sim_doc = {
            "schema_version": SCHEMA_VERSION,
            "majors": similarities[0].majors if similarities else [],
            "stages": [s.to_json_dict() for s in similarities],
            "aggregate": [[float(v) for v in row] for row in stack.mean(axis=0)]
                         if len(similarities) else [],
            "warnings": [w for s in similarities for w in s.warnings],
        }
        _write_json(self.model_dir / "similarity.json", sim_doc)

        arrays: dict[str, np.ndarray] = {}
        for code in sorted(graphs):
            arrays.update(_graph_arrays(code, graphs[code]))
        arrays["majors"] = (np.array(sorted(graphs)) if graphs
                            else np.empty(0, dtype="U1"))
        write_npz_deterministic(self.model_dir / "graphs.npz", arrays)

        withdrawn_total = len(attributions)
        unattributed = dropout.unattributed_count(attributions)
        _write_json(self.model_dir / "dropout.json", {
            "schema_version": SCHEMA_VERSION,
            "stats": {code: {
                "major": s.major, "major_name": s.major_name,
                "graduates": s.graduates, "dropouts": s.dropouts,
                "average_overlap": s.average_overlap,
            } for code, s in stats.items()},
            "withdrawn": withdrawn_total,
            "attributed": withdrawn_total - unattributed,
            "unattributed": unattributed,
            "skipped_majors": skipped,
            "quality": timelines.quality_report,
            "stage_warnings": stage_sets.warnings,
            "hierarchy_log": tree.log,
        })

        with open(self.model_dir / "attributions.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["student_id", "major_code", "core_coverage",
                             "overlap_ratio", "courses_taken"])
            for a in attributions:
                writer.writerow([a.student, a.major or "",
                                 f"{a.core_coverage:.6f}", f"{a.overlap_ratio:.6f}",
                                 a.courses_taken])

        seconds = time.perf_counter() - started
        self._record_phase(manifest, "model", seconds, model_key=key)
        return {"phase": "model", "skipped": False, "seconds": seconds,
                "modeled_majors": len(graphs), "skipped_majors": len(skipped),
                "withdrawn": withdrawn_total, "unattributed": unattributed}

    # --------------------------------------------------------------- export

    def export(self, force: bool = False) -> dict:
        """Write the scene JSONs the API serves."""
        started = time.perf_counter()
        manifest = self.manifest()
        model_key = manifest.get("model_key")
        if model_key is None or not all(p.exists() for p in self._model_files()):
            raise PipelineError("no model artifacts; run the model step first")
        tree_path = self.artifacts_dir / "tree.json"
        if (not force and manifest.get("export_key") == model_key
                and tree_path.exists()):
            return {"phase": "export", "skipped": True}

        store = self.load_store()
        config = self.config
        with open(self.model_dir / "hierarchy.json") as fh:
            tree = MajorHierarchy.from_json_dict(json.load(fh))
        names = {str(c): str(n) for c, n in zip(store.major_codes, store.major_names)}

        self.artifacts_dir.mkdir(parents=True, exist_ok=True)
        scene = layout.layout_radial(tree, config.layout, names)
        _write_json(tree_path, scene.to_json_dict())

        written = ["tree.json", "majors.json", "similarity.json"]
        with np.load(self.model_dir / "graphs.npz", allow_pickle=False) as data:
            modeled = [str(c) for c in data["majors"]]
            for code in modeled:
                graph = _graph_from_arrays(code, data, store)
                node_scene = layout.layout_nodelink(graph, config.layout)
                _write_json(self.artifacts_dir / f"major_{code}.json",
                            node_scene.to_json_dict())
                written.append(f"major_{code}.json")

        counts = store.graduate_counts()
        modeled_set = set(modeled)
        catalog = {
            "schema_version": SCHEMA_VERSION,
            "majors": [{"code": str(c), "name": str(n),
                        "graduates": int(counts[i]),
                        "modeled": str(c) in modeled_set}
                       for i, (c, n) in enumerate(zip(store.major_codes,
                                                      store.major_names))],
        }
        _write_json(self.artifacts_dir / "majors.json", catalog)
        shutil.copyfile(self.model_dir / "similarity.json",
                        self.artifacts_dir / "similarity.json")

        seconds = time.perf_counter() - started
        self._record_phase(manifest, "export", seconds, export_key=model_key,
                           artifacts=sorted(written))
        return {"phase": "export", "skipped": False, "seconds": seconds,
                "files": len(written)}

    # --------------------------------------------------------------- report

    def report(self) -> Path:
        """Write the per-major dropout table next to the other artifacts."""
        path = self.model_dir / "dropout.json"
        if not path.exists():
            raise PipelineError("no dropout stats; run the model step first")
        with open(path) as fh:
            doc = json.load(fh)
        stats = {code: dropout.MajorDropoutStats(
                    major=d["major"], major_name=d["major_name"],
                    graduates=d["graduates"], dropouts=d["dropouts"],
                    average_overlap=d["average_overlap"])
                 for code, d in doc["stats"].items()}
        self.artifacts_dir.mkdir(parents=True, exist_ok=True)
        out = self.artifacts_dir / "dropouts.csv"
        dropout.write_report(stats, out)
        return out

    def run_all(self, data_dir: str | Path, force: bool = False) -> list[dict]:
        results = [self.ingest(data_dir, force=force),
                   self.model(force=force),
                   self.export(force=force)]
        self.report()
        return results
