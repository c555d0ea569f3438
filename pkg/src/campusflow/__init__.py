"""Student-progression analytics: major hierarchies, course-correlation
graphs, and dropout attribution from transcript-style enrollment records."""

from .affinity import (MajorAffinity, StageSimilarity, UndefinedMajorError,
                       m_value, pairwise_similarity, similarity_matrix,
                       stage_similarity)
from .config import LayoutParams, PipelineConfig
from .corrgraph import CourseGraph, build_all_course_graphs, build_course_graph, c_value, pcc
from .dropout import (DropoutAttribution, MajorDropoutStats, aggregate_dropouts,
                      attribute_all, curriculum_set, infer_intended_major)
from .hierarchy import MajorHierarchy, TreeNode, build_hierarchy, rf_distance, split_group
from .ingest import IngestError, IngestReport, ingest_csv, ingest_directory
from .layout import (NodeLinkScene, RadialScene, filter_edges, layout_nodelink,
                     layout_radial, ribbon_width)
from .pipeline import Pipeline, PipelineError
from .records import (RecordStore, StudentTimeline, Term, build_stage_course_sets,
                      build_timelines, grade_points, semester_course_set)
from .synth import PlantedWorld, WorldConfig, generate, manifest_check

__version__ = "0.1.0"

__all__ = [
    "CourseGraph",
    "DropoutAttribution",
    "IngestError",
    "IngestReport",
    "LayoutParams",
    "MajorAffinity",
    "MajorDropoutStats",
    "MajorHierarchy",
    "NodeLinkScene",
    "Pipeline",
    "PipelineError",
    "PipelineConfig",
    "PlantedWorld",
    "RadialScene",
    "RecordStore",
    "StageSimilarity",
    "StudentTimeline",
    "Term",
    "TreeNode",
    "UndefinedMajorError",
    "WorldConfig",
    "aggregate_dropouts",
    "attribute_all",
    "build_all_course_graphs",
    "build_course_graph",
    "build_hierarchy",
    "build_stage_course_sets",
    "build_timelines",
    "c_value",
    "curriculum_set",
    "filter_edges",
    "generate",
    "grade_points",
    "infer_intended_major",
    "ingest_csv",
    "ingest_directory",
    "layout_nodelink",
    "layout_radial",
    "m_value",
    "manifest_check",
    "pairwise_similarity",
    "pcc",
    "rf_distance",
    "ribbon_width",
    "semester_course_set",
    "similarity_matrix",
    "split_group",
    "stage_similarity",
]
