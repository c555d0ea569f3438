"""Resolution-independent geometry for the two views.

The radial scene places the major hierarchy on concentric rings: leaves
spaced uniformly around the circle in depth-first order, internal nodes
at the population-weighted mean angle of their children, ribbon widths
on a log scale of the child population. The node-link scene places one
major's courses at x = average semester and a y offset that shrinks as
the course's total correlation weight grows, then relaxes overlaps by
moving y only. Both scenes serialize to plain dicts for JSON export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import LayoutParams
from .corrgraph import CourseGraph
from .hierarchy import MajorHierarchy
from .records import GRADE_TOKENS


@dataclass
class RadialNode:
    id: int
    stage: int
    angle: float
    radius: float
    population: int
    members: tuple[str, ...]
    is_leaf: bool
    label: str
    dropouts: int = 0
    dropout_rate: float = 0.0
    dropout_confidence: float | None = None
    bar_gray: float = 0.0
    bar_red: float = 0.0

    def to_json_dict(self) -> dict:
        out = {
            "id": self.id,
            "stage": self.stage,
            "angle": self.angle,
            "radius": self.radius,
            "population": self.population,
            "members": list(self.members),
            "label": self.label,
            "dropout": {"count": self.dropouts,
                        "rate": self.dropout_rate,
                        "confidence": self.dropout_confidence},
        }
        if self.is_leaf:
            out["bar"] = {"gray": self.bar_gray, "red": self.bar_red,
                          "opacity": (self.dropout_confidence
                                      if self.dropout_confidence is not None else 0.0)}
        return out


@dataclass
class RadialScene:
    nodes: list[RadialNode]
    ribbons: list[tuple[int, int, float]]   # (parent id, child id, width)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "nodes": [n.to_json_dict() for n in self.nodes],
            "ribbons": [{"parent": p, "child": c, "width": w}
                        for p, c, w in self.ribbons],
        }


def ribbon_width(population: int, params: LayoutParams) -> float:
    return params.w_min + params.w_scale * math.log10(max(population, 1))


def layout_radial(hierarchy: MajorHierarchy, params: LayoutParams | None = None,
                  names: dict[str, str] | None = None) -> RadialScene:
    """Polar geometry for the major hierarchy.

    Children are visited by population descending (ties by member codes),
    leaves get uniform angular slots in visit order, and every internal
    node sits at the population-weighted mean of its children's angles.
    """
    params = params or LayoutParams()
    names = names or {}
    nodes = hierarchy.nodes

    leaves_in_order: list[int] = []

    def visit(node_id: int) -> None:
        node = nodes[node_id]
        if node.is_leaf:
            leaves_in_order.append(node_id)
            return
        children = sorted(node.children,
                          key=lambda c: (-nodes[c].population, nodes[c].members))
        for child in children:
            visit(child)

    visit(0)
    total_leaves = max(len(leaves_in_order), 1)
    angle: dict[int, float] = {}
    for i, leaf_id in enumerate(leaves_in_order):
        angle[leaf_id] = 2.0 * math.pi * (i + 0.5) / total_leaves

    # internal angles bottom-up: weighted mean of children
    for node in sorted(nodes, key=lambda n: -n.stage):
        if node.is_leaf:
            continue
        weight = sum(nodes[c].population for c in node.children)
        if weight == 0:
            angle[node.id] = sum(angle[c] for c in node.children) / len(node.children)
        else:
            angle[node.id] = sum(angle[c] * nodes[c].population
                                 for c in node.children) / weight

    out_nodes: list[RadialNode] = []
    for node in nodes:
        if node.is_leaf and params.uniform_leaf_radius:
            radius = hierarchy.stage_count * params.ring_step
        else:
            radius = node.stage * params.ring_step
        if len(node.members) == 1:
            label = names.get(node.members[0], node.members[0])
        else:
            label = f"{len(node.members)} majors"
        rn = RadialNode(id=node.id, stage=node.stage, angle=angle.get(node.id, 0.0),
                        radius=radius, population=node.population,
                        members=node.members, is_leaf=node.is_leaf, label=label,
                        dropouts=node.dropouts,
                        dropout_rate=node.dropout_rate,
                        dropout_confidence=node.dropout_confidence)
        if node.is_leaf:
            rn.bar_gray = params.bar_length
            rn.bar_red = node.dropout_rate * params.bar_length
        out_nodes.append(rn)

    ribbons = [(node.id, child, ribbon_width(nodes[child].population, params))
               for node in nodes for child in node.children]
    return RadialScene(nodes=out_nodes, ribbons=ribbons)


@dataclass
class CourseNode:
    id: str
    x: float
    y: float
    radius: float
    core_rank: int
    failure_rate: float
    enrollment: int
    gender_f: float
    gender_m: float
    gender_u: float
    histogram: dict[str, int]

    def to_json_dict(self, core_count: int) -> dict:
        return {
            "id": self.id, "x": self.x, "y": self.y, "radius": self.radius,
            "core_rank": int(self.core_rank), "core": bool(self.core_rank <= core_count),
            "failure_rate": self.failure_rate, "enrollment": self.enrollment,
            "gender": {"f": self.gender_f, "m": self.gender_m, "u": self.gender_u},
            "histogram": dict(self.histogram),
        }


@dataclass
class NodeLinkScene:
    major: str
    courses: list[CourseNode]
    edges: list[tuple[str, str, float]]   # (course a, course b, C), C >= floor
    core_count: int
    edge_floor: float

    def to_json_dict(self, core_count: int | None = None) -> dict:
        k = self.core_count if core_count is None else core_count
        return {
            "schema_version": 1,
            "major": self.major,
            "core_count": k,
            "edge_floor": self.edge_floor,
            "courses": [c.to_json_dict(k) for c in self.courses],
            "edges": [{"a": a, "b": b, "c_value": v} for a, b, v in self.edges],
        }


def _relax_overlaps(x: list[float], y: list[float], params: LayoutParams) -> list[float]:
    """Push overlapping nodes apart along y until separated or capped.

    x never moves, preserving the semester axis. Exactly coincident nodes
    separate in index order (lower index moves down).
    """
    n = len(x)
    y = list(y)
    for _ in range(params.relax_iterations):
        moved = False
        for i in range(n):
            for j in range(i + 1, n):
                dx = x[j] - x[i]
                dy = y[j] - y[i]
                dist = math.hypot(dx, dy)
                if dist >= params.min_separation:
                    continue
                # shortfall along y that restores the separation at this dx
                need = math.sqrt(max(params.min_separation ** 2 - dx * dx, 0.0)) - abs(dy)
                if need <= 0:
                    continue
                direction = 1.0 if dy > 0 else (-1.0 if dy < 0 else 1.0)
                shift = need / 2.0 + 1e-9
                y[j] += direction * shift
                y[i] -= direction * shift
                moved = True
        if not moved:
            break
    return y


def layout_nodelink(graph: CourseGraph, params: LayoutParams | None = None) -> NodeLinkScene:
    """Place one major's courses and emit edges above the configured floor."""
    params = params or LayoutParams()
    nc = graph.n_courses
    xs = [float(v) for v in graph.avg_semester]
    max_total = float(graph.total_c.max()) if nc else 0.0
    ys = []
    for i in range(nc):
        if max_total > 0:
            ratio = min(max(float(graph.total_c[i]) / max_total, 0.0), 1.0)
        else:
            ratio = 1.0
        base = (1.0 - ratio) * params.y_max
        sign = 1.0 if graph.core_rank[i] % 2 == 1 else -1.0
        ys.append(sign * base)
    ys = _relax_overlaps(xs, ys, params)

    max_fail = float(graph.failure_rate.max()) if nc else 0.0
    courses = []
    for i in range(nc):
        if max_fail > 0:
            radius = params.r_min + (params.r_max - params.r_min) * float(graph.failure_rate[i]) / max_fail
        else:
            radius = params.r_min
        hist = {GRADE_TOKENS[t]: int(graph.histogram[i, t])
                for t in range(len(GRADE_TOKENS)) if graph.histogram[i, t] > 0}
        courses.append(CourseNode(
            id=graph.course_ids[i], x=xs[i], y=ys[i], radius=radius,
            core_rank=int(graph.core_rank[i]),
            failure_rate=float(graph.failure_rate[i]),
            enrollment=int(graph.enrollment[i]),
            gender_f=float(graph.gender[i, 0]), gender_m=float(graph.gender[i, 1]),
            gender_u=float(graph.gender[i, 2]), histogram=hist))

    edges = []
    for i in range(nc):
        for j in range(i + 1, nc):
            v = float(graph.c[i, j])
            if v >= params.edge_floor:
                edges.append((graph.course_ids[i], graph.course_ids[j], v))

    return NodeLinkScene(major=graph.major, courses=courses, edges=edges,
                         core_count=params.core_count, edge_floor=params.edge_floor)


def filter_edges(scene: NodeLinkScene, threshold: float) -> NodeLinkScene:
    """Drop edges whose C falls below the threshold; nodes are untouched."""
    if threshold < scene.edge_floor:
        raise ValueError(f"threshold {threshold} below exported floor {scene.edge_floor}")
    return NodeLinkScene(
        major=scene.major,
        courses=scene.courses,
        edges=[(a, b, v) for a, b, v in scene.edges if v >= threshold],
        core_count=scene.core_count,
        edge_floor=scene.edge_floor)
