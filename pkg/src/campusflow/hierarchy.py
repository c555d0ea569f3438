"""Top-down temporal clustering of majors into a staged hierarchy.

Starting from one root group holding every modeled major, each semester
stage t = 1..stage_count recomputes pairwise similarity on that stage's
course set within each current leaf group and splits the group into the
connected components of a relative-threshold graph. Groups that do not
split gain a single pass-through child so every surviving leaf sits at
the final stage; singleton groups stop subdividing immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .records import RecordStore, StageCourseSets
from . import affinity


@dataclass
class TreeNode:
    id: int
    stage: int                      # 0 = root
    members: tuple[str, ...]        # sorted major codes
    population: int                 # graduation records over members
    parent: int | None
    children: list[int] = field(default_factory=list)
    # filled by the dropout stage for leaves
    dropouts: int = 0
    dropout_rate: float = 0.0
    dropout_confidence: float | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass
class MajorHierarchy:
    nodes: list[TreeNode]           # node id == list index
    stage_count: int
    thresholds: list[float]         # per stage 1..stage_count
    excluded_majors: list[str]      # catalog majors with zero graduates
    log: list[str]

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def leaves(self) -> list[TreeNode]:
        return [n for n in self.nodes if n.is_leaf]

    def partition_at(self, stage: int) -> set[frozenset[str]]:
        """Leaf groups in effect at the given stage (0 = the root group)."""
        if stage == 0:
            return {frozenset(self.root.members)}
        out = set()
        for node in self.nodes:
            if node.stage == stage or (node.stage < stage and node.is_leaf):
                if node.stage == 0 and node.children:
                    continue
                out.add(frozenset(node.members))
        return out

    def cluster_set(self) -> set[frozenset[str]]:
        """Distinct member groups across the whole tree."""
        return {frozenset(n.members) for n in self.nodes}

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "stage_count": self.stage_count,
            "thresholds": self.thresholds,
            "excluded_majors": self.excluded_majors,
            "log": self.log,
            "nodes": [
                {"id": n.id, "stage": n.stage, "parent": n.parent,
                 "members": list(n.members), "population": n.population,
                 "children": list(n.children), "dropouts": n.dropouts,
                 "dropout_rate": n.dropout_rate,
                 "dropout_confidence": n.dropout_confidence}
                for n in self.nodes
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MajorHierarchy":
        nodes = []
        for d in data["nodes"]:
            node = TreeNode(id=d["id"], stage=d["stage"],
                            members=tuple(d["members"]),
                            population=d["population"], parent=d["parent"],
                            children=list(d["children"]),
                            dropouts=d.get("dropouts", 0),
                            dropout_rate=d.get("dropout_rate", 0.0),
                            dropout_confidence=d.get("dropout_confidence"))
            nodes.append(node)
        return cls(nodes=nodes, stage_count=data["stage_count"],
                   thresholds=list(data["thresholds"]),
                   excluded_majors=list(data["excluded_majors"]),
                   log=list(data.get("log", [])))


def split_group(members: list[str], matrix: np.ndarray,
                theta: float) -> list[tuple[str, ...]]:
    """Partition a major group by connected components of a threshold graph.

    An edge joins two members when their similarity reaches theta times
    the largest off-diagonal entry. An all-zero matrix has no meaningful
    scale and dissolves the group into singletons. Components are ordered
    by their lexicographically smallest member.
    """
    n = len(members)
    if n < 2:
        raise ValueError("split_group requires at least 2 members")
    off = matrix.copy().astype(np.float64)
    np.fill_diagonal(off, 0.0)
    peak = float(off.max())
    if peak <= 0.0:
        return [(m,) for m in sorted(members)]
    adj = off >= theta * peak

    order = sorted(range(n), key=lambda i: members[i])
    seen = [False] * n
    components: list[tuple[str, ...]] = []
    for start in order:
        if seen[start]:
            continue
        stack, group = [start], []
        seen[start] = True
        while stack:
            i = stack.pop()
            group.append(i)
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    stack.append(int(j))
        components.append(tuple(sorted(members[i] for i in group)))
    return components


def node_population(store: RecordStore, node: TreeNode) -> int:
    """Graduation-record count over the node's member majors."""
    counts = store.graduate_counts()
    return int(sum(counts[store.major_index(m)] for m in node.members))


def build_hierarchy(store: RecordStore, stage_sets: StageCourseSets,
                    config: PipelineConfig | None = None) -> MajorHierarchy:
    """Build the staged major hierarchy over all majors with graduates."""
    config = config or PipelineConfig()
    grad_counts = store.graduate_counts()
    modeled_idx = np.flatnonzero(grad_counts > 0)
    excluded = [str(c) for c in store.major_codes[grad_counts == 0]]
    codes = [str(store.major_codes[i]) for i in modeled_idx]
    index_of = {c: int(i) for c, i in zip(codes, modeled_idx)}
    log: list[str] = []
    if excluded:
        log.append(f"excluded {len(excluded)} majors with zero graduates")

    def population(members: tuple[str, ...]) -> int:
        return int(sum(grad_counts[index_of[m]] for m in members))

    root = TreeNode(id=0, stage=0, members=tuple(codes),
                    population=population(tuple(codes)), parent=None)
    nodes = [root]
    frontier = [root]
    thresholds = [config.stage_threshold(t) for t in range(1, config.stage_count + 1)]

    for stage in range(1, config.stage_count + 1):
        stage_courses = stage_sets.sets[stage - 1]
        stage_empty = len(stage_courses) == 0
        if stage_empty:
            log.append(f"stage {stage}: empty course set, no splits")
        theta = thresholds[stage - 1]
        next_frontier: list[TreeNode] = []
        for node in frontier:
            if not node.members:
                continue  # empty catalog: root stays childless
            if len(node.members) == 1 and node.stage > 0:
                continue  # singleton leaves stop subdividing
            if len(node.members) == 1:
                # Singleton root still gets its one pass-through child so the
                # tree has at least one ring.
                parts = [node.members]
            elif stage_empty:
                parts = [node.members]
            else:
                member_idx = np.array([index_of[m] for m in node.members],
                                      dtype=np.int64)
                matrix = affinity.similarity_matrix(store, stage_courses, member_idx)
                parts = split_group(list(node.members), matrix, theta)
            for part in parts:
                child = TreeNode(id=len(nodes), stage=stage, members=tuple(part),
                                 population=population(tuple(part)), parent=node.id)
                nodes.append(child)
                node.children.append(child.id)
                next_frontier.append(child)
        frontier = next_frontier

    return MajorHierarchy(nodes=nodes, stage_count=config.stage_count,
                          thresholds=thresholds, excluded_majors=excluded, log=log)


def rf_distance(clusters_a: set[frozenset[str]],
                clusters_b: set[frozenset[str]]) -> int:
    """Symmetric-difference distance between two cluster collections."""
    return len(clusters_a ^ clusters_b)
