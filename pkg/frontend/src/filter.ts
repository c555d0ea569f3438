/** Client-side slider filtering over a served course scene.
 *
 *  Must stay edge-for-edge identical to the server's own re-filtering:
 *  an edge survives iff its weight is at or above the threshold, and a
 *  course is core iff its served rank is within the requested count.
 *  Anything below the served floor is the server's job, so it is
 *  rejected here the same way the server would reject it. */

import type { CourseEdge, CourseSceneNode, MajorScene } from "./types.js";

export class FilterError extends Error {
  readonly reason: string;

  constructor(reason: string, message: string) {
    super(message);
    this.name = "FilterError";
    this.reason = reason;
  }
}

export function filterEdges(edges: CourseEdge[], threshold: number): CourseEdge[] {
  return edges.filter((e) => e.c_value >= threshold);
}

export function flagCores(
  courses: CourseSceneNode[],
  coreCount: number,
): CourseSceneNode[] {
  return courses.map((c) => ({ ...c, core: c.core_rank <= coreCount }));
}

export function filterScene(
  scene: MajorScene,
  threshold?: number,
  coreCount?: number,
): MajorScene {
  const floor = scene.edge_floor;
  const t = threshold === undefined ? floor : threshold;
  if (t < floor) {
    throw new FilterError(
      "threshold_below_floor",
      `threshold ${t} is below the exported floor ${floor}`,
    );
  }
  const k = coreCount === undefined ? scene.core_count : coreCount;
  if (k < 1) {
    throw new FilterError("invalid_core_count", "cores must be at least 1");
  }
  return {
    ...scene,
    threshold: t,
    core_count: k,
    edges: filterEdges(scene.edges, t),
    courses: flagCores(scene.courses, k),
  };
}

/** Canonical identity of an edge, independent of list order. */
export function edgeKey(edge: CourseEdge): string {
  return edge.a < edge.b ? `${edge.a}|${edge.b}` : `${edge.b}|${edge.a}`;
}

export function edgeKeySet(edges: CourseEdge[]): Set<string> {
  return new Set(edges.map(edgeKey));
}
