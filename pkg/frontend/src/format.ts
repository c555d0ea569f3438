/** Tooltip and panel text. Counts are echoed exactly as served; the only
 *  transformation anywhere is fraction-to-percent display formatting. */

import type {
  CourseDetail,
  CourseSceneNode,
  TreeSceneNode,
} from "./types.js";

/** Fraction to a fixed two-decimal percent string, half-up on the fourth
 *  decimal of the fraction (0.63705 -> "63.71%", 0.0 -> "0.00%"). */
export function formatPercent(fraction: number): string {
  const basisPoints = Math.floor(fraction * 10000 + 0.5);
  const whole = Math.floor(basisPoints / 100);
  const cents = String(basisPoints % 100).padStart(2, "0");
  return `${whole}.${cents}%`;
}

export function treeTooltip(node: TreeSceneNode): string {
  const parts = [
    `${node.population} graduated`,
    `${node.dropout.count} dropped out`,
  ];
  if (node.dropout.confidence !== null) {
    parts.push(`${formatPercent(node.dropout.confidence)} confidence`);
  }
  return parts.join(", ");
}

export function courseTooltip(course: CourseSceneNode): string {
  return (
    `${course.id}: ${course.enrollment} students, ` +
    `${formatPercent(course.failure_rate)} failed`
  );
}

/** Panel lines for the course detail view: one line per grade token in
 *  served order, then the enrollment total. */
export function courseDetailLines(detail: CourseDetail): string[] {
  const lines = [`${detail.course} in ${detail.major}`];
  for (const [token, count] of Object.entries(detail.histogram)) {
    lines.push(`${token}: ${count}`);
  }
  lines.push(`enrolled: ${detail.enrollment}`);
  return lines;
}
