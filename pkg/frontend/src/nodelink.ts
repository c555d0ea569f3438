/** Per-major course map: courses on a semester axis, edges weighted by
 *  the served C value, nodes sized by the served radius with a gender
 *  pie inside. The slider filter runs here, client-side, against the
 *  full exported scene; it must agree with the server's filtering. */

import { filterScene } from "./filter.js";
import { courseTooltip } from "./format.js";
import type { CourseSceneNode, MajorScene } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface NodeLinkOptions {
  width?: number;
  height?: number;
  threshold?: number;
  coreCount?: number;
  tooltip?: HTMLElement | null;
  onCourseClick?: (course: CourseSceneNode) => void;
  onHover?: (course: CourseSceneNode | null) => void;
}

/** Pie wedge from startFrac to endFrac of a full turn, starting at 12
 *  o'clock. Returns "" for an empty span; a full turn needs two arcs. */
export function wedgePath(
  cx: number,
  cy: number,
  r: number,
  startFrac: number,
  endFrac: number,
): string {
  const span = endFrac - startFrac;
  if (span <= 0) return "";
  if (span >= 1) {
    return (
      `M ${cx} ${cy - r} ` +
      `A ${r} ${r} 0 1 1 ${cx} ${cy + r} ` +
      `A ${r} ${r} 0 1 1 ${cx} ${cy - r} Z`
    );
  }
  const a0 = -Math.PI / 2 + 2 * Math.PI * startFrac;
  const a1 = -Math.PI / 2 + 2 * Math.PI * endFrac;
  const x0 = cx + r * Math.cos(a0);
  const y0 = cy + r * Math.sin(a0);
  const x1 = cx + r * Math.cos(a1);
  const y1 = cy + r * Math.sin(a1);
  const large = span > 0.5 ? 1 : 0;
  return `M ${cx} ${cy} L ${x0} ${y0} A ${r} ${r} 0 ${large} 1 ${x1} ${y1} Z`;
}

export function renderMajor(
  svg: SVGSVGElement,
  scene: MajorScene,
  options: NodeLinkOptions = {},
): void {
  const width = options.width ?? 900;
  const height = options.height ?? 560;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  while (svg.firstChild) svg.removeChild(svg.firstChild);

  const view = filterScene(scene, options.threshold, options.coreCount);

  const xs = view.courses.map((c) => c.x);
  const ys = view.courses.map((c) => Math.abs(c.y));
  const x0 = Math.min(...xs, 1);
  const x1 = Math.max(...xs, x0 + 1);
  const ySpan = Math.max(...ys, 0.5);
  const margin = 50;
  const px = (x: number) => margin + ((x - x0) / (x1 - x0)) * (width - 2 * margin);
  const py = (y: number) => height / 2 - (y / ySpan) * (height / 2 - margin);
  // edge thickness stays proportional to the full export's largest weight
  // so moving the slider never rescales the surviving edges
  const maxC = Math.max(...scene.edges.map((e) => Math.abs(e.c_value)), 1);
  const widthFor = (c: number) => (Math.max(c, 0) / maxC) * 5;

  const hover = (course: CourseSceneNode | null) => {
    const tip = options.tooltip;
    if (tip) {
      if (course) {
        tip.textContent = courseTooltip(course);
        tip.style.display = "block";
      } else {
        tip.style.display = "none";
      }
    }
    options.onHover?.(course);
  };

  const courseAt = new Map(view.courses.map((c) => [c.id, c]));
  const edges = document.createElementNS(SVG_NS, "g");
  edges.setAttribute("class", "edges");
  for (const edge of view.edges) {
    const a = courseAt.get(edge.a);
    const b = courseAt.get(edge.b);
    if (!a || !b) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("class", "edge");
    line.setAttribute("x1", String(px(a.x)));
    line.setAttribute("y1", String(py(a.y)));
    line.setAttribute("x2", String(px(b.x)));
    line.setAttribute("y2", String(py(b.y)));
    line.setAttribute("stroke", "#8a97a8");
    line.setAttribute("stroke-width", String(widthFor(edge.c_value)));
    line.setAttribute("data-a", edge.a);
    line.setAttribute("data-b", edge.b);
    line.setAttribute("data-c", String(edge.c_value));
    edges.appendChild(line);
  }
  svg.appendChild(edges);

  const nodes = document.createElementNS(SVG_NS, "g");
  nodes.setAttribute("class", "courses");
  for (const course of view.courses) {
    const gx = px(course.x);
    const gy = py(course.y);
    const r = Math.max(course.radius * 45, 4);
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", course.core ? "course core" : "course");
    group.setAttribute("transform", `translate(${gx} ${gy})`);
    group.setAttribute("data-id", course.id);
    group.setAttribute("data-core", String(course.core));

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("r", String(r));
    circle.setAttribute("fill", "#f5f7fa");
    circle.setAttribute("stroke", course.core ? "#d97706" : "#64748b");
    circle.setAttribute("stroke-width", course.core ? "3" : "1.5");
    group.appendChild(circle);

    const slices: Array<[keyof typeof course.gender, string]> = [
      ["f", "#c2589b"],
      ["m", "#4a7fb5"],
      ["u", "#9aa3ad"],
    ];
    let acc = 0;
    for (const [key, color] of slices) {
      const frac = course.gender[key];
      const d = wedgePath(0, 0, r * 0.72, acc, acc + frac);
      acc += frac;
      if (!d) continue;
      const wedge = document.createElementNS(SVG_NS, "path");
      wedge.setAttribute("class", `pie pie-${key}`);
      wedge.setAttribute("d", d);
      wedge.setAttribute("fill", color);
      wedge.setAttribute("data-frac", String(frac));
      group.appendChild(wedge);
    }

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("class", "course-label");
    label.setAttribute("y", String(r + 12));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("font-size", "10");
    label.textContent = course.id;
    group.appendChild(label);

    group.addEventListener("mouseenter", () => hover(course));
    group.addEventListener("mouseleave", () => hover(null));
    group.addEventListener("click", () => options.onCourseClick?.(course));
    nodes.appendChild(group);
  }
  svg.appendChild(nodes);
}
