/** Radial flow view: one ring per stage, majors travelling together as
 *  ribbons, leaves carrying gray/red dropout bars. All geometry (angles,
 *  radii, ribbon widths, bar lengths, bar opacity) comes from the scene;
 *  this module only projects it to pixels. */

import { treeTooltip } from "./format.js";
import type { SimilarityDoc, TreeScene, TreeSceneNode } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RadialOptions {
  size?: number;
  tooltip?: HTMLElement | null;
  saturation?: SimilarityDoc | null;
  onHover?: (node: TreeSceneNode | null) => void;
}

interface Point {
  x: number;
  y: number;
}

function polar(cx: number, cy: number, angle: number, radius: number): Point {
  return { x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle) };
}

/** Saturation fraction for a leaf under an anchored similarity vector:
 *  the leaf's best value over its member majors, scaled so the vector's
 *  maximum is full saturation. */
export function saturationFraction(
  node: TreeSceneNode,
  doc: SimilarityDoc,
): number {
  const max = Math.max(...doc.values);
  if (!(max > 0)) return 0;
  let best = 0;
  for (const code of node.members) {
    const i = doc.majors.indexOf(code);
    const v = i >= 0 ? (doc.values[i] ?? 0) : 0;
    if (v > best) best = v;
  }
  return best / max;
}

export function renderTree(
  svg: SVGSVGElement,
  scene: TreeScene,
  options: RadialOptions = {},
): void {
  const size = options.size ?? 640;
  const cx = size / 2;
  const cy = size / 2;
  svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
  while (svg.firstChild) svg.removeChild(svg.firstChild);

  const maxRadius = Math.max(...scene.nodes.map((n) => n.radius), 1);
  const barSpan = Math.max(...scene.nodes.map((n) => n.bar?.gray ?? 0), 0);
  const scale = (size / 2 - 30) / (maxRadius + barSpan);
  const byId = new Map(scene.nodes.map((n) => [n.id, n]));

  const hover = (node: TreeSceneNode | null, at?: Point) => {
    const tip = options.tooltip;
    if (tip) {
      if (node) {
        tip.textContent = treeTooltip(node);
        tip.style.display = "block";
        if (at) {
          tip.style.left = `${at.x + 12}px`;
          tip.style.top = `${at.y + 12}px`;
        }
      } else {
        tip.style.display = "none";
      }
    }
    options.onHover?.(node);
  };

  const ribbons = document.createElementNS(SVG_NS, "g");
  ribbons.setAttribute("class", "ribbons");
  for (const ribbon of scene.ribbons) {
    const parent = byId.get(ribbon.parent);
    const child = byId.get(ribbon.child);
    if (!parent || !child) continue;
    const p = polar(cx, cy, parent.angle, parent.radius * scale);
    const c = polar(cx, cy, child.angle, child.radius * scale);
    const mid = polar(cx, cy, child.angle, parent.radius * scale);
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute(
      "d",
      `M ${p.x} ${p.y} Q ${mid.x} ${mid.y} ${c.x} ${c.y}`,
    );
    path.setAttribute("class", "ribbon");
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", "#9db8d2");
    path.setAttribute("stroke-width", String(ribbon.width * 6));
    path.setAttribute("data-parent", String(ribbon.parent));
    path.setAttribute("data-child", String(ribbon.child));
    ribbons.appendChild(path);
  }
  svg.appendChild(ribbons);

  const bars = document.createElementNS(SVG_NS, "g");
  bars.setAttribute("class", "bars");
  for (const node of scene.nodes) {
    if (!node.bar) continue;
    const start = node.radius * scale + 6;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "leaf-bar");
    group.setAttribute("data-id", String(node.id));
    group.setAttribute(
      "transform",
      `rotate(${(node.angle * 180) / Math.PI} ${cx} ${cy}) translate(${cx + start} ${cy - 2.5})`,
    );
    const gray = document.createElementNS(SVG_NS, "rect");
    gray.setAttribute("class", "bar-gray");
    gray.setAttribute("width", String(node.bar.gray * scale));
    gray.setAttribute("height", "5");
    gray.setAttribute("fill", "#c4c4c4");
    const red = document.createElementNS(SVG_NS, "rect");
    red.setAttribute("class", "bar-red");
    red.setAttribute("width", String(node.bar.red * scale));
    red.setAttribute("height", "5");
    red.setAttribute("fill", "#d62828");
    red.setAttribute("fill-opacity", String(node.bar.opacity));
    group.appendChild(gray);
    group.appendChild(red);
    group.addEventListener("mouseenter", () => hover(node));
    group.addEventListener("mouseleave", () => hover(null));
    bars.appendChild(group);
  }
  svg.appendChild(bars);

  const dots = document.createElementNS(SVG_NS, "g");
  dots.setAttribute("class", "tree-nodes");
  for (const node of scene.nodes) {
    const at = polar(cx, cy, node.angle, node.radius * scale);
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("class", node.bar ? "tree-node leaf" : "tree-node");
    circle.setAttribute("cx", String(at.x));
    circle.setAttribute("cy", String(at.y));
    circle.setAttribute("r", "5");
    circle.setAttribute("data-id", String(node.id));
    circle.setAttribute("data-label", node.label);
    if (options.saturation && node.bar) {
      const frac = saturationFraction(node, options.saturation);
      circle.setAttribute("data-saturation", String(frac));
      circle.setAttribute(
        "fill",
        `hsl(210 ${Math.round(frac * 100)}% 45%)`,
      );
    } else {
      circle.setAttribute("fill", "#2b6cb0");
    }
    circle.addEventListener("mouseenter", () => hover(node, at));
    circle.addEventListener("mouseleave", () => hover(null));
    dots.appendChild(circle);
  }
  svg.appendChild(dots);
}
