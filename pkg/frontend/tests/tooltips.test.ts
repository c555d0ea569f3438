import { describe, expect, it } from "vitest";

import { courseDetailLines, courseTooltip, formatPercent, treeTooltip } from "../src/format.js";
import { renderMajor } from "../src/nodelink.js";
import { renderTree } from "../src/radial.js";
import type { CourseDetail, MajorScene, TreeScene, TreeSceneNode } from "../src/types.js";
import { fixture, makeSvg, type ExpectedTooltips } from "./helpers.js";

const tree = fixture<TreeScene>("tree.json");
const scene = fixture<MajorScene>("major_M000.json");
const details = fixture<Record<string, CourseDetail>>("course_details.json");
const expected = fixture<ExpectedTooltips>("expected_tooltips.json");

function hoverText(
  root: SVGSVGElement,
  tooltip: HTMLElement,
  selector: string,
): string {
  const target = root.querySelector(selector);
  expect(target).not.toBeNull();
  target!.dispatchEvent(new Event("mouseenter"));
  expect(tooltip.style.display).toBe("block");
  const text = tooltip.textContent ?? "";
  target!.dispatchEvent(new Event("mouseleave"));
  expect(tooltip.style.display).toBe("none");
  return text;
}

describe("percent formatting", () => {
  it("rounds half-up to two decimals", () => {
    expect(formatPercent(0.6371)).toBe("63.71%");
    expect(formatPercent(0.63705)).toBe("63.71%");
    expect(formatPercent(0.637049)).toBe("63.70%");
    expect(formatPercent(0)).toBe("0.00%");
    expect(formatPercent(1)).toBe("100.00%");
    expect(formatPercent(0.005)).toBe("0.50%");
  });
});

describe("tree tooltips match the golden strings", () => {
  it("renders every node's hover text verbatim from the scene", () => {
    const svg = makeSvg();
    const tooltip = document.createElement("div");
    renderTree(svg, tree, { tooltip });
    for (const node of tree.nodes) {
      const text = hoverText(svg, tooltip, `circle[data-id="${node.id}"]`);
      expect(text).toBe(expected.tree[String(node.id)]);
    }
  });

  it("shows counts, not rates, and skips confidence only when absent", () => {
    const withConfidence: TreeSceneNode = {
      id: 99,
      stage: 8,
      angle: 0,
      radius: 1,
      population: 3092,
      members: ["PSY"],
      label: "Psychology",
      dropout: { count: 159, rate: 0.0489, confidence: 0.6371 },
    };
    expect(treeTooltip(withConfidence)).toBe(
      "3092 graduated, 159 dropped out, 63.71% confidence",
    );
    const noConfidence = {
      ...withConfidence,
      dropout: { count: 0, rate: 0, confidence: null },
    };
    expect(treeTooltip(noConfidence)).toBe("3092 graduated, 0 dropped out");
  });

  it("bar hover uses the same text as the node hover", () => {
    const svg = makeSvg();
    const tooltip = document.createElement("div");
    renderTree(svg, tree, { tooltip });
    const leaf = tree.nodes.find((n) => n.bar);
    expect(leaf).toBeDefined();
    const text = hoverText(svg, tooltip, `g.leaf-bar[data-id="${leaf!.id}"]`);
    expect(text).toBe(expected.tree[String(leaf!.id)]);
  });
});

describe("course tooltips match the golden strings", () => {
  it("renders every course's hover text verbatim from the scene", () => {
    const svg = makeSvg();
    const tooltip = document.createElement("div");
    renderMajor(svg, scene, { tooltip });
    for (const course of scene.courses) {
      const text = hoverText(svg, tooltip, `g.course[data-id="${course.id}"]`);
      expect(text).toBe(expected.courses[course.id]);
    }
  });

  it("format helper agrees with the goldens without the DOM", () => {
    for (const course of scene.courses) {
      expect(courseTooltip(course)).toBe(expected.courses[course.id]);
    }
  });
});

describe("course detail panel", () => {
  it("lines match the golden strings verbatim", () => {
    for (const [courseId, detail] of Object.entries(details)) {
      expect(courseDetailLines(detail)).toEqual(expected.panel[courseId]);
    }
  });

  it("histogram lines sum to the served enrollment", () => {
    for (const detail of Object.values(details)) {
      const total = Object.values(detail.histogram).reduce((a, b) => a + b, 0);
      expect(total).toBe(detail.enrollment);
    }
  });
});
