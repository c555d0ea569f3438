import { beforeEach, describe, expect, it, vi } from "vitest";

import { App } from "../src/main.js";
import type { CourseDetail, MajorCatalog, MajorScene, SimilarityDoc, TreeScene } from "../src/types.js";
import { fixture } from "./helpers.js";

const catalog = fixture<MajorCatalog>("majors.json");
const tree = fixture<TreeScene>("tree.json");
const graph = fixture<MajorScene>("major_M000.json");
const details = fixture<Record<string, CourseDetail>>("course_details.json");
const similarity = fixture<SimilarityDoc>("similarity_M000.json");

const SHELL = `
  <button id="view-tree"></button>
  <button id="view-major"></button>
  <select id="major-select"></select>
  <select id="anchor-select"><option value="">off</option></select>
  <input id="threshold" type="range">
  <span id="threshold-value"></span>
  <input id="cores" type="number" min="1" value="6">
  <svg id="scene" xmlns="http://www.w3.org/2000/svg"></svg>
  <div id="tooltip"></div>
  <div id="panel"></div>
  <div id="banner"><span id="banner-text"></span><button id="banner-retry"></button></div>
`;

interface StubLog {
  urls: string[];
}

/** Serves the fixture documents the way the real API would, including the
 *  core re-flagging rule, plus one unmodeled major for routing tests. */
function stubServer(options: { failFirstTree?: boolean } = {}): StubLog {
  const log: StubLog = { urls: [] };
  const servedCatalog: MajorCatalog = JSON.parse(JSON.stringify(catalog));
  servedCatalog.majors.push({
    code: "MZZZ",
    name: "Mothballed Studies",
    graduates: 3,
    modeled: false,
  });
  let treeFailures = options.failFirstTree ? 1 : 0;

  const json = (body: unknown, status = 200) =>
    ({
      ok: status >= 200 && status < 300,
      status,
      json: () => Promise.resolve(JSON.parse(JSON.stringify(body))),
    }) as Response;

  vi.stubGlobal("fetch", (raw: string | URL) => {
    const url = String(raw);
    log.urls.push(url);
    const [path, query = ""] = url.split("?");
    const params = new URLSearchParams(query);
    if (path === "/api/majors") return Promise.resolve(json(servedCatalog));
    if (path === "/api/tree") {
      if (treeFailures > 0) {
        treeFailures -= 1;
        return Promise.reject(new Error("connection reset"));
      }
      return Promise.resolve(json(tree));
    }
    if (path === "/api/major/M000/graph") {
      const k = params.has("cores")
        ? Number(params.get("cores"))
        : graph.core_count;
      const doc: MajorScene = JSON.parse(JSON.stringify(graph));
      doc.core_count = k;
      doc.courses = doc.courses.map((c) => ({ ...c, core: c.core_rank <= k }));
      return Promise.resolve(json(doc));
    }
    const detail = path.match(/^\/api\/major\/M000\/course\/(.+)$/);
    if (detail && details[detail[1]!]) {
      return Promise.resolve(json(details[detail[1]!]));
    }
    if (path === "/api/similarity/M000") {
      return Promise.resolve(json(similarity));
    }
    return Promise.resolve(
      json({ code: 404, reason: "route_not_found", message: "Not Found" }, 404),
    );
  });
  return log;
}

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

async function settle(): Promise<void> {
  for (let turn = 0; turn < 5; turn += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

beforeEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = SHELL;
  location.hash = "";
});

describe("app wiring", () => {
  it("boots into the tree view with the catalog loaded", async () => {
    stubServer();
    const app = new App();
    await app.start();
    const select = el<HTMLSelectElement>("major-select");
    expect(select.options.length).toBe(catalog.majors.length + 1);
    const ghost = [...select.options].find((o) => o.value === "MZZZ")!;
    expect(ghost.disabled).toBe(true);
    expect(document.querySelectorAll("circle.tree-node").length).toBe(
      tree.nodes.length,
    );
  });

  it("routes an unknown major hash back to the picker with a banner", async () => {
    stubServer();
    location.hash = "#major=NOPE";
    const app = new App();
    await app.start();
    expect(el("banner").style.display).toBe("block");
    expect(el("banner-text").textContent).toContain("unknown major NOPE");
    expect(document.querySelectorAll("circle.tree-node").length).toBe(
      tree.nodes.length,
    );
  });

  it("selecting a modeled major renders its graph and sets the hash", async () => {
    const log = stubServer();
    const app = new App();
    await app.start();
    const select = el<HTMLSelectElement>("major-select");
    select.value = "M000";
    select.dispatchEvent(new Event("change"));
    await settle();
    expect(location.hash).toBe("#major=M000");
    expect(document.querySelectorAll("g.course").length).toBe(
      graph.courses.length,
    );
    expect(document.querySelectorAll("line.edge").length).toBe(
      graph.edges.length,
    );
    expect(log.urls.filter((u) => u.includes("/graph")).length).toBe(1);
  });

  it("an unmodeled selection shows a banner instead of fetching", async () => {
    const log = stubServer();
    const app = new App();
    await app.start();
    await app.showMajor("MZZZ");
    expect(el("banner-text").textContent).toContain("not modeled");
    expect(log.urls.some((u) => u.includes("MZZZ"))).toBe(false);
  });

  it("the slider refilters client-side without another graph fetch", async () => {
    const log = stubServer();
    const app = new App();
    await app.start();
    await app.showMajor("M000");
    const before = log.urls.filter((u) => u.includes("/graph")).length;
    const values = graph.edges.map((e) => e.c_value).sort((a, b) => a - b);
    const theta = values[Math.floor(values.length / 2)]!;
    const slider = el<HTMLInputElement>("threshold");
    slider.value = String(theta);
    slider.dispatchEvent(new Event("input"));
    const survivors = graph.edges.filter((e) => e.c_value >= theta).length;
    expect(document.querySelectorAll("line.edge").length).toBe(survivors);
    expect(log.urls.filter((u) => u.includes("/graph")).length).toBe(before);
  });

  it("changing the core count refetches and flags exactly k nodes", async () => {
    const log = stubServer();
    const app = new App();
    await app.start();
    await app.showMajor("M000");
    const cores = el<HTMLInputElement>("cores");
    cores.value = "2";
    cores.dispatchEvent(new Event("change"));
    await settle();
    expect(log.urls.some((u) => u.includes("cores=2"))).toBe(true);
    expect(
      document.querySelectorAll('g.course[data-core="true"]').length,
    ).toBe(2);
  });

  it("clicking a course fills the panel with the served histogram", async () => {
    stubServer();
    const app = new App();
    await app.start();
    await app.showMajor("M000");
    const courseId = Object.keys(details)[0]!;
    document
      .querySelector(`g.course[data-id="${courseId}"]`)!
      .dispatchEvent(new Event("click"));
    await settle();
    const panel = el("panel");
    expect(panel.style.display).toBe("block");
    const lines = [...panel.children].map((c) => c.textContent);
    expect(lines[0]).toBe(`${courseId} in M000`);
    expect(lines[lines.length - 1]).toBe(
      `enrolled: ${details[courseId]!.enrollment}`,
    );
  });

  it("a fetch failure raises a retryable banner and retry recovers", async () => {
    stubServer({ failFirstTree: true });
    const app = new App();
    await app.start();
    expect(el("banner").style.display).toBe("block");
    expect(el("banner-text").textContent).toContain("network_error");
    expect(document.querySelectorAll("circle.tree-node").length).toBe(0);
    el("banner-retry").dispatchEvent(new Event("click"));
    await settle();
    expect(document.querySelectorAll("circle.tree-node").length).toBe(
      tree.nodes.length,
    );
  });

  it("anchoring similarity saturates the rendered leaves", async () => {
    stubServer();
    const app = new App();
    await app.start();
    const anchor = el<HTMLSelectElement>("anchor-select");
    anchor.value = "M000";
    anchor.dispatchEvent(new Event("change"));
    await settle();
    const saturations = [
      ...document.querySelectorAll("circle[data-saturation]"),
    ].map((c) => Number(c.getAttribute("data-saturation")));
    expect(saturations.length).toBeGreaterThan(0);
    expect(Math.max(...saturations)).toBe(1);
  });
});
