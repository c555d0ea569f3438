/** Wires the controls, the two views, the tooltip, the course panel, and
 *  the error banner together. Model quantities are never recomputed here;
 *  the only client-side derivation is slider filtering of served edges. */

import { ApiError, getCourseDetail, getMajorGraph, getMajors, getSimilarity, getTree } from "./api.js";
import { courseDetailLines } from "./format.js";
import { renderMajor } from "./nodelink.js";
import { renderTree } from "./radial.js";
import { Store } from "./state.js";
import type { MajorCatalog, MajorScene, SimilarityDoc, TreeScene } from "./types.js";

interface Elements {
  viewTree: HTMLButtonElement;
  viewMajor: HTMLButtonElement;
  majorSelect: HTMLSelectElement;
  anchorSelect: HTMLSelectElement;
  threshold: HTMLInputElement;
  thresholdValue: HTMLElement;
  cores: HTMLInputElement;
  svg: SVGSVGElement;
  tooltip: HTMLElement;
  panel: HTMLElement;
  banner: HTMLElement;
  bannerText: HTMLElement;
  bannerRetry: HTMLButtonElement;
}

function grab(): Elements {
  const byId = <T extends Element>(id: string) =>
    document.getElementById(id) as unknown as T;
  return {
    viewTree: byId("view-tree"),
    viewMajor: byId("view-major"),
    majorSelect: byId("major-select"),
    anchorSelect: byId("anchor-select"),
    threshold: byId("threshold"),
    thresholdValue: byId("threshold-value"),
    cores: byId("cores"),
    svg: byId("scene"),
    tooltip: byId("tooltip"),
    panel: byId("panel"),
    banner: byId("banner"),
    bannerText: byId("banner-text"),
    bannerRetry: byId("banner-retry"),
  };
}

export class App {
  readonly store = new Store();
  private readonly el: Elements;
  private catalog: MajorCatalog | null = null;
  private tree: TreeScene | null = null;
  private graph: MajorScene | null = null;
  private similarity: SimilarityDoc | null = null;
  private retry: (() => void) | null = null;

  constructor(elements?: Elements) {
    this.el = elements ?? grab();
    this.el.viewTree.addEventListener("click", () => this.showTree());
    this.el.viewMajor.addEventListener("click", () => {
      const code = this.el.majorSelect.value;
      if (code) this.showMajor(code);
    });
    this.el.majorSelect.addEventListener("change", () => {
      this.showMajor(this.el.majorSelect.value);
    });
    this.el.anchorSelect.addEventListener("change", () => {
      this.setAnchor(this.el.anchorSelect.value || null);
    });
    this.el.threshold.addEventListener("input", () => {
      this.store.update({ threshold: Number(this.el.threshold.value) });
      this.paint();
    });
    this.el.cores.addEventListener("change", () => {
      this.setCores(Number(this.el.cores.value));
    });
    this.el.bannerRetry.addEventListener("click", () => {
      this.el.banner.style.display = "none";
      this.retry?.();
    });
  }

  async start(): Promise<void> {
    await this.guard(async () => {
      this.catalog = await getMajors();
      this.fillSelectors();
      const requested = location.hash.startsWith("#major=")
        ? decodeURIComponent(location.hash.slice(7))
        : null;
      if (requested && this.modeledCodes().includes(requested)) {
        await this.showMajor(requested);
      } else {
        if (requested) {
          this.showBanner(`unknown major ${requested}; pick one below`, null);
        }
        await this.showTree();
      }
    }, () => this.start());
  }

  private modeledCodes(): string[] {
    return (this.catalog?.majors ?? [])
      .filter((m) => m.modeled)
      .map((m) => m.code);
  }

  private fillSelectors(): void {
    for (const select of [this.el.majorSelect, this.el.anchorSelect]) {
      while (select.options.length > (select === this.el.anchorSelect ? 1 : 0)) {
        select.remove(select.options.length - 1);
      }
    }
    for (const major of this.catalog?.majors ?? []) {
      const option = document.createElement("option");
      option.value = major.code;
      option.textContent = `${major.code} ${major.name}`;
      option.disabled = !major.modeled;
      this.el.majorSelect.appendChild(option);
      this.el.anchorSelect.appendChild(option.cloneNode(true) as HTMLOptionElement);
    }
  }

  async showTree(): Promise<void> {
    const ticket = this.store.begin();
    await this.guard(async () => {
      const tree = this.tree ?? (await getTree());
      this.tree = tree;
      if (this.store.commit(ticket, { view: "tree" })) this.paint();
    }, () => this.showTree());
  }

  async showMajor(code: string): Promise<void> {
    if (!this.modeledCodes().includes(code)) {
      this.showBanner(`major ${code} is not modeled; pick another`, null);
      return;
    }
    const ticket = this.store.begin();
    await this.guard(async () => {
      const graph = await getMajorGraph(code);
      this.graph = graph;
      location.hash = `major=${encodeURIComponent(code)}`;
      const committed = this.store.commit(ticket, {
        view: "major",
        major: code,
        thresholdFloor: graph.edge_floor,
        threshold: graph.edge_floor,
        coreCount: graph.core_count,
      });
      if (committed) {
        this.syncControls(graph);
        this.paint();
      }
    }, () => this.showMajor(code));
  }

  async setAnchor(code: string | null): Promise<void> {
    if (!code) {
      this.similarity = null;
      this.store.update({ anchor: null });
      this.paint();
      return;
    }
    const ticket = this.store.begin();
    await this.guard(async () => {
      const doc = await getSimilarity(code);
      this.similarity = doc;
      if (this.store.commit(ticket, { anchor: code })) this.paint();
    }, () => this.setAnchor(code));
  }

  /** Core-count change refetches so the flags are the server's. */
  async setCores(k: number): Promise<void> {
    const state = this.store.get();
    if (!state.major) return;
    const ticket = this.store.begin();
    await this.guard(async () => {
      const graph = await getMajorGraph(state.major as string, { cores: k });
      this.graph = graph;
      if (this.store.commit(ticket, { coreCount: graph.core_count })) {
        this.paint();
      }
    }, () => this.setCores(k));
  }

  private syncControls(graph: MajorScene): void {
    const cs = graph.edges.map((e) => e.c_value);
    const top = cs.length ? Math.max(...cs) : graph.edge_floor;
    this.el.threshold.min = String(graph.edge_floor);
    this.el.threshold.max = String(top + 1);
    this.el.threshold.step = "any";
    this.el.threshold.value = String(graph.edge_floor);
    this.el.cores.min = "1";
    this.el.cores.value = String(graph.core_count);
  }

  private paint(): void {
    const state = this.store.get();
    this.el.thresholdValue.textContent = state.threshold.toFixed(1);
    if (state.view === "tree" && this.tree) {
      renderTree(this.el.svg, this.tree, {
        tooltip: this.el.tooltip,
        saturation: this.similarity,
      });
    } else if (state.view === "major" && this.graph) {
      renderMajor(this.el.svg, this.graph, {
        threshold: state.threshold,
        coreCount: state.coreCount,
        tooltip: this.el.tooltip,
        onCourseClick: (course) => void this.openPanel(course.id),
      });
    }
  }

  async openPanel(courseId: string): Promise<void> {
    const state = this.store.get();
    if (!state.major) return;
    await this.guard(async () => {
      const detail = await getCourseDetail(state.major as string, courseId);
      this.el.panel.textContent = "";
      for (const line of courseDetailLines(detail)) {
        const row = document.createElement("div");
        row.textContent = line;
        this.el.panel.appendChild(row);
      }
      this.el.panel.style.display = "block";
    }, () => this.openPanel(courseId));
  }

  private showBanner(message: string, retry: (() => void) | null): void {
    this.el.bannerText.textContent = message;
    this.el.banner.style.display = "block";
    this.retry = retry;
    this.el.bannerRetry.style.display = retry ? "inline-block" : "none";
  }

  private async guard(
    work: () => Promise<void>,
    retry: () => void,
  ): Promise<void> {
    try {
      await work();
    } catch (err) {
      if (err instanceof ApiError) {
        this.showBanner(`${err.reason}: ${err.message}`, retry);
      } else {
        this.showBanner(String(err), retry);
      }
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
  void new App().start();
}
