import { readFileSync } from "node:fs";
import { join } from "node:path";

export function fixture<T>(name: string): T {
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export interface FilterCase {
  threshold: number;
  cores: number;
  status: number;
  edges: [string, string][];
  core_ids: string[];
}

export interface RejectedCase {
  params: Record<string, number>;
  status: number;
  reason: string;
}

export interface ServerFiltered {
  major: string;
  cases: FilterCase[];
  rejected: RejectedCase[];
}

export interface ExpectedTooltips {
  tree: Record<string, string>;
  courses: Record<string, string>;
  panel: Record<string, string[]>;
}

export function pairKey(a: string, b: string): string {
  return a < b ? `${a}|${b}` : `${b}|${a}`;
}

export function sortedKeys(pairs: [string, string][]): string[] {
  return pairs.map(([a, b]) => pairKey(a, b)).sort();
}

export function makeSvg(): SVGSVGElement {
  return document.createElementNS(
    "http://www.w3.org/2000/svg",
    "svg",
  ) as SVGSVGElement;
}
