/** Shapes of the documents the analytics API serves. The client treats
 *  every numeric field as display data; nothing here is recomputed. */

export interface MajorEntry {
  code: string;
  name: string;
  graduates: number;
  modeled: boolean;
}

export interface MajorCatalog {
  schema_version: number;
  majors: MajorEntry[];
}

export interface DropoutInfo {
  count: number;
  rate: number;
  confidence: number | null;
}

export interface LeafBar {
  gray: number;
  red: number;
  opacity: number;
}

export interface TreeSceneNode {
  id: number;
  stage: number;
  angle: number;
  radius: number;
  population: number;
  members: string[];
  label: string;
  dropout: DropoutInfo;
  bar?: LeafBar;
}

export interface Ribbon {
  parent: number;
  child: number;
  width: number;
}

export interface TreeScene {
  schema_version: number;
  nodes: TreeSceneNode[];
  ribbons: Ribbon[];
}

export interface GenderSplit {
  f: number;
  m: number;
  u: number;
}

export interface CourseSceneNode {
  id: string;
  x: number;
  y: number;
  radius: number;
  core: boolean;
  core_rank: number;
  enrollment: number;
  failure_rate: number;
  gender: GenderSplit;
  histogram: Record<string, number>;
}

export interface CourseEdge {
  a: string;
  b: string;
  c_value: number;
}

export interface MajorScene {
  schema_version: number;
  major: string;
  edge_floor: number;
  threshold: number;
  core_count: number;
  courses: CourseSceneNode[];
  edges: CourseEdge[];
}

export interface CourseDetail {
  major: string;
  course: string;
  enrollment: number;
  failure_rate: number;
  gender: GenderSplit;
  histogram: Record<string, number>;
}

export interface SimilarityDoc {
  schema_version: number;
  major: string;
  majors: string[];
  values: number[];
  stages: Record<string, number[]>;
}

export interface ApiErrorPayload {
  code: number;
  reason: string;
  message: string;
}
