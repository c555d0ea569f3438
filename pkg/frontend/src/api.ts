/** Thin fetch wrappers over the analytics API. Query parameters are
 *  attached only when the caller overrides a served default, so plain
 *  requests return the exported document unchanged. */

import type {
  ApiErrorPayload,
  CourseDetail,
  MajorCatalog,
  MajorScene,
  SimilarityDoc,
  TreeScene,
} from "./types.js";

export class ApiError extends Error {
  readonly code: number;
  readonly reason: string;

  constructor(payload: ApiErrorPayload) {
    super(payload.message);
    this.name = "ApiError";
    this.code = payload.code;
    this.reason = payload.reason;
  }
}

async function fetchJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch (err) {
    throw new ApiError({
      code: 0,
      reason: "network_error",
      message: err instanceof Error ? err.message : String(err),
    });
  }
  if (!response.ok) {
    let payload: ApiErrorPayload;
    try {
      payload = (await response.json()) as ApiErrorPayload;
    } catch {
      payload = {
        code: response.status,
        reason: "http_error",
        message: response.statusText,
      };
    }
    throw new ApiError(payload);
  }
  return (await response.json()) as T;
}

export function getMajors(base = ""): Promise<MajorCatalog> {
  return fetchJson(`${base}/api/majors`);
}

export function getTree(base = ""): Promise<TreeScene> {
  return fetchJson(`${base}/api/tree`);
}

export function getMajorGraph(
  code: string,
  options: { threshold?: number; cores?: number } = {},
  base = "",
): Promise<MajorScene> {
  const params = new URLSearchParams();
  if (options.threshold !== undefined) {
    params.set("threshold", String(options.threshold));
  }
  if (options.cores !== undefined) {
    params.set("cores", String(options.cores));
  }
  const query = params.toString();
  const suffix = query ? `?${query}` : "";
  return fetchJson(
    `${base}/api/major/${encodeURIComponent(code)}/graph${suffix}`,
  );
}

export function getCourseDetail(
  code: string,
  courseId: string,
  base = "",
): Promise<CourseDetail> {
  return fetchJson(
    `${base}/api/major/${encodeURIComponent(code)}/course/${encodeURIComponent(courseId)}`,
  );
}

export function getSimilarity(code: string, base = ""): Promise<SimilarityDoc> {
  return fetchJson(`${base}/api/similarity/${encodeURIComponent(code)}`);
}
