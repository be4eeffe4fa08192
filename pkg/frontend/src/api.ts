// Typed client for the project service. Every mutation carries the caller's
// revision and the server answers with the new one; a stale revision comes
// back as a 409 ApiError with code "RevisionConflict".

export type FeatureId = [number, number];
export type ComponentRef = [number, string];

export interface Score {
  cosine: number;
  bleu1: number;
  bleu2: number;
  combined: number;
}

export interface MappingEntry {
  feature_id: FeatureId;
  component_ref: ComponentRef;
  score: Score;
  origin: "suggested" | "user";
  stale: boolean;
}

export interface ClaimFeature {
  claim_number: number;
  index: number;
  text: string;
  enriched_text: string;
}

export interface Claim {
  number: number;
  kind: "independent" | "dependent";
  depends_on: number | null;
  preamble: string;
  features: ClaimFeature[];
  raw_text: string;
  multi_dependent: boolean;
}

export interface DrawingComponent {
  name: string;
  number: string;
  figure: number;
}

export interface Figure {
  figure_number: number;
  source_label: string;
  raw_text: string;
  components: DrawingComponent[];
  brief_description: string;
  enriched_description: string;
  warnings: string[];
}

export interface SpecResult {
  feature_id: FeatureId;
  raw: string;
  cleaned: string;
  paragraphs: string[];
  warnings: string[];
  status: "ok" | "failed" | "timeout";
  diagnostic: string;
}

export interface Project {
  project_id: string;
  name: string;
  revision: number;
  created_at: string;
  updated_at: string;
  claims_text: string;
  claims: Claim[];
  figures: Figure[];
  mappings: { entries: MappingEntry[] };
  results: SpecResult[];
  warnings: string[];
}

export interface ProjectSummary {
  project_id: string;
  name: string;
  revision: number;
  created_at: string;
  updated_at: string;
  claim_count: number;
  figure_count: number;
  mapping_count: number;
  result_count: number;
}

export interface SuggestionFeature {
  feature_id: FeatureId;
  text: string;
  entries: Array<MappingEntry & { component_name: string }>;
}

export interface SuggestionsPayload {
  project_id: string;
  revision: number;
  threshold: number;
  k: number;
  ephemeral: boolean;
  features: SuggestionFeature[];
}

export interface JobView {
  job_id: string;
  project_id: string;
  backend: string;
  requested: number;
  status: "queued" | "running" | "done" | "failed";
  created_at: string;
  started_at: string | null;
  finished_at: string | null;
  error: string | null;
  summary: {
    count: number;
    mean_seconds: number;
    stddev_seconds: number;
    total_seconds: number;
  } | null;
  result_statuses: Record<string, number> | null;
}

export interface SpecificationView {
  project_id: string;
  revision: number;
  results: SpecResult[];
}

export interface RequestLogEntry {
  method: string;
  path: string;
  status: number;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiClientOptions {
  fetchImpl?: FetchLike;
  token?: string;
}

/** Error for any non-2xx response, keeping the server's error code. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly body: Record<string, unknown>;

  constructor(status: number, body: Record<string, unknown>) {
    const code =
      typeof body.error === "string" ? body.error : `Http${status}`;
    const message =
      typeof body.message === "string"
        ? body.message
        : typeof body.detail === "string"
          ? body.detail
          : code;
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.body = body;
  }
}

export function featureKey(id: FeatureId): string {
  return `${id[0]}.${id[1]}`;
}

export function componentKey(ref: ComponentRef): string {
  return `${ref[0]}:${ref[1]}`;
}

export class ApiClient {
  readonly baseUrl: string;
  /** One entry per HTTP request this client has made, in order. */
  readonly log: RequestLogEntry[] = [];
  private readonly fetchImpl: FetchLike;
  private readonly token: string | undefined;

  constructor(baseUrl = "", options: ApiClientOptions = {}) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    // Wrapped so a bare window.fetch is still called with a legal receiver.
    this.fetchImpl =
      options.fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
    this.token = options.token;
  }

  private async send(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<Response> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token !== undefined) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      this.log.push({ method, path, status: 0 });
      throw err;
    }
    this.log.push({ method, path, status: response.status });
    return response;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.send(method, path, body);
    const text = await response.text();
    let data: Record<string, unknown> = {};
    if (text) {
      try {
        data = JSON.parse(text) as Record<string, unknown>;
      } catch {
        data = { detail: text };
      }
    }
    if (!response.ok) throw new ApiError(response.status, data);
    return data as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  listProjects(): Promise<{ projects: ProjectSummary[] }> {
    return this.request("GET", "/projects");
  }

  createProject(
    name: string,
    projectId?: string,
  ): Promise<{ project_id: string; revision: number }> {
    const body: Record<string, string> = { name };
    if (projectId !== undefined) body.project_id = projectId;
    return this.request("POST", "/projects", body);
  }

  getProject(projectId: string): Promise<Project> {
    return this.request("GET", `/projects/${projectId}`);
  }

  deleteProject(projectId: string): Promise<void> {
    return this.request("DELETE", `/projects/${projectId}`);
  }

  exportProject(projectId: string): Promise<Project> {
    return this.request("GET", `/projects/${projectId}/export`);
  }

  uploadClaims(
    projectId: string,
    claimsText: string,
    revision: number,
  ): Promise<Project> {
    return this.request("POST", `/projects/${projectId}/claims`, {
      claims_text: claimsText,
      revision,
    });
  }

  uploadDrawings(
    projectId: string,
    pages: Array<string | { text: string; source_label: string }>,
    revision: number,
  ): Promise<Project> {
    return this.request("POST", `/projects/${projectId}/drawings`, {
      pages,
      revision,
    });
  }

  patchFigure(
    projectId: string,
    figureNumber: number,
    briefDescription: string,
    revision: number,
  ): Promise<Project> {
    return this.request(
      "PATCH",
      `/projects/${projectId}/figures/${figureNumber}`,
      { brief_description: briefDescription, revision },
    );
  }

  patchComponent(
    projectId: string,
    figureNumber: number,
    number: string,
    change: { name?: string; number?: string },
    revision: number,
  ): Promise<Project> {
    return this.request(
      "PATCH",
      `/projects/${projectId}/figures/${figureNumber}/components/${encodeURIComponent(number)}`,
      { ...change, revision },
    );
  }

  getSuggestions(
    projectId: string,
    options: { threshold?: number; k?: number } = {},
  ): Promise<SuggestionsPayload> {
    const params = new URLSearchParams();
    if (options.threshold !== undefined) {
      params.set("threshold", String(options.threshold));
    }
    if (options.k !== undefined) params.set("k", String(options.k));
    const query = params.toString();
    return this.request(
      "GET",
      `/projects/${projectId}/suggestions${query ? `?${query}` : ""}`,
    );
  }

  putMapping(
    projectId: string,
    featureId: FeatureId,
    componentRef: ComponentRef,
    revision: number,
  ): Promise<{ entry: MappingEntry; revision: number }> {
    return this.request("PUT", `/projects/${projectId}/mappings`, {
      feature_id: featureId,
      component_ref: componentRef,
      revision,
    });
  }

  deleteMapping(
    projectId: string,
    featureId: FeatureId,
    componentRef: ComponentRef,
    revision: number,
  ): Promise<{ removed: boolean; revision: number }> {
    const params = new URLSearchParams({
      feature: featureKey(featureId),
      component: componentKey(componentRef),
      revision: String(revision),
    });
    return this.request(
      "DELETE",
      `/projects/${projectId}/mappings?${params.toString()}`,
    );
  }

  startGeneration(
    projectId: string,
    revision: number,
    options: {
      backend?: string;
      featureIds?: FeatureId[];
      parallelism?: number;
    } = {},
  ): Promise<{ job_id: string; status: string }> {
    const body: Record<string, unknown> = { revision };
    if (options.backend !== undefined) body.backend = options.backend;
    if (options.featureIds !== undefined) body.feature_ids = options.featureIds;
    if (options.parallelism !== undefined) {
      body.parallelism = options.parallelism;
    }
    return this.request("POST", `/projects/${projectId}/generate`, body);
  }

  getJob(projectId: string, jobId: string): Promise<JobView> {
    return this.request("GET", `/projects/${projectId}/jobs/${jobId}`);
  }

  getSpecification(projectId: string): Promise<SpecificationView> {
    return this.request("GET", `/projects/${projectId}/specification.json`);
  }

  async getSpecificationText(projectId: string): Promise<string> {
    const response = await this.send(
      "GET",
      `/projects/${projectId}/specification.txt`,
    );
    const text = await response.text();
    if (!response.ok) throw new ApiError(response.status, { detail: text });
    return text;
  }
}
