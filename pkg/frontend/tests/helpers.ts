// Shared test scaffolding: a detached DOM to mount the app into, a polling
// wait helper, and a small in-memory stand-in for the project service that
// speaks just enough of the API for the unit tests.

import { Window } from "happy-dom";

import type { MappingEntry, Project, Score, SpecResult } from "../src/api.js";

export interface Dom {
  window: Window;
  root: HTMLElement;
  cleanup: () => void;
}

export function makeDom(): Dom {
  const window = new Window();
  const root = window.document.createElement("div");
  window.document.body.appendChild(root);
  return {
    window,
    root: root as unknown as HTMLElement,
    cleanup: () => {
      try {
        window.close();
      } catch {
        // already closed
      }
    },
  };
}

export async function until(
  cond: () => boolean,
  timeoutMs = 3000,
  stepMs = 5,
): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error("condition not reached in time");
    }
    await new Promise((resolve) => setTimeout(resolve, stepMs));
  }
}

export function score(combined: number): Score {
  return { cosine: combined, bleu1: 0, bleu2: 0, combined };
}

export function sampleProject(): Project {
  return {
    project_id: "p1",
    name: "sample",
    revision: 3,
    created_at: "2026-08-22T00:00:00+00:00",
    updated_at: "2026-08-22T00:00:00+00:00",
    claims_text:
      "1. A system comprising:\na processor running logic;\na memory storing state.\n2. The system of claim 1, wherein the memory is cleared.\n",
    claims: [
      {
        number: 1,
        kind: "independent",
        depends_on: null,
        preamble: "A system comprising",
        features: [
          {
            claim_number: 1,
            index: 0,
            text: "a processor running logic",
            enriched_text:
              "<claim 1><feature 0> a processor running logic </feature></claim>",
          },
          {
            claim_number: 1,
            index: 1,
            text: "a memory storing state.",
            enriched_text:
              "<claim 1><feature 1> a memory storing state. </feature></claim>",
          },
        ],
        raw_text: "1. A system comprising: ...",
        multi_dependent: false,
      },
      {
        number: 2,
        kind: "dependent",
        depends_on: 1,
        preamble: "",
        features: [
          {
            claim_number: 2,
            index: 0,
            text: "wherein the memory is cleared.",
            enriched_text:
              "<claim 2><feature 0> wherein the memory is cleared. </feature></claim>",
          },
        ],
        raw_text: "2. The system of claim 1, wherein the memory is cleared.",
        multi_dependent: false,
      },
    ],
    figures: [
      {
        figure_number: 1,
        source_label: "page-1",
        raw_text: "FIG. 1\nprocessor 102\nmemory 104",
        components: [
          { name: "processor", number: "102", figure: 1 },
          { name: "memory", number: "104", figure: 1 },
        ],
        brief_description: "",
        enriched_description: "<desc 1></desc>",
        warnings: [],
      },
    ],
    mappings: {
      entries: [
        {
          feature_id: [1, 0],
          component_ref: [1, "102"],
          score: score(0.183),
          origin: "suggested",
          stale: false,
        },
        {
          feature_id: [1, 1],
          component_ref: [1, "104"],
          score: score(0.5),
          origin: "suggested",
          stale: false,
        },
      ],
    },
    results: [],
    warnings: [],
  };
}

const DONE_RESULTS: SpecResult[] = [
  {
    feature_id: [1, 0],
    raw: "<fig 1> shows the processor <num> 102 </num> in an embodiment.",
    cleaned: "FIG. 1 shows the processor 102 in an embodiment.",
    paragraphs: ["FIG. 1 shows the processor 102 in an embodiment."],
    warnings: [],
    status: "ok",
    diagnostic: "",
  },
  {
    feature_id: [1, 1],
    raw: "",
    cleaned: "",
    paragraphs: [],
    warnings: [],
    status: "failed",
    diagnostic: "backend exploded",
  },
];

/**
 * In-memory fake of the project service. Routes only what the app uses:
 * listing, project fetch, mapping put/delete, generate, and job polling.
 */
export class FakeService {
  project: Project;
  conflictNextWrite = false;
  jobPlan: "done" | "failed" = "done";
  pollsBeforeFinish = 1;
  private jobPolls: Record<string, number> = {};
  private jobCounter = 0;

  constructor(project: Project = sampleProject()) {
    this.project = project;
  }

  fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = (init?.method ?? "GET").toUpperCase();
    const url = new URL(input, "http://fake.test");
    const body = init?.body
      ? (JSON.parse(String(init.body)) as Record<string, unknown>)
      : undefined;
    return this.route(method, url.pathname, url, body);
  };

  private json(status: number, data: unknown): Response {
    return new Response(JSON.stringify(data), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  private conflict(): Response {
    return this.json(409, {
      error: "RevisionConflict",
      message: "revision is stale",
    });
  }

  private checkRevision(sent: unknown): Response | null {
    if (this.conflictNextWrite) {
      this.conflictNextWrite = false;
      return this.conflict();
    }
    if (sent !== this.project.revision) return this.conflict();
    return null;
  }

  private route(
    method: string,
    path: string,
    url: URL,
    body: Record<string, unknown> | undefined,
  ): Response {
    const p = this.project;
    const base = `/projects/${p.project_id}`;

    if (method === "GET" && path === "/projects") {
      return this.json(200, {
        projects: [
          {
            project_id: p.project_id,
            name: p.name,
            revision: p.revision,
            created_at: p.created_at,
            updated_at: p.updated_at,
            claim_count: p.claims.length,
            figure_count: p.figures.length,
            mapping_count: p.mappings.entries.length,
            result_count: p.results.length,
          },
        ],
      });
    }
    if (method === "GET" && path === base) {
      return this.json(200, structuredClone(p));
    }
    if (method === "PUT" && path === `${base}/mappings`) {
      const stale = this.checkRevision(body?.revision);
      if (stale) return stale;
      const featureId = body?.feature_id as [number, number];
      const componentRef = body?.component_ref as [number, string];
      const existing = p.mappings.entries.find(
        (e) =>
          e.feature_id[0] === featureId[0] &&
          e.feature_id[1] === featureId[1] &&
          e.component_ref[0] === componentRef[0] &&
          e.component_ref[1] === componentRef[1],
      );
      const entry: MappingEntry = {
        feature_id: featureId,
        component_ref: componentRef,
        score: existing ? existing.score : score(0),
        origin: "user",
        stale: false,
      };
      if (existing) {
        p.mappings.entries[p.mappings.entries.indexOf(existing)] = entry;
      } else {
        p.mappings.entries.push(entry);
      }
      p.revision += 1;
      return this.json(200, { entry: structuredClone(entry), revision: p.revision });
    }
    if (method === "DELETE" && path === `${base}/mappings`) {
      const stale = this.checkRevision(Number(url.searchParams.get("revision")));
      if (stale) return stale;
      const feature = url.searchParams.get("feature") ?? "";
      const component = url.searchParams.get("component") ?? "";
      const beforeCount = p.mappings.entries.length;
      p.mappings.entries = p.mappings.entries.filter(
        (e) =>
          !(
            `${e.feature_id[0]}.${e.feature_id[1]}` === feature &&
            `${e.component_ref[0]}:${e.component_ref[1]}` === component
          ),
      );
      const removed = p.mappings.entries.length < beforeCount;
      if (removed) p.revision += 1;
      return this.json(200, { removed, revision: p.revision });
    }
    if (method === "POST" && path === `${base}/generate`) {
      const stale = this.checkRevision(body?.revision);
      if (stale) return stale;
      this.jobCounter += 1;
      const jobId = `job${this.jobCounter}`;
      this.jobPolls[jobId] = 0;
      return this.json(202, { job_id: jobId, status: "queued" });
    }
    const jobMatch = path.match(/\/jobs\/(job\d+)$/);
    if (method === "GET" && jobMatch) {
      const jobId = jobMatch[1] as string;
      if (!(jobId in this.jobPolls)) {
        return this.json(404, { detail: "no such job" });
      }
      const polls = (this.jobPolls[jobId] ?? 0) + 1;
      this.jobPolls[jobId] = polls;
      if (polls <= this.pollsBeforeFinish) {
        return this.json(200, this.jobView(jobId, "running", null));
      }
      if (this.jobPlan === "failed") {
        return this.json(
          200,
          this.jobView(jobId, "failed", "UnknownBackend: no such backend"),
        );
      }
      p.results = structuredClone(DONE_RESULTS);
      p.revision += 1;
      return this.json(200, this.jobView(jobId, "done", null));
    }
    return this.json(404, { detail: `no route: ${method} ${path}` });
  }

  private jobView(jobId: string, status: string, error: string | null) {
    return {
      job_id: jobId,
      project_id: this.project.project_id,
      backend: "mock",
      requested: 3,
      status,
      created_at: this.project.created_at,
      started_at: this.project.created_at,
      finished_at: status === "running" ? null : this.project.created_at,
      error,
      summary:
        status === "done"
          ? { count: 1, mean_seconds: 0, stddev_seconds: 0, total_seconds: 0 }
          : null,
      result_statuses:
        status === "done" ? { ok: 1, failed: 1, timeout: 0 } : null,
    };
  }
}
