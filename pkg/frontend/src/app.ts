// Single-page mapping workflow: upload and correct claims and drawing text,
// review unmapped claim features next to extracted components, link them
// pair by pair, and run generation. All durable state lives on the server;
// the UI only mutates its local copy optimistically around a service write
// that carries the current revision, and rolls back if the write fails.

import {
  ApiClient,
  ApiError,
  componentKey,
  featureKey,
  type ClaimFeature,
  type ComponentRef,
  type DrawingComponent,
  type FeatureId,
  type JobView,
  type MappingEntry,
  type Project,
} from "./api.js";

export const DEFAULT_POLL_INTERVAL_MS = 2000;

export interface AppOptions {
  pollIntervalMs?: number;
}

export interface AppHandle {
  readonly client: ApiClient;
  readonly project: Project | null;
  refreshProjects(): Promise<void>;
  openProject(projectId: string): Promise<void>;
  destroy(): void;
}

const SHELL = `
<header class="topbar">
  <h1>Mapping review</h1>
  <label>project
    <select id="project-select"></select>
  </label>
  <input id="project-name" placeholder="new project name">
  <button id="create-project" class="action small">create</button>
  <span id="revision" class="dim"></span>
</header>
<div id="banner" role="alert"></div>
<main>
  <section class="card">
    <h2>Inputs</h2>
    <div class="inputs">
      <div>
        <textarea id="claims-input" placeholder="numbered claims"></textarea>
        <button id="upload-claims" class="action">upload claims</button>
      </div>
      <div>
        <textarea id="drawings-input" placeholder="drawing description pages, separated by a --- line"></textarea>
        <button id="upload-drawings" class="action">upload drawings</button>
      </div>
    </div>
    <div id="figures-list"></div>
  </section>
  <section class="card">
    <h2>Unmapped features and components</h2>
    <div class="panes">
      <div id="feature-list" class="rowlist" aria-label="unmapped claim features"></div>
      <div>
        <div id="component-list" class="rowlist" aria-label="drawing components"></div>
        <div class="figure-row">
          <input id="rename-input" placeholder="new name for the selected component">
          <button id="apply-rename" class="small action">rename</button>
        </div>
      </div>
    </div>
    <p><button id="link-button" class="action" disabled>link selected pair</button></p>
  </section>
  <section class="card">
    <h2>Mapped pairs</h2>
    <div id="mapped-list" class="rowlist"></div>
  </section>
  <section class="card">
    <h2>Generated specification</h2>
    <p>
      <button id="generate-button" class="action" disabled>generate</button>
      <span id="job-status" class="dim"></span>
    </p>
    <div id="spec-view"></div>
  </section>
</main>
`;

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&#39;",
};

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (ch) => ESCAPES[ch] ?? ch);
}

function highlightFigureRefs(escaped: string): string {
  return escaped.replace(/FIG\. (\d+)/g, '<span class="figref">FIG. $1</span>');
}

function parseFeature(key: string): FeatureId {
  const dot = key.indexOf(".");
  return [Number(key.slice(0, dot)), Number(key.slice(dot + 1))];
}

function parseComponent(key: string): ComponentRef {
  const sep = key.indexOf(":");
  return [Number(key.slice(0, sep)), key.slice(sep + 1)];
}

function samePair(
  entry: MappingEntry,
  featureId: FeatureId,
  componentRef: ComponentRef,
): boolean {
  return (
    featureKey(entry.feature_id) === featureKey(featureId) &&
    componentKey(entry.component_ref) === componentKey(componentRef)
  );
}

export function createApp(
  root: HTMLElement,
  client: ApiClient,
  options: AppOptions = {},
): AppHandle {
  const pollIntervalMs = options.pollIntervalMs ?? DEFAULT_POLL_INTERVAL_MS;
  let project: Project | null = null;
  let shownProjectId: string | null = null;
  let selectedFeature: FeatureId | null = null;
  let selectedComponent: ComponentRef | null = null;
  const pendingPairs = new Set<string>();
  let alive = true;
  let pollSeq = 0;

  root.innerHTML = SHELL;
  const $ = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector(selector);
    if (!el) throw new Error(`missing element: ${selector}`);
    return el as T;
  };

  const projectSelect = $<HTMLSelectElement>("#project-select");
  const projectName = $<HTMLInputElement>("#project-name");
  const createButton = $("#create-project");
  const revisionSpan = $("#revision");
  const banner = $("#banner");
  const claimsInput = $<HTMLTextAreaElement>("#claims-input");
  const drawingsInput = $<HTMLTextAreaElement>("#drawings-input");
  const uploadClaimsButton = $("#upload-claims");
  const uploadDrawingsButton = $("#upload-drawings");
  const figuresList = $("#figures-list");
  const featureList = $("#feature-list");
  const componentList = $("#component-list");
  const renameInput = $<HTMLInputElement>("#rename-input");
  const renameButton = $("#apply-rename");
  const linkButton = $<HTMLButtonElement>("#link-button");
  const mappedList = $("#mapped-list");
  const generateButton = $<HTMLButtonElement>("#generate-button");
  const jobStatus = $("#job-status");
  const specView = $("#spec-view");

  function showBanner(text: string): void {
    banner.textContent = text;
    banner.classList.add("visible");
  }

  function clearBanner(): void {
    banner.textContent = "";
    banner.classList.remove("visible");
  }

  function describeError(err: unknown): string {
    if (err instanceof ApiError) {
      const line =
        typeof err.body.line === "number" ? ` (line ${err.body.line})` : "";
      return `${err.code}${line}: ${err.message}`;
    }
    return String(err);
  }

  function allFeatures(): ClaimFeature[] {
    return project ? project.claims.flatMap((c) => c.features) : [];
  }

  function allComponents(): DrawingComponent[] {
    return project ? project.figures.flatMap((f) => f.components) : [];
  }

  function renderHeader(): void {
    revisionSpan.textContent = project
      ? `${project.name} rev ${project.revision}`
      : "";
    if (project) projectSelect.value = project.project_id;
  }

  function renderFigures(): void {
    if (!project || project.figures.length === 0) {
      figuresList.innerHTML = "";
      return;
    }
    figuresList.innerHTML = project.figures
      .map(
        (figure) =>
          `<div class="figure-row">` +
          `<span>FIG. ${figure.figure_number}</span>` +
          `<span class="dim">${escapeHtml(figure.source_label)}</span>` +
          `<input class="brief-input" data-figure="${figure.figure_number}"` +
          ` value="${escapeHtml(figure.brief_description)}"` +
          ` placeholder="brief description of the figure">` +
          `<button class="small action save-brief" data-figure="${figure.figure_number}">save</button>` +
          `</div>`,
      )
      .join("");
  }

  // Left pane: features with no user-confirmed mapping, in claim order, each
  // carrying its suggestion badges. Right pane: every component in figure
  // order. Both lists keep the exact ordering the API returned.
  function renderPanes(): void {
    if (!project) {
      featureList.innerHTML = '<p class="dim">no project selected</p>';
      componentList.innerHTML = "";
      mappedList.innerHTML = "";
      linkButton.disabled = true;
      generateButton.disabled = true;
      return;
    }
    const components = allComponents();
    const names = new Map(
      components.map(
        (c) => [componentKey([c.figure, c.number]), c.name] as const,
      ),
    );
    const confirmed = new Set(
      project.mappings.entries
        .filter((e) => e.origin === "user")
        .map((e) => featureKey(e.feature_id)),
    );

    const featureRows: string[] = [];
    for (const feature of allFeatures()) {
      const fkey = featureKey([feature.claim_number, feature.index]);
      if (confirmed.has(fkey)) continue;
      const badges = project.mappings.entries
        .filter(
          (e) => e.origin === "suggested" && featureKey(e.feature_id) === fkey,
        )
        .map((e) => {
          const ckey = componentKey(e.component_ref);
          const label = `${names.get(ckey) ?? ckey} ${e.component_ref[1]}`;
          return (
            `<span class="badge score" data-component="${escapeHtml(ckey)}">` +
            `${escapeHtml(label)} ${e.score.combined.toFixed(2)}</span>`
          );
        })
        .join("");
      const selected =
        selectedFeature !== null && featureKey(selectedFeature) === fkey;
      featureRows.push(
        `<button class="row feature${selected ? " selected" : ""}"` +
          ` data-feature="${fkey}" aria-pressed="${selected}">` +
          `<span class="dim">${fkey}</span> ${escapeHtml(feature.text)}${badges}</button>`,
      );
    }
    featureList.innerHTML = featureRows.length
      ? featureRows.join("")
      : '<p class="dim">no unmapped features</p>';

    const componentRows = components.map((c) => {
      const ckey = componentKey([c.figure, c.number]);
      const selected =
        selectedComponent !== null && componentKey(selectedComponent) === ckey;
      return (
        `<button class="row component${selected ? " selected" : ""}"` +
        ` data-component="${escapeHtml(ckey)}" aria-pressed="${selected}">` +
        `${escapeHtml(`${c.name} ${c.number}`)} <span class="dim">fig ${c.figure}</span></button>`
      );
    });
    componentList.innerHTML = componentRows.length
      ? componentRows.join("")
      : '<p class="dim">no components yet</p>';

    const mappedRows = project.mappings.entries
      .filter((e) => e.origin === "user")
      .map((e) => {
        const fkey = featureKey(e.feature_id);
        const ckey = componentKey(e.component_ref);
        const label = `${names.get(ckey) ?? ckey} ${e.component_ref[1]}`;
        const pending = pendingPairs.has(`${fkey}|${ckey}`);
        return (
          `<div class="mapped-row${pending ? " pending" : ""}">` +
          `<span class="pair"><span class="dim">${fkey}</span> ` +
          `${escapeHtml(label)} <span class="dim">fig ${e.component_ref[0]}</span></span>` +
          `<span class="badge">${e.score.combined.toFixed(2)}</span>` +
          (e.stale ? '<span class="badge stale">stale</span>' : "") +
          `<button class="small unlink" data-feature="${fkey}"` +
          ` data-component="${escapeHtml(ckey)}">remove</button>` +
          `</div>`
        );
      });
    mappedList.innerHTML = mappedRows.length
      ? mappedRows.join("")
      : '<p class="dim">nothing linked yet</p>';

    linkButton.disabled = !(selectedFeature && selectedComponent);
    generateButton.disabled = allFeatures().length === 0;
  }

  function renderResults(): void {
    if (!project || project.results.length === 0) {
      specView.innerHTML = '<p class="dim">no generated specification yet</p>';
      return;
    }
    const parts: string[] = [];
    for (const result of project.results) {
      if (result.status === "ok") {
        for (const para of result.paragraphs) {
          parts.push(`<p>${highlightFigureRefs(escapeHtml(para))}</p>`);
        }
      } else {
        parts.push(
          `<p class="gen-error">feature ${featureKey(result.feature_id)} ` +
            `${result.status}: ${escapeHtml(result.diagnostic)}</p>`,
        );
      }
    }
    specView.innerHTML = parts.join("\n");
  }

  function render(focusSelector?: string): void {
    renderHeader();
    renderFigures();
    renderPanes();
    renderResults();
    if (focusSelector) {
      root.querySelector<HTMLElement>(focusSelector)?.focus();
    }
  }

  function setProject(next: Project): void {
    project = next;
    if (shownProjectId !== next.project_id) {
      claimsInput.value = next.claims_text;
      drawingsInput.value = next.figures
        .map((f) => f.raw_text)
        .join("\n---\n");
      shownProjectId = next.project_id;
    }
    const featureKeys = new Set(
      allFeatures().map((f) => featureKey([f.claim_number, f.index])),
    );
    if (selectedFeature && !featureKeys.has(featureKey(selectedFeature))) {
      selectedFeature = null;
    }
    const componentKeys = new Set(
      allComponents().map((c) => componentKey([c.figure, c.number])),
    );
    if (
      selectedComponent &&
      !componentKeys.has(componentKey(selectedComponent))
    ) {
      selectedComponent = null;
    }
    render();
  }

  async function openProject(projectId: string): Promise<void> {
    setProject(await client.getProject(projectId));
  }

  async function refreshProjects(): Promise<void> {
    const listing = await client.listProjects();
    const current = project?.project_id ?? "";
    projectSelect.innerHTML = ['<option value="">select a project</option>']
      .concat(
        listing.projects.map(
          (s) =>
            `<option value="${escapeHtml(s.project_id)}">` +
            `${escapeHtml(s.name)} (${escapeHtml(s.project_id)})</option>`,
        ),
      )
      .join("");
    if (current) projectSelect.value = current;
  }

  // A stale-revision conflict means someone else changed the project; throw
  // away the optimistic change (the caller already rolled back) and reload.
  async function handleWriteError(err: unknown): Promise<void> {
    if (err instanceof ApiError && err.status === 409 && project) {
      showBanner("project was changed elsewhere; reloaded the latest revision");
      try {
        await openProject(project.project_id);
      } catch (reloadErr) {
        showBanner(describeError(reloadErr));
        render();
      }
      return;
    }
    showBanner(describeError(err));
    render();
  }

  function upsertEntry(entry: MappingEntry): void {
    if (!project) return;
    const entries = project.mappings.entries;
    const index = entries.findIndex((e) =>
      samePair(e, entry.feature_id, entry.component_ref),
    );
    if (index >= 0) entries[index] = entry;
    else entries.push(entry);
  }

  // Mapping writes run strictly one after another; a click that lands
  // while the previous write is still in flight must read the revision
  // that write produced, not the one visible at click time.
  let writeChain: Promise<void> = Promise.resolve();

  function enqueueWrite(run: () => Promise<void>): Promise<void> {
    const next = writeChain.then(run, run);
    writeChain = next;
    return next;
  }

  async function linkPair(
    featureId: FeatureId,
    componentRef: ComponentRef,
  ): Promise<void> {
    if (!project) return;
    const key = `${featureKey(featureId)}|${componentKey(componentRef)}`;
    const before = project.mappings.entries.slice();
    const suggested = before.find((e) => samePair(e, featureId, componentRef));
    upsertEntry({
      feature_id: featureId,
      component_ref: componentRef,
      score: suggested
        ? suggested.score
        : { cosine: 0, bleu1: 0, bleu2: 0, combined: 0 },
      origin: "user",
      stale: false,
    });
    pendingPairs.add(key);
    render();
    try {
      const res = await client.putMapping(
        project.project_id,
        featureId,
        componentRef,
        project.revision,
      );
      pendingPairs.delete(key);
      project.revision = res.revision;
      upsertEntry(res.entry);
      selectedFeature = null;
      selectedComponent = null;
      clearBanner();
      render();
    } catch (err) {
      pendingPairs.delete(key);
      project.mappings.entries = before;
      await handleWriteError(err);
    }
  }

  async function unlinkPair(
    featureId: FeatureId,
    componentRef: ComponentRef,
  ): Promise<void> {
    if (!project) return;
    const before = project.mappings.entries.slice();
    project.mappings.entries = before.filter(
      (e) => !samePair(e, featureId, componentRef),
    );
    render();
    try {
      const res = await client.deleteMapping(
        project.project_id,
        featureId,
        componentRef,
        project.revision,
      );
      project.revision = res.revision;
      clearBanner();
      render();
    } catch (err) {
      project.mappings.entries = before;
      await handleWriteError(err);
    }
  }

  function sleep(ms: number): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, ms));
  }

  async function pollJob(projectId: string, jobId: string): Promise<void> {
    const seq = ++pollSeq;
    for (;;) {
      if (!alive || seq !== pollSeq) return;
      let job: JobView;
      try {
        job = await client.getJob(projectId, jobId);
      } catch (err) {
        jobStatus.textContent = "job lookup failed";
        showBanner(describeError(err));
        return;
      }
      if (job.status === "failed") {
        jobStatus.textContent = "generation failed";
        showBanner(`generation failed: ${job.error ?? "unknown error"}`);
        return;
      }
      if (job.status === "done") {
        const statuses = job.result_statuses ?? {};
        jobStatus.textContent =
          `done: ${statuses.ok ?? 0} ok, ${statuses.failed ?? 0} failed, ` +
          `${statuses.timeout ?? 0} timeout`;
        try {
          await openProject(projectId);
        } catch (err) {
          showBanner(describeError(err));
        }
        return;
      }
      jobStatus.textContent = `generation ${job.status}`;
      await sleep(pollIntervalMs);
    }
  }

  createButton.addEventListener("click", async () => {
    const name = projectName.value.trim() || "untitled";
    try {
      const created = await client.createProject(name);
      projectName.value = "";
      clearBanner();
      await refreshProjects();
      await openProject(created.project_id);
    } catch (err) {
      showBanner(describeError(err));
    }
  });

  projectSelect.addEventListener("change", async () => {
    const id = projectSelect.value;
    if (!id) return;
    try {
      clearBanner();
      await openProject(id);
    } catch (err) {
      showBanner(describeError(err));
    }
  });

  uploadClaimsButton.addEventListener("click", async () => {
    if (!project) {
      showBanner("create or select a project first");
      return;
    }
    try {
      const updated = await client.uploadClaims(
        project.project_id,
        claimsInput.value,
        project.revision,
      );
      clearBanner();
      setProject(updated);
    } catch (err) {
      await handleWriteError(err);
    }
  });

  uploadDrawingsButton.addEventListener("click", async () => {
    if (!project) {
      showBanner("create or select a project first");
      return;
    }
    const pages = drawingsInput.value
      .split(/\n-{3,}\n/)
      .map((page) => page.trim())
      .filter((page) => page.length > 0);
    try {
      const updated = await client.uploadDrawings(
        project.project_id,
        pages,
        project.revision,
      );
      clearBanner();
      setProject(updated);
    } catch (err) {
      await handleWriteError(err);
    }
  });

  figuresList.addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>(
      "button.save-brief",
    );
    if (!button || !project) return;
    const figure = Number(button.dataset.figure);
    const input = figuresList.querySelector<HTMLInputElement>(
      `input.brief-input[data-figure="${figure}"]`,
    );
    if (!input) return;
    try {
      const updated = await client.patchFigure(
        project.project_id,
        figure,
        input.value,
        project.revision,
      );
      clearBanner();
      setProject(updated);
    } catch (err) {
      await handleWriteError(err);
    }
  });

  featureList.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest<HTMLElement>("button.row.feature");
    if (!row || !row.dataset.feature) return;
    selectedFeature = parseFeature(row.dataset.feature);
    const badge = target.closest<HTMLElement>(".badge.score");
    if (badge?.dataset.component) {
      selectedComponent = parseComponent(badge.dataset.component);
    }
    render(`button.row.feature[data-feature="${row.dataset.feature}"]`);
  });

  componentList.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>(
      "button.row.component",
    );
    if (!row || !row.dataset.component) return;
    selectedComponent = parseComponent(row.dataset.component);
    render(`button.row.component[data-component="${row.dataset.component}"]`);
  });

  renameButton.addEventListener("click", async () => {
    if (!project || !selectedComponent) {
      showBanner("select a component to rename first");
      return;
    }
    const name = renameInput.value.trim();
    if (!name) {
      showBanner("enter the new component name first");
      return;
    }
    try {
      const updated = await client.patchComponent(
        project.project_id,
        selectedComponent[0],
        selectedComponent[1],
        { name },
        project.revision,
      );
      renameInput.value = "";
      clearBanner();
      setProject(updated);
    } catch (err) {
      await handleWriteError(err);
    }
  });

  linkButton.addEventListener("click", () => {
    if (selectedFeature && selectedComponent) {
      const feature = selectedFeature;
      const component = selectedComponent;
      void enqueueWrite(() => linkPair(feature, component));
    }
  });

  mappedList.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLElement>(
      "button.unlink",
    );
    if (!button || !button.dataset.feature || !button.dataset.component) {
      return;
    }
    const feature = parseFeature(button.dataset.feature);
    const component = parseComponent(button.dataset.component);
    void enqueueWrite(() => unlinkPair(feature, component));
  });

  generateButton.addEventListener("click", async () => {
    if (!project) return;
    clearBanner();
    jobStatus.textContent = "starting";
    specView.innerHTML = "";
    try {
      const res = await client.startGeneration(
        project.project_id,
        project.revision,
      );
      void pollJob(project.project_id, res.job_id);
    } catch (err) {
      jobStatus.textContent = "";
      await handleWriteError(err);
    }
  });

  // Arrow keys walk a list; the rows are buttons, so Enter and Space
  // activate them natively and Tab reaches every control.
  function wireArrowKeys(list: HTMLElement): void {
    list.addEventListener("keydown", (event) => {
      const key = (event as KeyboardEvent).key;
      if (key !== "ArrowDown" && key !== "ArrowUp") return;
      const rows = Array.from(
        list.querySelectorAll<HTMLButtonElement>("button.row"),
      );
      if (rows.length === 0) return;
      const current = (event.target as HTMLElement).closest("button.row");
      const index = rows.findIndex((row) => row === current);
      const next =
        key === "ArrowDown"
          ? Math.min(rows.length - 1, index + 1)
          : Math.max(0, index <= 0 ? 0 : index - 1);
      event.preventDefault();
      rows[next]?.focus();
    });
  }

  wireArrowKeys(featureList);
  wireArrowKeys(componentList);

  render();
  void refreshProjects().catch((err) => showBanner(describeError(err)));

  return {
    client,
    get project() {
      return project;
    },
    refreshProjects,
    openProject,
    destroy() {
      alive = false;
      pollSeq += 1;
      root.innerHTML = "";
    },
  };
}
