import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { createApp, DEFAULT_POLL_INTERVAL_MS, type AppHandle } from "../src/app.js";
import { FakeService, makeDom, sampleProject, score, until, type Dom } from "./helpers.js";

let dom: Dom;
let svc: FakeService;
let client: ApiClient;
let app: AppHandle;

function $(selector: string): HTMLElement {
  const el = dom.root.querySelector(selector);
  if (!el) throw new Error(`missing element: ${selector}`);
  return el as HTMLElement;
}

function $$(selector: string): HTMLElement[] {
  return Array.from(dom.root.querySelectorAll(selector)) as HTMLElement[];
}

function puts(): number {
  return client.log.filter((e) => e.method === "PUT").length;
}

async function mount(project = sampleProject()): Promise<void> {
  dom = makeDom();
  svc = new FakeService(project);
  client = new ApiClient("http://fake.test", { fetchImpl: svc.fetchImpl });
  app = createApp(dom.root, client, { pollIntervalMs: 10 });
  await app.openProject("p1");
}

async function linkSelected(featureKey: string, componentKey: string): Promise<void> {
  $(`#feature-list button.row[data-feature="${featureKey}"]`).click();
  $(`#component-list button.row[data-component="${componentKey}"]`).click();
  const before = puts();
  $("#link-button").click();
  await until(() => puts() === before + 1);
}

beforeEach(async () => {
  await mount();
});

afterEach(() => {
  app.destroy();
  dom.cleanup();
});

describe("pane rendering", () => {
  it("lists features and components in API order with 2-decimal score badges", () => {
    const featureRows = $$("#feature-list button.row");
    expect(featureRows.map((r) => r.dataset.feature)).toEqual([
      "1.0",
      "1.1",
      "2.0",
    ]);
    const componentRows = $$("#component-list button.row");
    expect(componentRows.map((r) => r.dataset.component)).toEqual([
      "1:102",
      "1:104",
    ]);
    expect(featureRows[0]!.textContent).toContain("processor 102 0.18");
    expect(featureRows[1]!.textContent).toContain("memory 104 0.50");
    expect($("#mapped-list").textContent).toContain("nothing linked yet");
    expect($("#revision").textContent).toBe("sample rev 3");
  });

  it("shows confirmed entries in the mapped pane with a stale badge", async () => {
    const project = sampleProject();
    project.mappings.entries.push({
      feature_id: [2, 0],
      component_ref: [1, "104"],
      score: score(0.2),
      origin: "user",
      stale: true,
    });
    app.destroy();
    dom.cleanup();
    await mount(project);

    const rows = $$("#mapped-list .mapped-row");
    expect(rows).toHaveLength(1);
    expect(rows[0]!.textContent).toContain("2.0");
    expect(rows[0]!.textContent).toContain("memory 104");
    expect(rows[0]!.querySelector(".badge.stale")).not.toBeNull();
    // A confirmed feature leaves the unmapped pane.
    expect(
      $$("#feature-list button.row").map((r) => r.dataset.feature),
    ).toEqual(["1.0", "1.1"]);
  });
});

describe("select-then-link", () => {
  it("creates exactly one mapping write per link action", async () => {
    await linkSelected("1.0", "1:102");

    expect(puts()).toBe(1);
    expect(client.log.filter((e) => e.method === "PUT")).toEqual([
      { method: "PUT", path: "/projects/p1/mappings", status: 200 },
    ]);
    const mapped = $$("#mapped-list .mapped-row");
    expect(mapped).toHaveLength(1);
    expect(mapped[0]!.textContent).toContain("1.0");
    expect(mapped[0]!.textContent).toContain("processor 102");
    expect(
      $$("#feature-list button.row").map((r) => r.dataset.feature),
    ).toEqual(["1.1", "2.0"]);
    expect(app.project?.revision).toBe(4);
    const serverEntry = svc.project.mappings.entries.find(
      (e) => e.origin === "user",
    );
    expect(serverEntry?.feature_id).toEqual([1, 0]);
  });

  it("keeps a single row when a pair is unlinked and linked again", async () => {
    await linkSelected("1.0", "1:102");

    $("#mapped-list button.unlink").click();
    await until(() => $$("#mapped-list .mapped-row").length === 0);
    expect(
      $$("#feature-list button.row").map((r) => r.dataset.feature),
    ).toContain("1.0");

    await linkSelected("1.0", "1:102");
    expect($$("#mapped-list .mapped-row")).toHaveLength(1);
    expect(client.log.map((e) => e.method).filter((m) => m !== "GET")).toEqual(
      ["PUT", "DELETE", "PUT"],
    );
  });

  it("rolls back and reloads on a stale-revision conflict", async () => {
    svc.conflictNextWrite = true;
    $('#feature-list button.row[data-feature="1.0"]').click();
    $('#component-list button.row[data-component="1:102"]').click();
    $("#link-button").click();
    await until(() => $("#banner").classList.contains("visible"));
    await until(
      () => client.log[client.log.length - 1]?.path === "/projects/p1",
    );

    // The optimistic row is gone and the project was refetched.
    expect($("#mapped-list").textContent).toContain("nothing linked yet");
    expect(
      $$("#feature-list button.row").map((r) => r.dataset.feature),
    ).toContain("1.0");
    const tail = client.log.slice(-2);
    expect(tail[0]).toEqual({
      method: "PUT",
      path: "/projects/p1/mappings",
      status: 409,
    });
    expect(tail[1]).toEqual({
      method: "GET",
      path: "/projects/p1",
      status: 200,
    });
    expect(app.project?.revision).toBe(3);
  });
});

describe("generation view", () => {
  it("polls the job and renders cleaned paragraphs with figure highlights", async () => {
    $("#generate-button").click();
    await until(() => $("#spec-view").textContent?.includes("FIG. 1") ?? false);

    const posts = client.log.filter((e) => e.method === "POST");
    expect(posts).toEqual([
      { method: "POST", path: "/projects/p1/generate", status: 202 },
    ]);
    const highlight = $("#spec-view .figref");
    expect(highlight.textContent).toBe("FIG. 1");
    expect($("#spec-view").textContent).toContain("processor 102");
    expect($("#spec-view .gen-error").textContent).toContain(
      "feature 1.1 failed: backend exploded",
    );
    expect($("#job-status").textContent).toBe("done: 1 ok, 1 failed, 0 timeout");
  });

  it("replaces the view on a re-run", async () => {
    $("#generate-button").click();
    await until(() => $("#spec-view").textContent?.includes("FIG. 1") ?? false);

    $("#generate-button").click();
    await until(() => $("#spec-view").textContent?.includes("FIG. 1") ?? false);
    expect($$("#spec-view p")).toHaveLength(2);
  });

  it("shows an error banner when the job fails", async () => {
    svc.jobPlan = "failed";
    $("#generate-button").click();
    await until(() => $("#job-status").textContent === "generation failed");
    expect($("#banner").textContent).toContain("UnknownBackend");
  });
});

describe("keyboard navigation", () => {
  it("moves focus through the feature list with arrow keys", () => {
    const rows = $$("#feature-list button.row") as HTMLButtonElement[];
    const win = dom.window as unknown as {
      KeyboardEvent: typeof KeyboardEvent;
      document: Document;
    };
    rows[0]!.focus();
    const press = (key: string, target: HTMLElement) =>
      target.dispatchEvent(
        new win.KeyboardEvent("keydown", { key, bubbles: true }),
      );

    press("ArrowDown", rows[0]!);
    expect(win.document.activeElement).toBe(rows[1]);
    press("ArrowDown", rows[1]!);
    expect(win.document.activeElement).toBe(rows[2]);
    press("ArrowUp", rows[2]!);
    expect(win.document.activeElement).toBe(rows[1]);
    press("ArrowUp", rows[1]!);
    press("ArrowUp", rows[0]!);
    expect(win.document.activeElement).toBe(rows[0]);
  });
});

describe("polling contract", () => {
  it("defaults to a 2 second job poll interval", () => {
    expect(DEFAULT_POLL_INTERVAL_MS).toBe(2000);
  });
});
