/**
 * End-to-end dashboard flow against the recorded service conversation:
 * load the example rotor, edit one table cell, press Compute, watch the
 * progress stream, and verify the three populated result tabs show the
 * service's numbers verbatim plus stale-marking on slider movement.
 *
 * The transport is a fetch stub replaying fixtures captured from the real
 * service (surrogate evaluator, reference design); the dashboard itself
 * never computes physics.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import { beforeEach, describe, expect, it, vi } from "vitest";

import { Dashboard } from "../src/app.js";
import { nominalCell } from "../src/state.js";
import type { ContourDocument, SweepEvent } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");
const load = (name: string) => readFileSync(join(FIXTURES, name), "utf-8");

const exampleRotor = readFileSync(join(__dirname, "..", "example.rotor.json"), "utf-8");
const validateFixture = load("validate.json");
const computeFixture = load("compute.json");
const sweepFixture = load("sweep.ndjson");

const sweepDocument = (JSON.parse(
  sweepFixture.trim().split("\n").at(-1)!) as Extract<SweepEvent, { event: "result" }>
).document as ContourDocument;

interface Call {
  url: string;
  body?: unknown;
}

function installTransport(): Call[] {
  const calls: Call[] = [];
  vi.stubGlobal("fetch", vi.fn(async (url: string, init?: RequestInit) => {
    const call: Call = { url: String(url) };
    if (init?.body) call.body = JSON.parse(init.body as string);
    calls.push(call);
    if (call.url.endsWith("example.rotor.json")) return new Response(exampleRotor);
    if (call.url.endsWith("/api/v1/rotor/validate")) return new Response(validateFixture);
    if (call.url.endsWith("/api/v1/compute")) return new Response(computeFixture);
    if (call.url.endsWith("/api/v1/sweep")) return new Response(sweepFixture);
    throw new Error(`unexpected request ${call.url}`);
  }));
  return calls;
}

async function flush(): Promise<void> {
  for (let i = 0; i < 20; i++) await Promise.resolve();
}

describe("dashboard end to end", () => {
  let dash: Dashboard;
  let calls: Call[];
  let root: HTMLElement;

  beforeEach(async () => {
    vi.unstubAllGlobals();
    calls = installTransport();
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    dash = new Dashboard(root);
    await dash.loadExample();
    await flush();
  });

  it("loads the rotor and shows its mass from the service", () => {
    expect(dash.store.get().rotor?.elements).toHaveLength(5);
    const mass = JSON.parse(validateFixture).mass_kg * 1e3;
    expect(root.querySelector("#mass-card")!.innerHTML).toContain(mass.toFixed(2));
  });

  it("edits one table cell through the validate endpoint", async () => {
    const input = root.querySelector<HTMLInputElement>(
      'input[data-cell="2:L:L_m"]')!;
    input.value = "11.00";
    input.dispatchEvent(new Event("change"));
    await flush();
    expect(dash.store.get().rotor!.elements[2].L_m).toBeCloseTo(0.011, 12);
    const validateCalls = calls.filter((c) => c.url.endsWith("/rotor/validate"));
    expect(validateCalls.length).toBeGreaterThanOrEqual(2);  // load + edit
  });

  it("computes, streams progress, and fills three tabs with exact values",
     async () => {
    const observed: number[] = [];
    dash.store.subscribe((s) => {
      if (s.progress) observed.push(s.progress.done);
    });
    root.querySelector<HTMLButtonElement>("#compute")!.click();
    await vi.waitFor(() => {
      if (dash.store.get().contours === null) throw new Error("pending");
    });
    const state = dash.store.get();
    // progress was streamed from the sweep (441 cells) and observed live
    expect(observed.length).toBe(441);
    expect(observed[0]).toBe(1);
    expect(observed.at(-1)).toBe(441);
    expect(state.progress).toBeNull();      // cleared on completion
    expect(state.inFlight).toBe(false);
    expect(state.stale).toBe(false);

    // stability tab: nominal worst log decrement, exactly as served
    const shown = root.querySelector("#nominal-value")!.textContent;
    const expected = nominalCell(sweepDocument, "worst_log_dec");
    expect(shown).toBe(String(expected));

    // mode table carries the compute response's log decrements verbatim
    const logdecs = Array.from(
      root.querySelectorAll<HTMLElement>("td[data-logdec]"),
    ).map((td) => td.dataset.logdec);
    const served = JSON.parse(computeFixture).modes.map(
      (m: { log_dec: number | null }) => (m.log_dec === null ? "" : String(m.log_dec)));
    expect(logdecs).toEqual(served);

    // the other two tabs populate from the same document without new requests
    const requestsBefore = calls.length;
    dash.store.setTab("load");
    expect(root.querySelector("#nominal-value")!.textContent)
      .toBe(String(nominalCell(sweepDocument, "min_load_capacity_n")));
    dash.store.setTab("losses");
    expect(root.querySelector("#nominal-value")!.textContent)
      .toBe(String(nominalCell(sweepDocument, "max_power_loss_w")));
    dash.store.setTab("axial");
    expect(root.querySelector<HTMLElement>("#axial-placeholder")!.hidden).toBe(false);
    expect(calls.length).toBe(requestsBefore);  // tab switches issue nothing

    // compute button disabled while in flight (single request at a time)
    expect(root.querySelector<HTMLButtonElement>("#compute")!.disabled).toBe(false);
  });

  it("marks results stale after slider movement without recomputing",
     async () => {
    root.querySelector<HTMLButtonElement>("#compute")!.click();
    await vi.waitFor(() => {
      if (dash.store.get().contours === null) throw new Error("pending");
    });
    const requestsBefore = calls.length;
    const banner = root.querySelector<HTMLElement>("#stale-banner")!;
    expect(banner.hidden).toBe(true);
    const slider = root.querySelector<HTMLInputElement>("#slider-hrUm")!;
    slider.value = "9";
    slider.dispatchEvent(new Event("input"));
    expect(dash.store.get().stale).toBe(true);
    expect(banner.hidden).toBe(false);
    expect(calls.length).toBe(requestsBefore);          // no recompute
    expect(dash.store.get().contours).not.toBeNull();   // results retained
    expect(root.querySelector("#summary")!.textContent).toContain("stale");
  });

  it("keeps the compute button disabled during an in-flight request", async () => {
    const button = root.querySelector<HTMLButtonElement>("#compute")!;
    button.click();
    expect(dash.store.get().inFlight).toBe(true);
    expect(button.disabled).toBe(true);
    button.click();  // second press ignored
    await vi.waitFor(() => {
      if (dash.store.get().contours === null) throw new Error("pending");
    });
    const sweepCalls = calls.filter((c) => c.url.endsWith("/api/v1/sweep"));
    expect(sweepCalls).toHaveLength(1);
  });

  it("surfaces rejected edits and reverts the cell", async () => {
    (fetch as unknown as ReturnType<typeof vi.fn>).mockImplementationOnce(
      async () => new Response(JSON.stringify(
        { code: "invariant_violation", message: "layer diameters", path: "x" }),
        { status: 422 }));
    const input = root.querySelector<HTMLInputElement>('input[data-cell="0:0:D_m"]')!;
    const before = input.value;
    input.value = "-3";
    input.dispatchEvent(new Event("change"));
    await flush();
    expect(input.value).toBe(before);
    expect(root.querySelector(".table-message")!.textContent).toContain("rejected");
  });
});

describe("bearing position sliders", () => {
  it("snaps journals to element midplanes through validation", async () => {
    vi.unstubAllGlobals();
    const calls = installTransport();
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const dash = new Dashboard(root);
    await dash.loadExample();
    await flush();
    const slider = root.querySelector<HTMLInputElement>("#bearing-journal_b")!;
    expect(slider.value).toBe("3");
    slider.value = "2";
    slider.dispatchEvent(new Event("change"));
    await flush();
    expect(dash.store.get().rotor!.journal_b).toBe(2);
    expect(calls.filter((c) => c.url.endsWith("/rotor/validate")).length)
      .toBeGreaterThanOrEqual(2);
  });

  it("reverts a rejected bearing move", async () => {
    vi.unstubAllGlobals();
    installTransport();
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    const dash = new Dashboard(root);
    await dash.loadExample();
    await flush();
    (fetch as unknown as ReturnType<typeof vi.fn>).mockImplementationOnce(
      async () => new Response(JSON.stringify(
        { code: "invariant_violation", message: "journal order", path: "journal_a" }),
        { status: 422 }));
    const slider = root.querySelector<HTMLInputElement>("#bearing-journal_a")!;
    slider.value = "4";
    slider.dispatchEvent(new Event("change"));
    await flush();
    expect(slider.value).toBe("1");
    expect(dash.store.get().rotor!.journal_a).toBe(1);
    expect(root.querySelector("#error")!.textContent).toContain("rejected");
  });
});
