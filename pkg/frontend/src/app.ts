/** Dashboard assembly: widgets, compute action, tabbed result views. */

import { ApiClient, ServiceError } from "./api.js";
import { renderContours, TAB_VIEWS } from "./contours.js";
import { GeometryTable } from "./geometryTable.js";
import { renderRotor } from "./rotorCanvas.js";
import {
  hgjbFromSliders, nominalCell, operatingToSi, Store, TabKey,
} from "./state.js";
import type { RotorDocument } from "./types.js";

const TAB_ORDER: { key: TabKey; label: string }[] = [
  { key: "stability", label: "Stability" },
  { key: "load", label: "Load capacity" },
  { key: "losses", label: "Power losses" },
  { key: "axial", label: "Axial bearing" },
];

interface SliderSpec {
  key: keyof import("./state.js").SliderValues;
  label: string;
  min: number;
  max: number;
  step: number;
}

const SLIDERS: SliderSpec[] = [
  { key: "alpha", label: "α groove/ridge ratio", min: 0.2, max: 0.8, step: 0.01 },
  { key: "betaDeg", label: "β groove angle (°)", min: 115, max: 165, step: 0.5 },
  { key: "gamma", label: "γ grooved fraction", min: 0.4, max: 0.95, step: 0.01 },
  { key: "hgUm", label: "h_g groove depth (µm)", min: 4, max: 40, step: 0.5 },
  { key: "hrUm", label: "h_r clearance (µm)", min: 4, max: 24, step: 0.5 },
  { key: "deltaHrUm", label: "Δh_r window (µm)", min: 0, max: 6, step: 0.5 },
  { key: "deltaHgUm", label: "Δh_g window (µm)", min: 0, max: 10, step: 0.5 },
  { key: "bearingLMm", label: "bearing length (mm)", min: 4, max: 24, step: 0.5 },
  { key: "bearingDMm", label: "bearing diameter (mm)", min: 4, max: 16, step: 0.5 },
];

export class Dashboard {
  readonly store = new Store();
  private api: ApiClient;
  private table: GeometryTable;
  private els: Record<string, HTMLElement> = {};

  constructor(private readonly root: HTMLElement, api?: ApiClient) {
    this.api = api ?? new ApiClient("");
    this.buildSkeleton();
    this.table = new GeometryTable(this.els.table, this.store, this.api);
    this.store.subscribe(() => this.render());
  }

  private buildSkeleton(): void {
    this.root.innerHTML = `
      <header><h1>gas-bearing rotor dashboard</h1>
        <span id="health" class="health"></span></header>
      <div class="columns">
        <section class="left">
          <div class="load-row">
            <input id="rotor-file" type="file" accept=".json,.rotor" />
            <button id="load-example">Load example rotor</button>
          </div>
          <canvas id="rotor-canvas" width="540" height="220"></canvas>
          <div id="bearing-positions"></div>
          <div id="geometry-table"></div>
          <div id="mass-card" class="card"></div>
        </section>
        <section class="right">
          <div id="sliders"></div>
          <div id="operating"></div>
          <div class="compute-row">
            <button id="compute" class="primary">Compute</button>
            <progress id="progress" max="1" value="0" hidden></progress>
            <span id="stale-banner" class="stale" hidden>results stale - recompute</span>
          </div>
          <div id="error" class="error"></div>
          <nav id="tabs"></nav>
          <div id="tab-content">
            <div id="summary" class="card"></div>
            <canvas id="contour-canvas" width="520" height="420"></canvas>
            <div id="mode-table"></div>
            <div id="axial-placeholder" class="placeholder" hidden>
              axial (thrust) bearing model out of scope - geometry placeholder only
            </div>
          </div>
        </section>
      </div>`;
    const byId = (id: string) => this.root.querySelector<HTMLElement>(`#${id}`)!;
    for (const id of ["health", "rotor-canvas", "geometry-table", "mass-card",
                      "sliders", "operating", "compute", "progress", "stale-banner",
                      "error", "tabs", "summary", "contour-canvas", "mode-table",
                      "axial-placeholder", "load-example", "rotor-file",
                      "bearing-positions"]) {
      this.els[id.replace(/-([a-z])/g, (_, c) => c.toUpperCase())] = byId(id);
    }
    this.els.table = this.els.geometryTable;
    this.buildSliders();
    this.buildOperating();
    this.buildTabs();
    (this.els.compute as HTMLButtonElement).addEventListener("click",
      () => void this.compute());
    (this.els.loadExample as HTMLButtonElement).addEventListener("click",
      () => void this.loadExample());
    (this.els.rotorFile as HTMLInputElement).addEventListener("change",
      () => void this.loadFromFile());
  }

  private buildSliders(): void {
    const host = this.els.sliders;
    for (const spec of SLIDERS) {
      const row = document.createElement("label");
      row.className = "slider-row";
      const title = document.createElement("span");
      const value = document.createElement("output");
      const input = document.createElement("input");
      input.type = "range";
      input.min = String(spec.min);
      input.max = String(spec.max);
      input.step = String(spec.step);
      input.id = `slider-${spec.key}`;
      input.value = String(this.store.get().sliders[spec.key]);
      title.textContent = spec.label;
      value.textContent = input.value;
      input.addEventListener("input", () => {
        value.textContent = input.value;
        this.store.setSlider(spec.key, Number(input.value));
      });
      row.append(title, input, value);
      host.appendChild(row);
    }
  }

  private buildOperating(): void {
    const host = this.els.operating;
    host.innerHTML = `
      <label>fluid <select id="op-fluid">
        <option>air</option><option>nitrogen</option></select></label>
      <label>p_a (Pa) <input id="op-pa" type="number" value="100000" step="1000"></label>
      <label>T (K) <input id="op-t" type="number" value="293.15" step="1"></label>
      <label>N (rpm) <input id="op-n" type="number" value="40000" step="1000"></label>
      <label>accuracy <select id="op-acc">
        <option value="1">coarse</option><option value="2" selected>default</option>
        <option value="3">fine</option><option value="4">finest</option>
      </select></label>`;
    host.querySelector<HTMLSelectElement>("#op-fluid")!.addEventListener(
      "change", (e) => this.store.setOperating(
        "fluid", (e.target as HTMLSelectElement).value));
    host.querySelector<HTMLInputElement>("#op-pa")!.addEventListener(
      "change", (e) => this.store.setOperating(
        "pressurePa", Number((e.target as HTMLInputElement).value)));
    host.querySelector<HTMLInputElement>("#op-t")!.addEventListener(
      "change", (e) => this.store.setOperating(
        "temperatureK", Number((e.target as HTMLInputElement).value)));
    host.querySelector<HTMLInputElement>("#op-n")!.addEventListener(
      "change", (e) => this.store.setOperating(
        "speedRpm", Number((e.target as HTMLInputElement).value)));
    host.querySelector<HTMLSelectElement>("#op-acc")!.addEventListener(
      "change", (e) => this.store.patch(
        { accuracy: Number((e.target as HTMLSelectElement).value) }));
  }

  private buildTabs(): void {
    for (const tab of TAB_ORDER) {
      const button = document.createElement("button");
      button.textContent = tab.label;
      button.dataset.tab = tab.key;
      button.addEventListener("click", () => this.store.setTab(tab.key));
      this.els.tabs.appendChild(button);
    }
  }

  async loadExample(): Promise<void> {
    const response = await fetch("example.rotor.json");
    const rotor = (await response.json()) as RotorDocument;
    await this.adoptRotor(rotor);
  }

  async loadFromFile(): Promise<void> {
    const input = this.els.rotorFile as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      const rotor = JSON.parse(await file.text()) as RotorDocument;
      await this.adoptRotor(rotor);
    } catch (err) {
      this.store.patch({ error: `could not load rotor: ${String(err)}` });
    }
  }

  async adoptRotor(rotor: RotorDocument): Promise<void> {
    try {
      const mass = await this.api.validateRotor(rotor);
      this.store.setRotor(rotor, mass);
      this.buildBearingSliders(rotor);
    } catch (err) {
      this.store.patch({
        error: err instanceof ServiceError
          ? `rotor rejected: ${err.detail.message}` : String(err),
      });
    }
  }

  /** Bearing positions snap to element midplanes (one slider per journal). */
  private buildBearingSliders(rotor: RotorDocument): void {
    const host = this.els.bearingPositions;
    host.innerHTML = "";
    const n = rotor.elements.length;
    for (const which of ["journal_a", "journal_b"] as const) {
      const row = document.createElement("label");
      row.className = "slider-row";
      const title = document.createElement("span");
      title.textContent = which === "journal_a"
        ? "journal A position (element)" : "journal B position (element)";
      const input = document.createElement("input");
      input.type = "range";
      input.min = "0";
      input.max = String(n - 1);
      input.step = "1";
      input.id = `bearing-${which}`;
      input.value = String(this.store.get().rotor?.[which] ?? 0);
      const value = document.createElement("output");
      value.textContent = input.value;
      input.addEventListener("change", () => {
        value.textContent = input.value;
        void this.moveBearing(which, Number(input.value), input);
      });
      row.append(title, input, value);
      host.appendChild(row);
    }
  }

  async moveBearing(which: "journal_a" | "journal_b", index: number,
                    input: HTMLInputElement): Promise<void> {
    const rotor = this.store.get().rotor;
    if (!rotor) return;
    const candidate: RotorDocument = { ...rotor, [which]: index };
    try {
      const mass = await this.api.validateRotor(candidate);
      this.store.setRotorEdited(candidate, mass);
    } catch (err) {
      input.value = String(rotor[which]);  // rejected moves revert
      this.store.patch({
        error: err instanceof ServiceError
          ? `bearing position rejected: ${err.detail.message}` : String(err),
      });
    }
  }

  /** The Compute action: nominal evaluation plus the robustness sweep. */
  async compute(): Promise<void> {
    const state = this.store.get();
    if (!state.rotor || !this.store.beginCompute()) return;
    const hgjb = hgjbFromSliders(state.sliders);
    const operating = operatingToSi(state.operating);
    try {
      const response = await this.api.compute(
        state.rotor, hgjb, operating, "surrogate", state.accuracy);
      const contours = await this.api.sweep(
        state.rotor, hgjb, operating, "surrogate",
        {
          deltaHrM: state.sliders.deltaHrUm * 1e-6,
          deltaHgM: state.sliders.deltaHgUm * 1e-6,
          gridN: state.sliders.deltaHrUm === 0 && state.sliders.deltaHgUm === 0 ? 1 : 21,
          accuracy: state.accuracy,
        },
        (done, total) => this.store.reportProgress(done, total));
      this.store.finishCompute(response, contours);
    } catch (err) {
      this.store.failCompute(err instanceof ServiceError
        ? `${err.detail.code}: ${err.detail.message}` : String(err));
    }
  }

  // ---------------------------------------------------------------- render

  private render(): void {
    const state = this.store.get();
    (this.els.compute as HTMLButtonElement).disabled =
      state.inFlight || !state.rotor;
    const progress = this.els.progress as HTMLProgressElement;
    progress.hidden = !state.inFlight;
    if (state.progress) {
      progress.max = state.progress.total;
      progress.value = state.progress.done;
    }
    (this.els.staleBanner as HTMLElement).hidden = !state.stale;
    this.els.error.textContent = state.error ?? "";
    this.els.health.textContent = state.inFlight
      ? `computing${state.progress
        ? ` ${state.progress.done}/${state.progress.total}` : "..."}` : "";
    if (state.rotor) {
      renderRotor(this.els.rotorCanvas as HTMLCanvasElement, state.rotor);
    }
    if (state.massProperties) {
      const mp = state.massProperties;
      this.els.massCard.innerHTML =
        `<b>mass</b> ${(mp.mass_kg * 1e3).toFixed(2)} g &nbsp; ` +
        `<b>CG</b> ${(mp.z_cg_m * 1e3).toFixed(2)} mm &nbsp; ` +
        `<b>I_p</b> ${mp.I_polar_kg_m2.toExponential(3)} &nbsp; ` +
        `<b>I_t</b> ${mp.I_transverse_kg_m2.toExponential(3)} kg m²`;
    }
    for (const button of this.els.tabs.querySelectorAll("button")) {
      button.classList.toggle("active", button.dataset.tab === state.activeTab);
    }
    this.renderActiveTab();
  }

  private renderActiveTab(): void {
    const state = this.store.get();
    const canvas = this.els.contourCanvas as HTMLCanvasElement;
    const axial = state.activeTab === "axial";
    this.els.axialPlaceholder.hidden = !axial;
    canvas.hidden = axial;
    this.els.summary.hidden = axial;
    this.els.modeTable.hidden = axial;
    if (axial) return;
    const view = TAB_VIEWS[state.activeTab];
    if (state.contours) {
      if (state.contours.axes.delta_h_r_um.length === 1
          && state.contours.axes.delta_h_g_um.length === 1) {
        canvas.hidden = true;  // degenerate 1x1 map renders as the value card
      } else {
        renderContours(canvas, state.contours, view);
      }
      const nominal = nominalCell(state.contours, view.metric);
      this.els.summary.innerHTML =
        `<b>${view.title}</b> at nominal: ` +
        `<span id="nominal-value">${nominal === null ? "no excited mode"
          : String(nominal)}</span> ${nominal === null ? "" : view.unit}` +
        (state.stale ? ' <em>(stale)</em>' : "");
    } else {
      this.els.summary.textContent = "no results yet - press Compute";
    }
    this.renderModeTable();
  }

  private renderModeTable(): void {
    const response = this.store.get().computeResponse;
    const host = this.els.modeTable;
    if (!response) {
      host.innerHTML = "";
      return;
    }
    const rows = response.modes.map((m) =>
      `<tr><td>${m.name}</td><td>${m.excited ? "yes" : "no"}</td>` +
      `<td>${m.stable === null ? "-" : m.stable ? "yes" : "no"}</td>` +
      `<td>${m.whirl_speed_ratio === null ? "-" : m.whirl_speed_ratio.toFixed(4)}</td>` +
      `<td data-logdec="${m.log_dec === null ? "" : String(m.log_dec)}">` +
      `${m.log_dec === null ? "-" : m.log_dec.toFixed(4)}</td></tr>`).join("");
    host.innerHTML =
      `<table class="modes"><thead><tr><th>mode</th><th>excited</th>` +
      `<th>stable</th><th>ν*</th><th>log dec</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>` +
      `<div class="scalars">power loss ${response.power_loss_w.toFixed(3)} W` +
      ` &middot; load capacity ${response.load_capacity_n.toFixed(2)} N` +
      (response.warnings.length
        ? `<div class="warnings">${response.warnings.join("<br>")}</div>` : "") +
      `</div>`;
  }
}
