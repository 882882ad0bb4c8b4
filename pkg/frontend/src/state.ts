/**
 * Dashboard state: one store, serialized updates, explicit staleness.
 *
 * Physics numbers never originate here; the store only holds what the
 * service returned and whether the inputs have drifted since (stale).
 */

import type {
  ComputeResponse, ContourDocument, HgjbParams, MassPropertiesPayload,
  OperatingParams, RotorDocument,
} from "./types.js";

export type TabKey = "stability" | "load" | "losses" | "axial";

/** Slider values live in dashboard units (um, rpm); requests convert to SI. */
export interface SliderValues {
  alpha: number;
  betaDeg: number;
  gamma: number;
  hgUm: number;
  hrUm: number;
  deltaHrUm: number;
  deltaHgUm: number;
  bearingLMm: number;
  bearingDMm: number;
}

export interface OperatingValues {
  fluid: string;
  pressurePa: number;
  temperatureK: number;
  speedRpm: number;
}

export interface UIState {
  rotor: RotorDocument | null;
  massProperties: MassPropertiesPayload | null;
  sliders: SliderValues;
  operating: OperatingValues;
  accuracy: number;
  journalA: number;
  journalB: number;
  computeResponse: ComputeResponse | null;
  contours: ContourDocument | null;
  activeTab: TabKey;
  inFlight: boolean;
  progress: { done: number; total: number } | null;
  stale: boolean;
  error: string | null;
}

export const DEFAULT_SLIDERS: SliderValues = {
  alpha: 0.5, betaDeg: 139.8, gamma: 0.8, hgUm: 16, hrUm: 8,
  deltaHrUm: 2, deltaHgUm: 4, bearingLMm: 12, bearingDMm: 8,
};

export const DEFAULT_OPERATING: OperatingValues = {
  fluid: "air", pressurePa: 1e5, temperatureK: 293.15, speedRpm: 40000,
};

export function initialState(): UIState {
  return {
    rotor: null,
    massProperties: null,
    sliders: { ...DEFAULT_SLIDERS },
    operating: { ...DEFAULT_OPERATING },
    accuracy: 2,
    journalA: 0,
    journalB: 1,
    computeResponse: null,
    contours: null,
    activeTab: "stability",
    inFlight: false,
    progress: null,
    stale: false,
    error: null,
  };
}

export function hgjbFromSliders(s: SliderValues): HgjbParams {
  return {
    alpha: s.alpha,
    beta: (s.betaDeg * Math.PI) / 180.0,
    gamma: s.gamma,
    h_g: s.hgUm * 1e-6,
    h_r: s.hrUm * 1e-6,
    L: s.bearingLMm * 1e-3,
    D: s.bearingDMm * 1e-3,
  };
}

export function operatingToSi(o: OperatingValues): OperatingParams {
  return { fluid: o.fluid, p_a: o.pressurePa, T: o.temperatureK, N: o.speedRpm };
}

type Listener = (state: UIState) => void;

export class Store {
  private state: UIState = initialState();
  private listeners: Listener[] = [];

  get(): UIState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  patch(partial: Partial<UIState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  /** Load a new rotor document; previous results become stale. */
  setRotor(rotor: RotorDocument, mass: MassPropertiesPayload): void {
    this.patch({
      rotor, massProperties: mass, error: null,
      journalA: rotor.journal_a, journalB: rotor.journal_b,
      stale: this.state.computeResponse !== null || this.state.contours !== null,
    });
  }

  /** Any slider movement marks existing results stale without recompute. */
  setSlider<K extends keyof SliderValues>(key: K, value: SliderValues[K]): void {
    this.patch({
      sliders: { ...this.state.sliders, [key]: value },
      stale: this.state.computeResponse !== null || this.state.contours !== null,
    });
  }

  setOperating<K extends keyof OperatingValues>(key: K, value: OperatingValues[K]): void {
    this.patch({
      operating: { ...this.state.operating, [key]: value },
      stale: this.state.computeResponse !== null || this.state.contours !== null,
    });
  }

  /** Rotor edits (table) also invalidate results. */
  setRotorEdited(rotor: RotorDocument, mass: MassPropertiesPayload): void {
    this.setRotor(rotor, mass);
  }

  beginCompute(): boolean {
    if (this.state.inFlight) return false;  // single in-flight request
    this.patch({ inFlight: true, progress: null, error: null });
    return true;
  }

  reportProgress(done: number, total: number): void {
    this.patch({ progress: { done, total } });
  }

  finishCompute(response: ComputeResponse, contours: ContourDocument): void {
    this.patch({
      computeResponse: response, contours, inFlight: false,
      progress: null, stale: false,
    });
  }

  failCompute(message: string): void {
    this.patch({ inFlight: false, progress: null, error: message });
  }

  setTab(tab: TabKey): void {
    // switching tabs never re-issues requests; it only flips the view
    this.patch({ activeTab: tab });
  }
}

/** Nominal (center-cell) value of a contour metric, straight off the wire. */
export function nominalCell(doc: ContourDocument,
                            metric: keyof ContourDocument["metrics"]): number | null {
  const grid = doc.metrics[metric];
  const i = Math.floor(doc.axes.delta_h_r_um.length / 2);
  const j = Math.floor(doc.axes.delta_h_g_um.length / 2);
  return grid[i][j];
}
