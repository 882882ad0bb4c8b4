/** Wire types of the /api/v1 service (SI units on the wire). */

export interface LayerDoc {
  d_m: number;
  D_m: number;
  material?: string;
  rho_kg_m3?: number;
}

export interface ElementDoc {
  L_m: number;
  layers: LayerDoc[];
}

export interface RotorDocument {
  format_version: 1;
  elements: ElementDoc[];
  journal_a: number;
  journal_b: number;
  thrust?: number;
}

export interface HgjbParams {
  alpha: number;
  beta: number;   // rad
  gamma: number;
  h_g: number;    // m
  h_r: number;    // m
  L: number;      // m
  D: number;      // m
}

export interface OperatingParams {
  fluid: string;
  p_a: number;  // Pa
  T: number;    // K
  N: number;    // rpm
}

export interface MassPropertiesPayload {
  mass_kg: number;
  z_cg_m: number;
  I_polar_kg_m2: number;
  I_transverse_kg_m2: number;
  bearing_offsets_m: [number, number];
  total_length_m: number;
  n_elements: number;
}

export interface ModePayload {
  mode_id: number;
  name: string;
  excited: boolean;
  stable: boolean | null;
  whirl_speed_ratio: number | null;
  log_dec: number | null;
}

export interface ComputeResponse {
  evaluator: string;
  mass_properties: MassPropertiesPayload;
  modes: ModePayload[];
  power_loss_w: number;
  load_capacity_n: number;
  features: Record<string, number>;
  warnings: string[];
  timing_ms: { evaluate: number; total: number };
}

export interface ContourDocument {
  format_version: 1;
  axes: { delta_h_r_um: number[]; delta_h_g_um: number[] };
  metrics: {
    worst_log_dec: (number | null)[][];
    min_load_capacity_n: (number | null)[][];
    max_power_loss_w: (number | null)[][];
  };
  feasible: boolean[][];
  valid: boolean[][];
  failures: unknown[];
  metadata: {
    design_digest: string;
    evaluator: string;
    speeds_rpm: number[];
    created_unix: number;
  };
}

export type SweepEvent =
  | { event: "progress"; done: number; total: number }
  | { event: "result"; document: ContourDocument }
  | { event: "error"; code: string; message: string; path?: string | null };

export interface ApiError {
  code: string;
  message: string;
  path?: string | null;
}
