/** Thin client for the evaluation service; the only network access. */

import type {
  ApiError, ComputeResponse, ContourDocument, HgjbParams,
  MassPropertiesPayload, OperatingParams, RotorDocument, SweepEvent,
} from "./types.js";

export class ServiceError extends Error {
  constructor(public readonly detail: ApiError, public readonly status: number) {
    super(detail.message);
  }
}

async function raiseOnError(response: Response): Promise<void> {
  if (response.ok) return;
  let detail: ApiError = { code: "http_error", message: response.statusText };
  try {
    detail = (await response.json()) as ApiError;
  } catch {
    /* non-JSON error body */
  }
  throw new ServiceError(detail, response.status);
}

export interface SweepRequestOptions {
  deltaHrM: number;
  deltaHgM: number;
  gridN: number;
  accuracy?: number;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async health(): Promise<{ status: string; model_loaded: boolean }> {
    const r = await fetch(`${this.base}/healthz`);
    await raiseOnError(r);
    return r.json();
  }

  async validateRotor(rotor: RotorDocument): Promise<MassPropertiesPayload> {
    const r = await fetch(`${this.base}/api/v1/rotor/validate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(rotor),
    });
    await raiseOnError(r);
    return r.json();
  }

  async compute(rotor: RotorDocument, hgjb: HgjbParams, operating: OperatingParams,
                evaluator: string, accuracy?: number): Promise<ComputeResponse> {
    const body: Record<string, unknown> = { rotor, hgjb, operating, evaluator };
    if (accuracy !== undefined) body.accuracy = accuracy;
    const r = await fetch(`${this.base}/api/v1/compute`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseOnError(r);
    return r.json();
  }

  /**
   * Run a robustness sweep; progress events stream as NDJSON lines and the
   * final line carries the contour document.
   */
  async sweep(rotor: RotorDocument, hgjb: HgjbParams, operating: OperatingParams,
              evaluator: string, options: SweepRequestOptions,
              onProgress: (done: number, total: number) => void,
  ): Promise<ContourDocument> {
    const body: Record<string, unknown> = {
      rotor, hgjb, operating, evaluator,
      sweep: {
        delta_h_r: options.deltaHrM,
        delta_h_g: options.deltaHgM,
        grid_n: options.gridN,
      },
    };
    if (options.accuracy !== undefined) body.accuracy = options.accuracy;
    const r = await fetch(`${this.base}/api/v1/sweep`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    await raiseOnError(r);
    let document: ContourDocument | null = null;
    for await (const line of ndjsonLines(r)) {
      const event = JSON.parse(line) as SweepEvent;
      if (event.event === "progress") {
        onProgress(event.done, event.total);
      } else if (event.event === "result") {
        document = event.document;
      } else {
        throw new ServiceError(
          { code: event.code, message: event.message, path: event.path }, 200);
      }
    }
    if (document === null) {
      throw new ServiceError(
        { code: "stream_truncated", message: "sweep stream ended without a result" },
        200);
    }
    return document;
  }
}

/** Split a streaming (or buffered) response body into NDJSON lines. */
export async function* ndjsonLines(response: Response): AsyncGenerator<string> {
  const body = response.body;
  if (body === null) {
    for (const line of (await response.text()).split("\n")) {
      if (line.trim()) yield line;
    }
    return;
  }
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let idx;
    while ((idx = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, idx);
      buffer = buffer.slice(idx + 1);
      if (line.trim()) yield line;
    }
  }
  buffer += decoder.decode();
  if (buffer.trim()) yield buffer;
}
