/** Canvas rendering of contour documents: heatmap + feasibility boundary. */

import type { ContourDocument } from "./types.js";

export type MetricKey = keyof ContourDocument["metrics"];

/**
 * Diverging palette centred at zero (used for the log decrement, whose
 * zero isoline is the feasibility boundary): negative values blend to
 * red, positive to blue, zero is white.
 */
export function divergingColor(value: number, limit: number): string {
  const t = Math.max(-1, Math.min(1, value / (limit || 1)));
  if (t >= 0) {
    const c = Math.round(255 * (1 - t));
    return `rgb(${c},${c},255)`;
  }
  const c = Math.round(255 * (1 + t));
  return `rgb(255,${c},${c})`;
}

/** Sequential palette for strictly positive metrics (loads, losses). */
export function sequentialColor(value: number, lo: number, hi: number): string {
  const t = hi > lo ? Math.max(0, Math.min(1, (value - lo) / (hi - lo))) : 0.5;
  const c = Math.round(235 - 175 * t);
  return `rgb(${c},${Math.round(245 - 120 * t)},255)`;
}

export interface ContourView {
  metric: MetricKey;
  diverging: boolean;
  title: string;
  unit: string;
}

export const TAB_VIEWS: Record<string, ContourView> = {
  stability: { metric: "worst_log_dec", diverging: true,
               title: "worst-case log decrement", unit: "-" },
  load: { metric: "min_load_capacity_n", diverging: false,
          title: "minimum load capacity", unit: "N" },
  losses: { metric: "max_power_loss_w", diverging: false,
            title: "maximum power loss", unit: "W" },
};

function finiteValues(grid: (number | null)[][]): number[] {
  const out: number[] = [];
  for (const row of grid) {
    for (const v of row) if (v !== null && Number.isFinite(v)) out.push(v);
  }
  return out;
}

/** 2D context, or null where canvas is unavailable (headless test DOM). */
export function context2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  try {
    return canvas.getContext("2d");
  } catch {
    return null;
  }
}

export function renderContours(canvas: HTMLCanvasElement, doc: ContourDocument,
                               view: ContourView): void {
  const ctx = context2d(canvas);
  if (!ctx) return;
  const grid = doc.metrics[view.metric];
  const ni = doc.axes.delta_h_r_um.length;
  const nj = doc.axes.delta_h_g_um.length;
  const margin = 42;
  const w = canvas.width - 2 * margin;
  const h = canvas.height - 2 * margin;
  const cw = w / nj;
  const ch = h / ni;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const values = finiteValues(grid);
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, 1e-12);
  const limit = Math.max(Math.abs(lo), Math.abs(hi));
  for (let i = 0; i < ni; i++) {
    for (let j = 0; j < nj; j++) {
      const value = grid[i][j];
      const x = margin + j * cw;
      const y = margin + (ni - 1 - i) * ch;  // dh_r grows upward
      if (!doc.valid[i][j]) {
        ctx.fillStyle = "#999";
      } else if (value === null) {
        ctx.fillStyle = "#e8f0e8";  // no excited mode anywhere: quiet cell
      } else {
        ctx.fillStyle = view.diverging
          ? divergingColor(value, limit)
          : sequentialColor(value, lo, hi);
      }
      ctx.fillRect(x, y, Math.ceil(cw), Math.ceil(ch));
      if (view.diverging && !doc.feasible[i][j] && doc.valid[i][j]) {
        ctx.strokeStyle = "rgba(160,0,0,0.55)";
        ctx.strokeRect(x + 0.5, y + 0.5, cw - 1, ch - 1);
      }
    }
  }
  // nominal point marker
  const iMid = Math.floor(ni / 2);
  const jMid = Math.floor(nj / 2);
  ctx.fillStyle = "#000";
  ctx.beginPath();
  ctx.arc(margin + (jMid + 0.5) * cw, margin + (ni - 1 - iMid + 0.5) * ch,
          Math.min(cw, ch) * 0.18 + 2, 0, 2 * Math.PI);
  ctx.stroke();
  // axes labels
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText("Δh_g (µm)", margin + w / 2, canvas.height - 8);
  ctx.save();
  ctx.translate(12, margin + h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText("Δh_r (µm)", 0, 0);
  ctx.restore();
  const dg = doc.axes.delta_h_g_um;
  const dr = doc.axes.delta_h_r_um;
  ctx.fillText(dg[0].toFixed(1), margin, canvas.height - margin + 14);
  ctx.fillText(dg[nj - 1].toFixed(1), margin + w, canvas.height - margin + 14);
  ctx.textAlign = "right";
  ctx.fillText(dr[0].toFixed(1), margin - 4, margin + h);
  ctx.fillText(dr[ni - 1].toFixed(1), margin - 4, margin + 10);
}
