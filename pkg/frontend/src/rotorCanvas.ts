/** Rotor cross-section rendering: layered rectangles to scale, mm labels. */

import { context2d } from "./contours.js";
import type { RotorDocument } from "./types.js";

const LAYER_FILLS = ["#8fa8c8", "#c8a88f", "#a8c88f"];

export function renderRotor(canvas: HTMLCanvasElement, rotor: RotorDocument): void {
  const ctx = context2d(canvas);
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const totalL = rotor.elements.reduce((acc, e) => acc + e.L_m, 0);
  const maxD = Math.max(...rotor.elements.map(
    (e) => Math.max(...e.layers.map((l) => l.D_m))));
  const margin = 34;
  const scaleX = (canvas.width - 2 * margin) / totalL;
  const scaleY = (canvas.height - 2 * margin) / maxD;
  const scale = Math.min(scaleX, scaleY * 1.0);
  const midY = canvas.height / 2;
  let z = 0;
  rotor.elements.forEach((element, index) => {
    const x = margin + z * scale;
    const w = element.L_m * scale;
    for (let k = element.layers.length - 1; k >= 0; k--) {
      const layer = element.layers[k];
      const outer = (layer.D_m * scaleY) / 2;
      const inner = (layer.d_m * scaleY) / 2;
      ctx.fillStyle = LAYER_FILLS[k % LAYER_FILLS.length];
      // upper and lower annulus halves of the cross-section
      ctx.fillRect(x, midY - outer, w, outer - inner);
      ctx.fillRect(x, midY + inner, w, outer - inner);
    }
    const isJournal = index === rotor.journal_a || index === rotor.journal_b;
    const isThrust = index === rotor.thrust;
    ctx.strokeStyle = isJournal ? "#b02020" : isThrust ? "#20702a" : "#444";
    ctx.lineWidth = isJournal || isThrust ? 2.5 : 1;
    const outerMax = (Math.max(...element.layers.map((l) => l.D_m)) * scaleY) / 2;
    ctx.strokeRect(x, midY - outerMax, w, 2 * outerMax);
    // length annotation in mm
    ctx.fillStyle = "#222";
    ctx.font = "10px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(`${(element.L_m * 1e3).toFixed(1)}`, x + w / 2, midY + outerMax + 14);
    if (isJournal) {
      ctx.fillStyle = "#b02020";
      ctx.fillText(index === rotor.journal_a ? "J1" : "J2", x + w / 2,
                   midY - outerMax - 6);
    } else if (isThrust) {
      ctx.fillStyle = "#20702a";
      ctx.fillText("T", x + w / 2, midY - outerMax - 6);
    }
    z += element.L_m;
  });
  ctx.fillStyle = "#222";
  ctx.textAlign = "left";
  ctx.fillText(`total ${(totalL * 1e3).toFixed(1)} mm, ` +
               `max Ø ${(maxD * 1e3).toFixed(1)} mm (dimensions in mm)`,
               margin, 16);
}
