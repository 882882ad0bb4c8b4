/** Editable element/layer table; edits round-trip through /rotor/validate. */

import type { ApiClient } from "./api.js";
import { ServiceError } from "./api.js";
import type { Store } from "./state.js";
import type { RotorDocument } from "./types.js";

export interface CellEdit {
  element: number;
  layer: number | null;  // null -> element length
  field: "L_m" | "d_m" | "D_m";
  value: number;
}

export function applyEdit(rotor: RotorDocument, edit: CellEdit): RotorDocument {
  const next: RotorDocument = JSON.parse(JSON.stringify(rotor));
  if (edit.layer === null) {
    next.elements[edit.element].L_m = edit.value;
  } else {
    next.elements[edit.element].layers[edit.layer][edit.field as "d_m" | "D_m"] =
      edit.value;
  }
  return next;
}

export class GeometryTable {
  private message: HTMLElement;

  constructor(private readonly root: HTMLElement, private readonly store: Store,
              private readonly api: ApiClient) {
    this.message = document.createElement("div");
    this.message.className = "table-message";
    store.subscribe(() => this.render());
  }

  render(): void {
    const rotor = this.store.get().rotor;
    this.root.innerHTML = "";
    if (!rotor) {
      this.root.textContent = "no rotor loaded";
      return;
    }
    const table = document.createElement("table");
    table.className = "geometry";
    table.innerHTML =
      "<thead><tr><th>#</th><th>L (mm)</th>" +
      "<th>d1</th><th>D1</th><th>d2</th><th>D2</th><th>d3</th><th>D3</th>" +
      "<th>role</th></tr></thead>";
    const body = document.createElement("tbody");
    rotor.elements.forEach((element, i) => {
      const row = document.createElement("tr");
      row.appendChild(cell(String(i)));
      row.appendChild(this.editable(i, null, "L_m", element.L_m * 1e3));
      for (let k = 0; k < 3; k++) {
        const layer = element.layers[k];
        if (layer) {
          row.appendChild(this.editable(i, k, "d_m", layer.d_m * 1e3));
          row.appendChild(this.editable(i, k, "D_m", layer.D_m * 1e3));
        } else {
          row.appendChild(cell("-"));
          row.appendChild(cell("-"));
        }
      }
      const role = i === rotor.journal_a ? "journal A"
        : i === rotor.journal_b ? "journal B"
        : i === rotor.thrust ? "thrust" : "";
      row.appendChild(cell(role));
      body.appendChild(row);
    });
    table.appendChild(body);
    this.root.appendChild(table);
    this.root.appendChild(this.message);
  }

  private editable(element: number, layer: number | null,
                   field: CellEdit["field"], valueMm: number): HTMLTableCellElement {
    const td = document.createElement("td");
    const input = document.createElement("input");
    input.type = "number";
    input.step = "0.1";
    input.value = valueMm.toFixed(2);
    input.dataset.cell = `${element}:${layer ?? "L"}:${field}`;
    input.addEventListener("change", () => {
      void this.commit({ element, layer, field, value: Number(input.value) * 1e-3 },
                       input, valueMm);
    });
    td.appendChild(input);
    return td;
  }

  async commit(edit: CellEdit, input: HTMLInputElement,
               previousMm: number): Promise<void> {
    const rotor = this.store.get().rotor;
    if (!rotor) return;
    const candidate = applyEdit(rotor, edit);
    try {
      const mass = await this.api.validateRotor(candidate);
      this.message.textContent = "";
      this.store.setRotorEdited(candidate, mass);
    } catch (err) {
      input.value = previousMm.toFixed(2);  // rejected edits revert
      this.message.textContent = err instanceof ServiceError
        ? `rejected: ${err.detail.message}`
        : `rejected: ${String(err)}`;
    }
  }
}

function cell(text: string): HTMLTableCellElement {
  const td = document.createElement("td");
  td.textContent = text;
  return td;
}
