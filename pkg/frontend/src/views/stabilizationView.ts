/**
 * Stabilization plot: real eigenvalue curves versus the scaling parameter,
 * with detected crossings marked and proposed stable windows shaded.
 *
 * The analyst brushes an index range on a chosen root to create or edit a
 * fit window. The brushed index set goes to the service verbatim; the fit
 * the service returns echoes the index set back, and the view refuses to
 * render a selection that differs from what was requested. A brush that
 * overlaps a crossing guard band is rejected by the service with 422 and
 * the rejection is rendered inline at the brushed region, with an override
 * toggle that re-submits the fit as forced (and flags the result).
 */

import { scaleLinear } from "d3-scale";
import { line } from "d3-shape";

import { ApiError, type ExplorerApi } from "../api/client.js";
import type {
  CrossingDoc,
  FitDoc,
  StabilizationDoc,
  StabilizeResult,
  WindowDoc,
  WindowsResult,
} from "../api/types.js";
import { JobGate } from "../core/jobGate.js";
import {
  brushCovers,
  brushIndices,
  type IndexBrush,
  normalizeBrush,
} from "../core/selection.js";

/** A committed brush: one fit candidate, listed as a chip under the plot. */
export interface WindowChip {
  fit: FitDoc;
  indices: number[];
  windowId: string;
  flatness: number | null;
  flagged: boolean;
}

/** A service-rejected brush, displayed at the brushed region. */
export interface InlineRejection {
  brush: IndexBrush;
  message: string;
  hint: string | null;
  crossing: CrossingDoc | null;
}

export interface StabilizationViewState {
  sessionId: string;
  data: StabilizationDoc | null;
  windows: WindowDoc[];
  crossings: CrossingDoc[];
  brush: IndexBrush | null;
  chips: WindowChip[];
  rejection: InlineRejection | null;
  override: boolean;
  /** Optional analyst-chosen fit order; null lets the service default. */
  fitOrder: number | null;
  notice: string | null;
}

const PANEL = "stabilization";

export class StabilizationView {
  readonly state: StabilizationViewState;
  private readonly client: ExplorerApi;
  private readonly gate: JobGate;

  constructor(client: ExplorerApi, sessionId: string, gate: JobGate = new JobGate()) {
    this.client = client;
    this.gate = gate;
    this.state = {
      sessionId,
      data: null,
      windows: [],
      crossings: [],
      brush: null,
      chips: [],
      rejection: null,
      override: false,
      fitOrder: null,
      notice: null,
    };
  }

  /** Pull the session document and adopt its sweep, windows and crossings. */
  async load(): Promise<void> {
    const doc = await this.gate.run(PANEL, () => this.client.getSession(this.state.sessionId));
    this.state.data = doc.stabilization;
    this.state.windows = doc.windows;
    this.state.crossings = doc.crossings;
  }

  /** Adopt the result of a completed stabilize job without refetching. */
  absorb(result: StabilizeResult | WindowsResult): void {
    this.state.windows = result.windows;
    this.state.crossings = result.crossings;
  }

  busy(): boolean {
    return this.gate.busy(PANEL);
  }

  toggleOverride(): boolean {
    this.state.override = !this.state.override;
    return this.state.override;
  }

  setFitOrder(order: number | null): void {
    this.state.fitOrder = order;
  }

  beginBrush(rootIndex: number, index: number): void {
    this.state.brush = { rootIndex, startIndex: index, endIndex: index };
    this.state.rejection = null;
    this.state.notice = null;
  }

  dragBrush(index: number): void {
    if (this.state.brush === null) return;
    this.state.brush = { ...this.state.brush, endIndex: index };
  }

  /** The detected window backing a brush: same root, overlapping if possible. */
  windowFor(brush: IndexBrush): WindowDoc | null {
    const b = normalizeBrush(brush);
    const onRoot = this.state.windows.filter((w) => w.root_index === b.rootIndex);
    if (onRoot.length === 0) return null;
    const overlapping = onRoot.filter((w) =>
      w.point_indices.some((i) => i >= b.startIndex && i <= b.endIndex),
    );
    if (overlapping.length > 0) return overlapping[0]!;
    let best = onRoot[0]!;
    let bestDist = Infinity;
    for (const w of onRoot) {
      const lo = w.point_indices[0] ?? 0;
      const hi = w.point_indices[w.point_indices.length - 1] ?? 0;
      const dist = b.startIndex > hi ? b.startIndex - hi : lo - b.endIndex;
      if (dist < bestDist) {
        bestDist = dist;
        best = w;
      }
    }
    return best;
  }

  /**
   * Commit the active brush: submit it as a fit on the backing window.
   * Returns the resulting chip, or null when the service rejected the
   * selection (the rejection is kept in state for inline rendering).
   */
  async endBrush(): Promise<WindowChip | null> {
    const brush = this.state.brush;
    if (brush === null) return null;
    this.state.brush = normalizeBrush(brush);
    return this.requestFit(this.state.brush);
  }

  private async requestFit(brush: IndexBrush): Promise<WindowChip | null> {
    const backing = this.windowFor(brush);
    if (backing === null) {
      this.state.rejection = {
        brush,
        message: `no detected window on root ${brush.rootIndex}; adjust detection first`,
        hint: null,
        crossing: null,
      };
      return null;
    }
    const indices = brushIndices(brush);
    try {
      const fit = await this.gate.run(PANEL, () =>
        this.client.fit(this.state.sessionId, {
          window_id: backing.id,
          point_indices: indices,
          force: this.state.override,
          ...(this.state.fitOrder !== null ? { order: this.state.fitOrder } : {}),
        }),
      );
      // The fit may anchor on a subset of the selection (the continued
      // fraction stops once converged), but never outside it: that would
      // mean rendering a selection different from what was fitted.
      const selection = new Set(indices);
      const stray = fit.point_indices.find((i) => !selection.has(i));
      if (stray !== undefined) {
        throw new Error(
          `fit ${fit.id} anchored at index ${stray}, outside the brushed selection`,
        );
      }
      const chip: WindowChip = {
        fit,
        indices,
        windowId: backing.id,
        flatness: backing.flatness,
        flagged: fit.forced,
      };
      this.state.chips = [...this.state.chips, chip];
      this.state.rejection = null;
      return chip;
    } catch (err) {
      if (err instanceof ApiError && err.isCrossingGuard) {
        this.state.rejection = {
          brush,
          message: err.message,
          hint: err.hint ?? null,
          crossing: err.crossing ?? null,
        };
        return null;
      }
      throw err;
    }
  }

  /** Re-submit the rejected brush with the override active. */
  async overrideRejection(): Promise<WindowChip | null> {
    const rejection = this.state.rejection;
    if (rejection === null) return null;
    if (!this.state.override) this.state.override = true;
    return this.requestFit(rejection.brush);
  }

  // ------------------------------------------------------------- rendering

  /** Pure render of the current state to an SVG + chip-list HTML fragment. */
  render(width = 860, height = 420): string {
    const data = this.state.data;
    if (data === null) {
      return `<div class="stabilization-view empty">no stabilization data loaded</div>`;
    }
    const margin = { top: 12, right: 16, bottom: 28, left: 56 };
    const alphas = data.alpha_grid;
    const x = scaleLinear()
      .domain([alphas[0] ?? 0, alphas[alphas.length - 1] ?? 1])
      .range([margin.left, width - margin.right]);
    let eMin = Infinity;
    let eMax = -Infinity;
    for (const row of data.curves) {
      for (const v of row) {
        eMin = Math.min(eMin, v);
        eMax = Math.max(eMax, v);
      }
    }
    const pad = 0.05 * (eMax - eMin || 1);
    const y = scaleLinear()
      .domain([eMin - pad, eMax + pad])
      .range([height - margin.bottom, margin.top]);

    const parts: string[] = [];
    parts.push(
      `<svg class="stabilization-plot" viewBox="0 0 ${width} ${height}" ` +
        `width="${width}" height="${height}">`,
    );

    for (const w of this.state.windows) {
      const [lo, hi] = w.alpha_range;
      parts.push(
        `<rect class="window-shade" data-window-id="${w.id}" data-root="${w.root_index}" ` +
          `x="${x(lo).toFixed(1)}" y="${margin.top}" ` +
          `width="${Math.max(x(hi) - x(lo), 1).toFixed(1)}" ` +
          `height="${height - margin.top - margin.bottom}" ` +
          `fill="#7dbb6f" fill-opacity="0.15"><title>${w.id}: root ${w.root_index}, ` +
          `${w.point_indices.length} pts, flatness ${w.flatness.toExponential(2)}</title></rect>`,
      );
    }

    const brush = this.state.brush;
    if (brush !== null) {
      const b = normalizeBrush(brush);
      const a0 = alphas[b.startIndex] ?? alphas[0] ?? 0;
      const a1 = alphas[b.endIndex] ?? a0;
      parts.push(
        `<rect class="brush" data-root="${b.rootIndex}" ` +
          `data-range="${b.startIndex}:${b.endIndex}" ` +
          `x="${x(a0).toFixed(1)}" y="${margin.top}" ` +
          `width="${Math.max(x(a1) - x(a0), 2).toFixed(1)}" ` +
          `height="${height - margin.top - margin.bottom}" ` +
          `fill="#4a90d9" fill-opacity="0.25" stroke="#4a90d9"/>`,
      );
    }

    const path = line<number>()
      .x((_, i) => x(alphas[i] ?? 0))
      .y((v) => y(v));
    data.curves.forEach((row, rootIdx) => {
      parts.push(
        `<path class="root-curve" data-root="${rootIdx}" d="${path(row) ?? ""}" ` +
          `fill="none" stroke="#555" stroke-width="1"/>`,
      );
    });

    for (const c of this.state.crossings) {
      const cx = x(c.alpha_at_min_gap);
      const rows = c.root_pair
        .map((r) => data.curves[r]?.[c.grid_index])
        .filter((v): v is number => v !== undefined);
      const cy = rows.length > 0 ? y(rows.reduce((s, v) => s + v, 0) / rows.length) : margin.top;
      parts.push(
        `<g class="crossing-marker" data-roots="${c.root_pair[0]},${c.root_pair[1]}" ` +
          `data-grid-index="${c.grid_index}" transform="translate(${cx.toFixed(1)},${cy.toFixed(1)})">` +
          `<path d="M-4,-4 L4,4 M-4,4 L4,-4" stroke="#c0392b" stroke-width="1.5"/>` +
          `<title>crossing of roots ${c.root_pair[0]}/${c.root_pair[1]} at ` +
          `α=${c.alpha_at_min_gap.toFixed(4)}, gap ${c.min_gap.toExponential(2)}</title></g>`,
      );
    }

    const rejection = this.state.rejection;
    if (rejection !== null) {
      const b = normalizeBrush(rejection.brush);
      const a0 = alphas[b.startIndex] ?? alphas[0] ?? 0;
      const a1 = alphas[b.endIndex] ?? a0;
      const mid = (x(a0) + x(a1)) / 2;
      parts.push(
        `<g class="inline-rejection" data-range="${b.startIndex}:${b.endIndex}" ` +
          `transform="translate(${mid.toFixed(1)},${margin.top + 14})">` +
          `<rect x="-160" y="-12" width="320" height="${rejection.hint ? 36 : 20}" ` +
          `fill="#fdeaea" stroke="#c0392b"/>` +
          `<text text-anchor="middle" font-size="11" fill="#c0392b">${escapeXml(
            rejection.message,
          )}</text>` +
          (rejection.hint
            ? `<text y="14" text-anchor="middle" font-size="10" fill="#7a3030">` +
              `${escapeXml(rejection.hint)}</text>`
            : "") +
          `</g>`,
      );
    }

    parts.push("</svg>");

    parts.push(`<div class="fit-chips">`);
    for (const chip of this.state.chips) {
      parts.push(
        `<span class="chip${chip.flagged ? " flagged" : ""}" data-fit-id="${chip.fit.id}" ` +
          `data-window-id="${chip.windowId}" data-flagged="${chip.flagged}">` +
          `${chip.windowId} · ${chip.indices.length} pts` +
          ` · ${chip.fit.point_indices.length} anchors` +
          (chip.flatness !== null ? ` · flatness ${chip.flatness.toExponential(2)}` : "") +
          (chip.flagged ? " · forced across crossing" : "") +
          `</span>`,
      );
    }
    parts.push(`</div>`);

    parts.push(
      `<label class="override-toggle"><input type="checkbox" class="override-box"` +
        `${this.state.override ? " checked" : ""}/> fit across crossing guard</label>`,
    );
    if (this.state.notice !== null) {
      parts.push(`<div class="notice">${escapeXml(this.state.notice)}</div>`);
    }
    return parts.join("\n");
  }
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export { brushCovers };
