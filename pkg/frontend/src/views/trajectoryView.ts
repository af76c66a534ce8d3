/**
 * Trajectory explorer: paired θ- and α-trajectory panels sharing one
 * complex-plane canvas.
 *
 * Sliders for the fixed α (of the θ-trajectory) and fixed θ (of the
 * α-trajectory) re-request trajectories from the service; nothing is
 * interpolated client-side. Cusp candidates — local minima of consecutive
 * point spacing — are highlighted, each point carries its Padé error, and
 * the "converge" button runs the service's stationary search seeded at the
 * current view. A search that finds nothing renders the returned |C′|
 * derivative-magnitude landscape as a heatmap to guide the next brush. An
 * optional overlay shows the diagonalization cross-check next to the
 * rational-fit marker.
 */

import { scaleLinear } from "d3-scale";

import type { ExplorerApi } from "../api/client.js";
import type {
  ComplexPair,
  CrosscheckDoc,
  FitDoc,
  GridSpec,
  NotFoundDoc,
  RegionSpec,
  StationaryDoc,
  StationaryResponse,
  TrajectoryDoc,
} from "../api/types.js";
import { type CuspCandidate, cuspCandidates, cuspsOverlap, tightestCusp } from "../core/cusp.js";
import { JobGate } from "../core/jobGate.js";

export interface TrajectoryViewState {
  sessionId: string;
  fit: FitDoc;
  fixedAlpha: number;
  fixedTheta: number;
  thetaGrid: GridSpec;
  alphaGrid: GridSpec;
  thetaTrajectory: TrajectoryDoc | null;
  alphaTrajectory: TrajectoryDoc | null;
  stationary: StationaryDoc[];
  notFound: NotFoundDoc | null;
  crosscheck: CrosscheckDoc | null;
  overlay: boolean;
  customRegion: RegionSpec | null;
}

const THETA_PANEL = "trajectory-theta";
const ALPHA_PANEL = "trajectory-alpha";
const CONVERGE_PANEL = "stationary";
const CROSSCHECK_PANEL = "crosscheck";

export class TrajectoryView {
  readonly state: TrajectoryViewState;
  private readonly client: ExplorerApi;
  private readonly gate: JobGate;

  constructor(
    client: ExplorerApi,
    sessionId: string,
    fit: FitDoc,
    gate: JobGate = new JobGate(),
  ) {
    this.client = client;
    this.gate = gate;
    const abscissae = fit.fraction.abscissae;
    const lo = Math.min(...abscissae);
    const hi = Math.max(...abscissae);
    this.state = {
      sessionId,
      fit,
      fixedAlpha: (lo + hi) / 2,
      fixedTheta: 0.1,
      thetaGrid: { start: 0, stop: 0.5, count: 41 },
      alphaGrid: { start: 0.7 * lo, stop: 1.3 * hi, count: 41 },
      thetaTrajectory: null,
      alphaTrajectory: null,
      stationary: [],
      notFound: null,
      crosscheck: null,
      overlay: false,
      customRegion: null,
    };
  }

  busy(panel: string): boolean {
    return this.gate.busy(panel);
  }

  async refreshTheta(): Promise<TrajectoryDoc> {
    const doc = await this.gate.run(THETA_PANEL, () =>
      this.client.trajectory(this.state.sessionId, {
        fit_id: this.state.fit.id,
        kind: "theta",
        fixed: this.state.fixedAlpha,
        grid: this.state.thetaGrid,
      }),
    );
    this.state.thetaTrajectory = doc;
    return doc;
  }

  async refreshAlpha(): Promise<TrajectoryDoc> {
    const doc = await this.gate.run(ALPHA_PANEL, () =>
      this.client.trajectory(this.state.sessionId, {
        fit_id: this.state.fit.id,
        kind: "alpha",
        fixed: this.state.fixedTheta,
        grid: this.state.alphaGrid,
      }),
    );
    this.state.alphaTrajectory = doc;
    return doc;
  }

  async refresh(): Promise<void> {
    await this.refreshTheta();
    await this.refreshAlpha();
  }

  /** Slider: fixed α of the θ-trajectory. Re-requests, never recomputes. */
  async setFixedAlpha(value: number): Promise<TrajectoryDoc> {
    this.state.fixedAlpha = value;
    return this.refreshTheta();
  }

  /** Slider: fixed θ of the α-trajectory. */
  async setFixedTheta(value: number): Promise<TrajectoryDoc> {
    this.state.fixedTheta = value;
    return this.refreshAlpha();
  }

  /**
   * The view's current (α, θ) extent: where a zoomed-in analyst wants the
   * stationary search to look. Cleared to let the service derive the
   * window-based default region.
   */
  setRegion(region: RegionSpec | null): void {
    this.state.customRegion = region;
  }

  /**
   * Run the stationary search seeded at the current view. With no custom
   * region, the service searches the region derived from the fit's window —
   * the same one the batch pipeline uses, so a converge on an untouched
   * panel reproduces the pipeline's stationary point exactly.
   */
  async converge(): Promise<StationaryResponse> {
    const response = await this.gate.run(CONVERGE_PANEL, () =>
      this.client.stationary(this.state.sessionId, {
        fit_id: this.state.fit.id,
        ...(this.state.customRegion !== null ? { region: this.state.customRegion } : {}),
      }),
    );
    this.state.stationary = response.stationary_points;
    this.state.notFound = response.not_found;
    return response;
  }

  /** Fetch (or hide) the diagonalization cross-check for the first marker. */
  async toggleCrosscheck(): Promise<CrosscheckDoc | null> {
    if (this.state.overlay) {
      this.state.overlay = false;
      return null;
    }
    const first = this.state.stationary[0];
    if (first === undefined) {
      throw new Error("no stationary point to cross-check; converge first");
    }
    const doc = await this.gate.run(CROSSCHECK_PANEL, () =>
      this.client.crosscheckResult(this.state.sessionId, { stationary_id: first.id }),
    );
    this.state.crosscheck = doc;
    this.state.overlay = true;
    return doc;
  }

  cusps(kind: "theta" | "alpha"): CuspCandidate[] {
    const traj = kind === "theta" ? this.state.thetaTrajectory : this.state.alphaTrajectory;
    return traj === null ? [] : cuspCandidates(traj.energies);
  }

  // ------------------------------------------------------------- rendering

  render(width = 860, height = 480): string {
    const parts: string[] = [];
    parts.push(`<div class="trajectory-view" data-fit-id="${this.state.fit.id}">`);
    parts.push(this.renderControls());
    if (this.state.notFound !== null) {
      parts.push(this.renderHeatmap(this.state.notFound, width, height));
    } else {
      parts.push(this.renderCanvas(width, height));
    }
    parts.push("</div>");
    return parts.join("\n");
  }

  private renderControls(): string {
    const s = this.state;
    return [
      `<div class="trajectory-controls">`,
      `<label>fixed α <input type="range" class="fixed-alpha-slider" ` +
        `min="${s.alphaGrid.start}" max="${s.alphaGrid.stop}" step="0.001" ` +
        `value="${s.fixedAlpha}"/> <span class="fixed-alpha-value">${s.fixedAlpha.toFixed(
          3,
        )}</span></label>`,
      `<label>fixed θ <input type="range" class="fixed-theta-slider" ` +
        `min="${s.thetaGrid.start}" max="${s.thetaGrid.stop}" step="0.001" ` +
        `value="${s.fixedTheta}"/> <span class="fixed-theta-value">${s.fixedTheta.toFixed(
          3,
        )}</span></label>`,
      `<button class="converge-btn"${this.gate.busy(CONVERGE_PANEL) ? " disabled" : ""}>` +
        `converge</button>`,
      `<label class="overlay-toggle"><input type="checkbox" class="overlay-box"` +
        `${s.overlay ? " checked" : ""}/> diagonalization cross-check</label>`,
      `</div>`,
    ].join("\n");
  }

  private renderCanvas(width: number, height: number): string {
    const margin = { top: 14, right: 16, bottom: 30, left: 64 };
    const points: ComplexPair[] = [
      ...(this.state.thetaTrajectory?.energies ?? []),
      ...(this.state.alphaTrajectory?.energies ?? []),
      ...this.state.stationary.map((p) => p.energy),
    ];
    if (this.state.overlay && this.state.crosscheck !== null) {
      points.push(this.state.crosscheck.diagonalized.energy);
    }
    if (points.length === 0) {
      return `<div class="complex-canvas empty">no trajectories requested yet</div>`;
    }
    let reLo = Infinity;
    let reHi = -Infinity;
    let imLo = Infinity;
    let imHi = -Infinity;
    for (const [re, im] of points) {
      reLo = Math.min(reLo, re);
      reHi = Math.max(reHi, re);
      imLo = Math.min(imLo, im);
      imHi = Math.max(imHi, im);
    }
    const rePad = 0.05 * (reHi - reLo || 1);
    const imPad = 0.05 * (imHi - imLo || 1);
    const x = scaleLinear()
      .domain([reLo - rePad, reHi + rePad])
      .range([margin.left, width - margin.right]);
    const y = scaleLinear()
      .domain([imLo - imPad, imHi + imPad])
      .range([height - margin.bottom, margin.top]);

    const parts: string[] = [];
    parts.push(
      `<svg class="complex-canvas" viewBox="0 0 ${width} ${height}" ` +
        `width="${width}" height="${height}">`,
    );
    parts.push(
      `<text x="${width / 2}" y="${height - 6}" text-anchor="middle" font-size="11">Re E</text>`,
      `<text x="14" y="${height / 2}" text-anchor="middle" font-size="11" ` +
        `transform="rotate(-90 14 ${height / 2})">Im E</text>`,
    );

    const theta = this.state.thetaTrajectory;
    if (theta !== null) {
      parts.push(this.renderTrajectory(theta, "traj-theta", "#2c6fbb", x, y));
    }
    const alpha = this.state.alphaTrajectory;
    if (alpha !== null) {
      parts.push(this.renderTrajectory(alpha, "traj-alpha", "#b8651f", x, y));
    }

    for (const p of this.state.stationary) {
      parts.push(
        `<g class="stationary-marker" data-id="${p.id}" ` +
          `transform="translate(${x(p.energy[0]).toFixed(1)},${y(p.energy[1]).toFixed(1)})">` +
          `<circle r="6" fill="none" stroke="#1a7a3a" stroke-width="2"/>` +
          `<title>${p.id}: E = ${p.energy[0].toPrecision(10)} ${
            p.energy[1] < 0 ? "−" : "+"
          } ${Math.abs(p.energy[1]).toPrecision(4)}i at α=${p.eta_star.alpha.toFixed(
            4,
          )}, θ=${p.eta_star.theta.toFixed(4)}</title></g>`,
      );
    }

    if (this.state.overlay && this.state.crosscheck !== null) {
      const cc = this.state.crosscheck;
      parts.push(
        `<g class="overlay-rational" transform="translate(${x(cc.rational.energy[0]).toFixed(
          1,
        )},${y(cc.rational.energy[1]).toFixed(1)})">` +
          `<circle r="4" fill="#1a7a3a" fill-opacity="0.7"/><title>rational fit</title></g>`,
        `<g class="overlay-diagonalized" transform="translate(${x(
          cc.diagonalized.energy[0],
        ).toFixed(1)},${y(cc.diagonalized.energy[1]).toFixed(1)})">` +
          `<rect x="-4" y="-4" width="8" height="8" fill="none" stroke="#8e44ad" ` +
          `stroke-width="2"/><title>diagonalization</title></g>`,
        `<text class="overlay-difference" x="${width - margin.right}" y="${margin.top + 4}" ` +
          `text-anchor="end" font-size="11">|ΔE| = ${cc.difference.toExponential(2)}</text>`,
      );
    }

    const thetaCusp = theta === null ? null : tightestCusp(cuspCandidates(theta.energies));
    const alphaCusp = alpha === null ? null : tightestCusp(cuspCandidates(alpha.energies));
    if (
      theta !== null &&
      alpha !== null &&
      cuspsOverlap(theta.energies, thetaCusp, alpha.energies, alphaCusp)
    ) {
      parts.push(this.renderInset(theta, alpha, thetaCusp!, width, height));
    }

    parts.push("</svg>");
    return parts.join("\n");
  }

  private renderTrajectory(
    traj: TrajectoryDoc,
    cls: string,
    color: string,
    x: (v: number) => number,
    y: (v: number) => number,
  ): string {
    const parts: string[] = [`<g class="${cls}" data-fixed="${traj.fixed_value}">`];
    const d = traj.energies
      .map(([re, im], i) => `${i === 0 ? "M" : "L"}${x(re).toFixed(1)},${y(im).toFixed(1)}`)
      .join(" ");
    parts.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="1"/>`);
    const candidates = new Set(cuspCandidates(traj.energies).map((c) => c.index));
    traj.energies.forEach(([re, im], i) => {
      const err = traj.pade_errors[i] ?? 0;
      const gridValue = traj.grid[i] ?? 0;
      parts.push(
        `<circle class="traj-point${candidates.has(i) ? " cusp-candidate" : ""}" ` +
          `data-index="${i}" data-pade-error="${err.toExponential(3)}" ` +
          `cx="${x(re).toFixed(1)}" cy="${y(im).toFixed(1)}" r="${candidates.has(i) ? 4 : 2}" ` +
          `fill="${candidates.has(i) ? "#d4a017" : color}">` +
          `<title>${traj.kind === "theta_trajectory" ? "θ" : "α"}=${gridValue.toFixed(4)}: E=${re.toPrecision(8)}${
            im < 0 ? "−" : "+"
          }${Math.abs(im).toPrecision(3)}i, Padé err ${err.toExponential(2)}</title></circle>`,
      );
    });
    parts.push("</g>");
    return parts.join("\n");
  }

  /** Magnified corner panel zooming in on overlapping cusps. */
  private renderInset(
    theta: TrajectoryDoc,
    alpha: TrajectoryDoc,
    around: CuspCandidate,
    width: number,
    height: number,
  ): string {
    const center = theta.energies[around.index];
    if (!center) return "";
    const insetW = Math.round(width * 0.28);
    const insetH = Math.round(height * 0.28);
    const x0 = width - insetW - 20;
    const y0 = 20;
    let radius = 0;
    const near: { p: ComplexPair; cls: string }[] = [];
    for (const [src, cls] of [
      [theta, "traj-theta"],
      [alpha, "traj-alpha"],
    ] as const) {
      for (const p of src.energies) {
        const d = Math.hypot(p[0] - center[0], p[1] - center[1]);
        if (d > 0) radius = radius === 0 ? d : Math.min(radius, Math.max(d, radius));
        near.push({ p, cls });
      }
    }
    const dists = near
      .map(({ p }) => Math.hypot(p[0] - center[0], p[1] - center[1]))
      .sort((a, b) => a - b);
    const zoomR = dists[Math.min(12, dists.length - 1)] ?? 1;
    const xz = scaleLinear()
      .domain([center[0] - zoomR, center[0] + zoomR])
      .range([x0 + 6, x0 + insetW - 6]);
    const yz = scaleLinear()
      .domain([center[1] - zoomR, center[1] + zoomR])
      .range([y0 + insetH - 6, y0 + 6]);
    const parts: string[] = [
      `<g class="inset-zoom">`,
      `<rect x="${x0}" y="${y0}" width="${insetW}" height="${insetH}" ` +
        `fill="#fff" stroke="#888"/>`,
    ];
    for (const { p, cls } of near) {
      if (Math.hypot(p[0] - center[0], p[1] - center[1]) > zoomR) continue;
      parts.push(
        `<circle class="inset-point ${cls}" cx="${xz(p[0]).toFixed(1)}" ` +
          `cy="${yz(p[1]).toFixed(1)}" r="2.5" ` +
          `fill="${cls === "traj-theta" ? "#2c6fbb" : "#b8651f"}"/>`,
      );
    }
    parts.push("</g>");
    return parts.join("\n");
  }

  /** |C′| heatmap shown when the stationary search came back empty. */
  private renderHeatmap(doc: NotFoundDoc, width: number, height: number): string {
    const margin = { top: 14, right: 16, bottom: 30, left: 64 };
    const nA = doc.alphas.length;
    const nT = doc.thetas.length;
    const cellW = (width - margin.left - margin.right) / Math.max(nA, 1);
    const cellH = (height - margin.top - margin.bottom) / Math.max(nT, 1);
    let lo = Infinity;
    let hi = -Infinity;
    for (const row of doc.derivative_magnitude) {
      for (const v of row) {
        if (Number.isFinite(v) && v > 0) {
          lo = Math.min(lo, v);
          hi = Math.max(hi, v);
        }
      }
    }
    const logLo = Math.log10(lo > 0 && Number.isFinite(lo) ? lo : 1e-16);
    const logHi = Math.log10(hi > 0 && Number.isFinite(hi) ? hi : 1);
    const span = logHi - logLo || 1;
    const parts: string[] = [
      `<svg class="derivative-landscape" viewBox="0 0 ${width} ${height}" ` +
        `width="${width}" height="${height}">`,
      `<text x="${width / 2}" y="${height - 6}" text-anchor="middle" font-size="11">α</text>`,
      `<text x="14" y="${height / 2}" text-anchor="middle" font-size="11" ` +
        `transform="rotate(-90 14 ${height / 2})">θ</text>`,
      `<text class="landscape-caption" x="${margin.left}" y="${margin.top - 2}" ` +
        `font-size="11">no stationary point found — |C′| landscape (dark = small ` +
        `derivative, brush there next)</text>`,
    ];
    doc.derivative_magnitude.forEach((row, i) => {
      row.forEach((v, j) => {
        const t = Number.isFinite(v) && v > 0 ? (Math.log10(v) - logLo) / span : 1;
        const shade = Math.round(235 * Math.min(Math.max(t, 0), 1) + 20);
        parts.push(
          `<rect class="landscape-cell" data-alpha="${doc.alphas[i]}" ` +
            `data-theta="${doc.thetas[j]}" ` +
            `x="${(margin.left + i * cellW).toFixed(1)}" ` +
            `y="${(height - margin.bottom - (j + 1) * cellH).toFixed(1)}" ` +
            `width="${(cellW + 0.5).toFixed(1)}" height="${(cellH + 0.5).toFixed(1)}" ` +
            `fill="rgb(${shade},${shade},${shade})">` +
            `<title>α=${doc.alphas[i]?.toFixed(4)}, θ=${doc.thetas[j]?.toFixed(4)}: ` +
            `|C′|=${v.toExponential(2)}</title></rect>`,
        );
      });
    });
    parts.push("</svg>");
    return parts.join("\n");
  }
}
