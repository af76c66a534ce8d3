/**
 * Shared test fixtures: representative service documents and a fake client.
 *
 * The synthetic sweep mirrors the service's inline-data path: two eigenvalue
 * curves with an avoided crossing at the grid center (tight gap), plus a
 * flat plateau away from it, so window detection yields brushable windows
 * and the crossing guard has something to reject.
 */

import { ApiError, type ExplorerApi, type PollOptions } from "../src/api/client.js";
import type {
  CrosscheckDoc,
  CrosscheckRequest,
  CrossingDoc,
  ErrorEnvelope,
  FitDoc,
  FitRequest,
  SessionDoc,
  StabilizationDoc,
  StationaryDoc,
  StationaryRequest,
  StationaryResponse,
  TrajectoryDoc,
  TrajectoryRequest,
  WindowDoc,
} from "../src/api/types.js";

export function linspace(start: number, stop: number, count: number): number[] {
  const out: number[] = [];
  for (let i = 0; i < count; i += 1) {
    out.push(start + ((stop - start) * i) / (count - 1));
  }
  return out;
}

/** Two curves with an avoided crossing at the middle of a 31-point grid. */
export function crossingSweep(): StabilizationDoc {
  const alphas = linspace(0.8, 1.4, 31);
  const lower: number[] = [];
  const upper: number[] = [];
  for (const a of alphas) {
    const flat = 1.42;
    const steep = 1.42 + 2.5 * (a - 1.1);
    const mean = (flat + steep) / 2;
    const half = Math.hypot((steep - flat) / 2, 0.004);
    lower.push(mean - half);
    upper.push(mean + half);
  }
  return {
    alpha_grid: alphas,
    curves: [lower, upper],
    tracking_quality: new Array(30).fill(1),
    source: "imported",
    metadata: [],
  };
}

export const crossing: CrossingDoc = {
  root_pair: [0, 1],
  alpha_at_min_gap: 1.1,
  min_gap: 0.008,
  grid_index: 15,
  participants: [0, 1],
};

export const windows: WindowDoc[] = [
  {
    id: "w0",
    root_index: 0,
    alpha_range: [1.16, 1.4],
    point_indices: linspace(18, 30, 13).map((v) => Math.round(v)),
    flatness: 2.1e-4,
  },
  {
    id: "w1",
    root_index: 1,
    alpha_range: [0.8, 1.04],
    point_indices: linspace(0, 12, 13).map((v) => Math.round(v)),
    flatness: 3.4e-4,
  },
];

export function fitDoc(overrides: Partial<FitDoc> = {}): FitDoc {
  return {
    id: "f0",
    window_id: "w0",
    point_indices: windows[0]!.point_indices,
    order: 12,
    forced: false,
    fraction: {
      abscissae: windows[0]!.point_indices.map((i) => crossingSweep().alpha_grid[i]!),
      values: windows[0]!.point_indices.map(() => 1.42),
      coefficients: [
        [1.42, 0],
        [0.01, 0],
      ],
    },
    diagnostics: {
      interpolation_max: 1e-14,
      off_sample_max: 1e-9,
      leave_one_out_max: 1e-8,
      coefficient_max: 3.2,
      density_warning: false,
      warnings: [],
    },
    ...overrides,
  };
}

export function trajectoryDoc(overrides: Partial<TrajectoryDoc> = {}): TrajectoryDoc {
  const grid = linspace(0, 0.5, 21);
  return {
    id: "t0",
    fit_id: "f0",
    kind: "theta_trajectory",
    fixed_value: 1.1,
    grid,
    energies: grid.map((t) => [1.42 - 0.01 * t * t, -0.05 * t]),
    pade_errors: grid.map(() => 1e-9),
    pole_at: [],
    ...overrides,
  };
}

/**
 * Trajectory that stalls at its middle point (index 10): consecutive steps
 * shrink linearly into the stall and grow back out, so the spacing sequence
 * has one strict interior minimum. Both kinds stall on the same energy so
 * the θ/α cusps overlap.
 */
export function cuspTrajectory(kind: "theta" | "alpha"): TrajectoryDoc {
  const n = 21;
  const grid = linspace(0, 0.4, n);
  const positions: number[] = [0];
  for (let i = 0; i + 1 < n; i += 1) {
    positions.push(positions[positions.length - 1]! + 0.0005 + (0.012 * Math.abs(i - 10)) / 10);
  }
  const shift = positions[10]!;
  const angle = kind === "theta" ? 0.3 : 2.2;
  const energies: [number, number][] = positions.map((p) => [
    1.42 + (p - shift) * Math.cos(angle),
    -0.03 + (p - shift) * Math.sin(angle),
  ]);
  return trajectoryDoc({
    kind: `${kind}_trajectory`,
    grid,
    energies,
    id: kind === "theta" ? "t0" : "t1",
  });
}

export function stationaryDoc(overrides: Partial<StationaryDoc> = {}): StationaryDoc {
  return {
    id: "s0",
    fit_id: "f0",
    eta_star: { alpha: 1.13, theta: 0.22 },
    energy: [1.4209, -5.8e-5],
    width: 1.16e-4,
    derivative_norm: 3e-9,
    pade_error: 2e-10,
    window_id: "w0",
    theta_cross_section: null,
    alpha_cross_section: null,
    ...overrides,
  };
}

export function notFoundDoc() {
  return {
    alphas: linspace(0.9, 1.3, 5),
    thetas: linspace(0, 0.4, 4),
    derivative_magnitude: linspace(0.9, 1.3, 5).map((_, i) =>
      linspace(0, 0.4, 4).map((_, j) => 10 ** (-1 - 0.3 * i - 0.2 * j)),
    ),
  };
}

export function crosscheckDoc(): CrosscheckDoc {
  const p = stationaryDoc();
  return {
    stationary_id: "s0",
    rational: {
      eta_star: p.eta_star,
      energy: p.energy,
      width: p.width,
      derivative_norm: p.derivative_norm,
      pade_error: p.pade_error,
      window_id: p.window_id,
      theta_cross_section: null,
      alpha_cross_section: null,
    },
    diagonalized: {
      eta_star: { alpha: 1.131, theta: 0.219 },
      energy: [1.42091, -5.9e-5],
      derivative_theta: 1e-9,
      derivative_alpha: 2e-9,
      rounds: 4,
      evaluations: 180,
    },
    difference: 1.2e-5,
  };
}

export function sessionDoc(): SessionDoc {
  return {
    schema_version: 1,
    id: "sess-test",
    created_at: "2026-01-01T00:00:00Z",
    source: "imported",
    units: "hartree",
    metadata: {},
    stabilization: crossingSweep(),
    windows,
    crossings: [crossing],
    fits: [],
    trajectories: [],
    stationary_points: [],
    branch_points: [],
  };
}

export function crossingGuardError(): ApiError {
  const envelope: ErrorEnvelope = {
    error: "crossing_guard",
    message: "selection overlaps the guard band of a crossing at α=1.1000",
    crossing,
    hint: "re-submit with force=true to fit across the crossing",
  };
  return new ApiError(422, envelope);
}

export interface RecordedCall {
  method: string;
  sessionId: string;
  body: unknown;
}

/** Scriptable ExplorerApi stub that records every request. */
export class FakeClient implements ExplorerApi {
  calls: RecordedCall[] = [];
  session: SessionDoc = sessionDoc();
  fitResponder: (body: FitRequest) => FitDoc | ApiError = () => fitDoc();
  trajectoryResponder: (body: TrajectoryRequest) => TrajectoryDoc = (body) =>
    trajectoryDoc({ kind: `${body.kind}_trajectory`, fixed_value: body.fixed });
  stationaryResponder: (body: StationaryRequest) => StationaryResponse = () => ({
    stationary_points: [stationaryDoc()],
    not_found: null,
  });
  crosscheckResponder: (body: CrosscheckRequest) => CrosscheckDoc = () => crosscheckDoc();
  delayMs = 0;

  private async respond<T>(value: T | ApiError): Promise<T> {
    if (this.delayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.delayMs));
    }
    if (value instanceof ApiError) throw value;
    return value;
  }

  async getSession(sessionId: string): Promise<SessionDoc> {
    this.calls.push({ method: "getSession", sessionId, body: null });
    return this.respond(this.session);
  }

  async fit(sessionId: string, body: FitRequest): Promise<FitDoc> {
    this.calls.push({ method: "fit", sessionId, body });
    return this.respond(this.fitResponder(body));
  }

  async trajectory(sessionId: string, body: TrajectoryRequest): Promise<TrajectoryDoc> {
    this.calls.push({ method: "trajectory", sessionId, body });
    return this.respond(this.trajectoryResponder(body));
  }

  async stationary(sessionId: string, body: StationaryRequest): Promise<StationaryResponse> {
    this.calls.push({ method: "stationary", sessionId, body });
    return this.respond(this.stationaryResponder(body));
  }

  async crosscheckResult(
    sessionId: string,
    body: CrosscheckRequest,
    _options?: PollOptions,
  ): Promise<CrosscheckDoc> {
    this.calls.push({ method: "crosscheck", sessionId, body });
    return this.respond(this.crosscheckResponder(body));
  }

  callsOf(method: string): RecordedCall[] {
    return this.calls.filter((c) => c.method === method);
  }
}
