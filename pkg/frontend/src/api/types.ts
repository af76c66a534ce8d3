/**
 * Wire-format schemas for the stabres HTTP service.
 *
 * Every document the explorer renders is parsed through these schemas on
 * arrival, so a malformed or drifted payload fails loudly at the boundary
 * instead of producing a silently wrong plot. The explorer itself computes
 * no physics: these types are the complete set of numbers it may display.
 */

import { z } from "zod";

/** [re, im] pair used for complex numbers on the wire. */
export const ComplexPair = z.tuple([z.number(), z.number()]);
export type ComplexPair = z.infer<typeof ComplexPair>;

export const GridSpec = z.object({
  start: z.number(),
  stop: z.number(),
  count: z.number().int().min(2),
});
export type GridSpec = z.infer<typeof GridSpec>;

export const SessionCreated = z.object({
  id: z.string(),
  source: z.string(),
  units: z.string(),
});
export type SessionCreated = z.infer<typeof SessionCreated>;

export const JobAccepted = z.object({
  job_id: z.string(),
  status: z.string(),
});
export type JobAccepted = z.infer<typeof JobAccepted>;

export const JobStatus = z.object({
  job_id: z.string(),
  session_id: z.string(),
  step: z.string(),
  status: z.enum(["pending", "running", "done", "error"]),
  result: z.unknown().optional(),
  error: z.string().optional(),
  error_type: z.string().optional(),
});
export type JobStatus = z.infer<typeof JobStatus>;

export const WindowDoc = z.object({
  id: z.string(),
  root_index: z.number().int(),
  alpha_range: z.tuple([z.number(), z.number()]),
  point_indices: z.array(z.number().int()),
  flatness: z.number(),
});
export type WindowDoc = z.infer<typeof WindowDoc>;

export const CrossingDoc = z.object({
  root_pair: z.tuple([z.number().int(), z.number().int()]),
  alpha_at_min_gap: z.number(),
  min_gap: z.number(),
  grid_index: z.number().int(),
  participants: z.tuple([z.number().int(), z.number().int()]),
});
export type CrossingDoc = z.infer<typeof CrossingDoc>;

export const StabilizationDoc = z.object({
  alpha_grid: z.array(z.number()),
  curves: z.array(z.array(z.number())),
  tracking_quality: z.array(z.number()),
  source: z.string(),
  metadata: z.array(z.string()),
});
export type StabilizationDoc = z.infer<typeof StabilizationDoc>;

export const StabilizeResult = z.object({
  session: z.string(),
  n_roots: z.number().int(),
  n_alpha: z.number().int(),
  windows: z.array(WindowDoc),
  crossings: z.array(CrossingDoc),
});
export type StabilizeResult = z.infer<typeof StabilizeResult>;

export const DiagnosticsDoc = z.object({
  interpolation_max: z.number(),
  off_sample_max: z.number(),
  leave_one_out_max: z.number(),
  coefficient_max: z.number(),
  density_warning: z.boolean(),
  warnings: z.array(z.string()),
});
export type DiagnosticsDoc = z.infer<typeof DiagnosticsDoc>;

export const FractionDoc = z.object({
  abscissae: z.array(z.number()),
  values: z.array(z.number()),
  coefficients: z.array(ComplexPair),
});
export type FractionDoc = z.infer<typeof FractionDoc>;

export const FitDoc = z.object({
  id: z.string(),
  window_id: z.string().nullable(),
  point_indices: z.array(z.number().int()),
  order: z.number().int(),
  forced: z.boolean(),
  fraction: FractionDoc,
  diagnostics: DiagnosticsDoc.nullable(),
});
export type FitDoc = z.infer<typeof FitDoc>;

/** Trajectory payload as embedded in stationary cross-sections (no ids). */
export const TrajectoryBase = z.object({
  kind: z.enum(["theta_trajectory", "alpha_trajectory"]),
  fixed_value: z.number(),
  grid: z.array(z.number()),
  energies: z.array(ComplexPair),
  pade_errors: z.array(z.number()),
  pole_at: z.array(z.number()),
});
export type TrajectoryBase = z.infer<typeof TrajectoryBase>;

export const TrajectoryDoc = TrajectoryBase.extend({
  id: z.string(),
  fit_id: z.string().nullable(),
});
export type TrajectoryDoc = z.infer<typeof TrajectoryDoc>;

export const EtaStar = z.object({ alpha: z.number(), theta: z.number() });
export type EtaStar = z.infer<typeof EtaStar>;

/** Stationary payload without record ids (used inside crosscheck docs). */
export const StationaryBase = z.object({
  eta_star: EtaStar,
  energy: ComplexPair,
  width: z.number(),
  derivative_norm: z.number(),
  pade_error: z.number(),
  window_id: z.string().nullable(),
  theta_cross_section: TrajectoryBase.nullable(),
  alpha_cross_section: TrajectoryBase.nullable(),
});
export type StationaryBase = z.infer<typeof StationaryBase>;

export const StationaryDoc = StationaryBase.extend({
  id: z.string(),
  fit_id: z.string().nullable(),
});
export type StationaryDoc = z.infer<typeof StationaryDoc>;

/** |C'| landscape returned when the stationary search finds nothing. */
export const NotFoundDoc = z.object({
  alphas: z.array(z.number()),
  thetas: z.array(z.number()),
  derivative_magnitude: z.array(z.array(z.number())),
});
export type NotFoundDoc = z.infer<typeof NotFoundDoc>;

export const StationaryResponse = z.object({
  stationary_points: z.array(StationaryDoc),
  not_found: NotFoundDoc.nullable(),
});
export type StationaryResponse = z.infer<typeof StationaryResponse>;

export const UcsPointDoc = z.object({
  eta_star: EtaStar,
  energy: ComplexPair,
  derivative_theta: z.number(),
  derivative_alpha: z.number(),
  rounds: z.number().int(),
  evaluations: z.number().int(),
});
export type UcsPointDoc = z.infer<typeof UcsPointDoc>;

export const CrosscheckDoc = z.object({
  stationary_id: z.string(),
  rational: StationaryBase,
  diagonalized: UcsPointDoc,
  difference: z.number(),
});
export type CrosscheckDoc = z.infer<typeof CrosscheckDoc>;

export const LandscapeDoc = z.object({
  alphas: z.array(z.number()),
  thetas: z.array(z.number()),
  min_d_theta: z.object({ alpha: z.number(), theta: z.number(), value: z.number() }),
  min_d_alpha: z.object({ alpha: z.number(), theta: z.number(), value: z.number() }),
  d_theta: z.array(z.array(z.number())).optional(),
  d_alpha: z.array(z.array(z.number())).optional(),
});
export type LandscapeDoc = z.infer<typeof LandscapeDoc>;

export const WindowsResult = z.object({
  windows: z.array(WindowDoc),
  crossings: z.array(CrossingDoc),
});
export type WindowsResult = z.infer<typeof WindowsResult>;

export const SessionDoc = z.object({
  schema_version: z.number().int(),
  id: z.string(),
  created_at: z.string().nullable(),
  source: z.string(),
  units: z.string(),
  metadata: z.record(z.string()),
  stabilization: StabilizationDoc.nullable(),
  windows: z.array(WindowDoc),
  crossings: z.array(CrossingDoc),
  fits: z.array(FitDoc),
  trajectories: z.array(TrajectoryDoc),
  stationary_points: z.array(StationaryDoc),
  branch_points: z.array(
    z.object({
      id: z.string(),
      fit_id: z.string().nullable(),
      eta_bp: ComplexPair,
      energy_bp: ComplexPair,
      coefficient_b: ComplexPair,
      residual: z.number(),
      poor_fit: z.boolean(),
    }),
  ),
});
export type SessionDoc = z.infer<typeof SessionDoc>;

/** Error envelope shared by all non-2xx service responses. */
export const ErrorEnvelope = z.object({
  error: z.string(),
  message: z.string(),
  fields: z.array(z.object({ field: z.string(), message: z.string() })).optional(),
  crossing: CrossingDoc.nullable().optional(),
  hint: z.string().optional(),
  job_id: z.string().optional(),
});
export type ErrorEnvelope = z.infer<typeof ErrorEnvelope>;

// ------------------------------------------------------------ request bodies

export interface StabilizeRequest {
  model?: string;
  basis?: string;
  grid?: GridSpec;
  data?: { alpha_grid: number[]; curves: number[][]; metadata?: string[] };
  threads?: number;
}

export interface FitRequest {
  window_id: string;
  point_indices?: number[];
  point_range?: [number, number];
  order?: number;
  force?: boolean;
}

export interface TrajectoryRequest {
  fit_id: string;
  kind: "theta" | "alpha";
  fixed: number;
  grid: GridSpec;
}

export interface RegionSpec {
  alpha: [number, number];
  theta: [number, number];
}

export interface StationaryRequest {
  fit_id: string;
  region?: RegionSpec;
  strategy?: "newton" | "alternating";
}

export interface CrosscheckRequest {
  stationary_id: string;
  model?: string;
  basis?: string;
}

export interface LandscapeQuery {
  seed_re: number;
  seed_im?: number;
  alpha?: string;
  theta?: string;
  model?: string;
  basis?: string;
}
