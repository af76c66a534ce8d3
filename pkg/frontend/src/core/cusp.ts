/**
 * Cusp-candidate highlighting for trajectory panels.
 *
 * A stationary point shows up in a trajectory as a cusp: consecutive points
 * bunch together where the energy stalls. Candidates are the strict local
 * minima of the consecutive-point spacing along the fetched trajectory.
 * This is purely a presentation of the service-provided points — no energies
 * are computed here, only distances between plotted markers.
 */

import type { ComplexPair } from "../api/types.js";

export interface CuspCandidate {
  /** Index of the first point of the tightest segment. */
  index: number;
  /** The segment's |ΔE| spacing. */
  spacing: number;
}

/**
 * Strict local minima of consecutive-point spacing, excluding noise:
 * a candidate's spacing must undercut the median spacing by at least the
 * contrast factor, so flat trajectories (all spacings equal, e.g. a
 * constant-fraction demo) produce no candidates.
 */
export function cuspCandidates(
  energies: readonly ComplexPair[],
  contrast = 0.5,
): CuspCandidate[] {
  if (energies.length < 4) return [];
  const spacing: number[] = [];
  for (let i = 0; i + 1 < energies.length; i += 1) {
    const [re0, im0] = energies[i]!;
    const [re1, im1] = energies[i + 1]!;
    spacing.push(Math.hypot(re1 - re0, im1 - im0));
  }
  const sorted = [...spacing].sort((a, b) => a - b);
  const median = sorted[Math.floor(sorted.length / 2)]!;
  if (median === 0) return [];
  const out: CuspCandidate[] = [];
  for (let i = 1; i + 1 < spacing.length; i += 1) {
    const d = spacing[i]!;
    if (d < spacing[i - 1]! && d < spacing[i + 1]! && d <= contrast * median) {
      out.push({ index: i, spacing: d });
    }
  }
  return out;
}

/**
 * Tightest candidate of a trajectory, if any — the place the explorer zooms
 * its inset on.
 */
export function tightestCusp(candidates: readonly CuspCandidate[]): CuspCandidate | null {
  let best: CuspCandidate | null = null;
  for (const c of candidates) {
    if (best === null || c.spacing < best.spacing) best = c;
  }
  return best;
}

/**
 * Whether cusps from the two trajectories land on (nearly) the same energy,
 * in which case the panels render a shared inset zoom around them. The
 * threshold is relative to the overall energy span of the two trajectories,
 * i.e. a fraction of the plot size — a pure view-space notion.
 */
export function cuspsOverlap(
  thetaEnergies: readonly ComplexPair[],
  thetaCusp: CuspCandidate | null,
  alphaEnergies: readonly ComplexPair[],
  alphaCusp: CuspCandidate | null,
  fraction = 0.05,
): boolean {
  if (thetaCusp === null || alphaCusp === null) return false;
  const a = thetaEnergies[thetaCusp.index];
  const b = alphaEnergies[alphaCusp.index];
  if (!a || !b) return false;
  let lo = Infinity;
  let hi = -Infinity;
  for (const [re] of [...thetaEnergies, ...alphaEnergies]) {
    lo = Math.min(lo, re);
    hi = Math.max(hi, re);
  }
  const span = hi - lo || 1;
  return Math.hypot(a[0] - b[0], a[1] - b[1]) <= fraction * span;
}
