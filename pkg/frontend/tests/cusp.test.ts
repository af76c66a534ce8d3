import { describe, expect, it } from "vitest";

import { cuspCandidates, cuspsOverlap, tightestCusp } from "../src/core/cusp.js";
import type { ComplexPair } from "../src/api/types.js";
import { cuspTrajectory, trajectoryDoc } from "./fixtures.js";

describe("cusp candidate highlighting", () => {
  it("finds the stall in a trajectory that bunches at its midpoint", () => {
    const traj = cuspTrajectory("theta");
    const candidates = cuspCandidates(traj.energies);
    expect(candidates.length).toBeGreaterThan(0);
    const best = tightestCusp(candidates)!;
    expect(best.index).toBe(10);
    expect(best.spacing).toBeLessThan(0.001);
  });

  it("returns nothing for a constant trajectory", () => {
    const flat: ComplexPair[] = Array.from({ length: 15 }, () => [1.42, -0.001]);
    expect(cuspCandidates(flat)).toHaveLength(0);
  });

  it("returns nothing for uniform spacing (no contrast)", () => {
    const uniform: ComplexPair[] = Array.from({ length: 20 }, (_, i) => [i * 0.01, 0]);
    expect(cuspCandidates(uniform)).toHaveLength(0);
  });

  it("ignores too-short trajectories", () => {
    expect(cuspCandidates([[0, 0], [1, 0], [1.001, 0]])).toHaveLength(0);
  });

  it("reports overlap only when both cusps land on nearby energies", () => {
    const a = cuspTrajectory("theta");
    const b = cuspTrajectory("alpha");
    const ca = tightestCusp(cuspCandidates(a.energies));
    const cb = tightestCusp(cuspCandidates(b.energies));
    expect(cuspsOverlap(a.energies, ca, b.energies, cb)).toBe(true);

    const far = trajectoryDoc({
      energies: a.energies.map(([re, im]) => [re + 10, im]),
    });
    expect(cuspsOverlap(a.energies, ca, far.energies, cb)).toBe(false);
    expect(cuspsOverlap(a.energies, null, b.energies, cb)).toBe(false);
  });
});
