import { beforeEach, describe, expect, it } from "vitest";

import type { StationaryRequest, TrajectoryRequest } from "../src/api/types.js";
import { PanelBusyError } from "../src/core/jobGate.js";
import { TrajectoryView } from "../src/views/trajectoryView.js";
import {
  cuspTrajectory,
  FakeClient,
  fitDoc,
  notFoundDoc,
  stationaryDoc,
  trajectoryDoc,
} from "./fixtures.js";

describe("trajectory view", () => {
  let client: FakeClient;
  let view: TrajectoryView;

  beforeEach(() => {
    client = new FakeClient();
    view = new TrajectoryView(client, "sess-test", fitDoc());
  });

  it("requests paired theta and alpha trajectories", async () => {
    await view.refresh();
    const bodies = client.callsOf("trajectory").map((c) => c.body as TrajectoryRequest);
    expect(bodies).toHaveLength(2);
    expect(bodies[0]!.kind).toBe("theta");
    expect(bodies[0]!.fixed).toBeCloseTo(view.state.fixedAlpha);
    expect(bodies[1]!.kind).toBe("alpha");
    expect(bodies[1]!.fixed).toBeCloseTo(view.state.fixedTheta);
    expect(view.state.thetaTrajectory).not.toBeNull();
    expect(view.state.alphaTrajectory).not.toBeNull();
  });

  it("sliders re-request from the service instead of recomputing", async () => {
    await view.refresh();
    client.calls = [];
    await view.setFixedAlpha(1.25);
    await view.setFixedTheta(0.07);
    const bodies = client.callsOf("trajectory").map((c) => c.body as TrajectoryRequest);
    expect(bodies).toHaveLength(2);
    expect(bodies[0]).toMatchObject({ kind: "theta", fixed: 1.25 });
    expect(bodies[1]).toMatchObject({ kind: "alpha", fixed: 0.07 });
  });

  it("renders both trajectories on one complex plane with per-point errors", async () => {
    await view.refresh();
    const markup = view.render();
    expect(markup.match(/class="complex-canvas"/g)).toHaveLength(1);
    expect(markup).toContain('class="traj-theta"');
    expect(markup).toContain('class="traj-alpha"');
    expect(markup).toContain("data-pade-error=");
    expect(markup).toContain("Padé err");
  });

  it("highlights cusp candidates and zooms in when the two cusps overlap", async () => {
    client.trajectoryResponder = (body) => cuspTrajectory(body.kind);
    await view.refresh();
    expect(view.cusps("theta").length).toBeGreaterThan(0);
    const markup = view.render();
    expect(markup).toContain("cusp-candidate");
    expect(markup).toContain('class="inset-zoom"');
  });

  it("converge posts the stationary search and renders the marker", async () => {
    await view.refresh();
    const response = await view.converge();
    expect(response.stationary_points).toHaveLength(1);
    const body = client.callsOf("stationary")[0]!.body as StationaryRequest;
    expect(body.fit_id).toBe("f0");
    expect(body.region).toBeUndefined();
    const markup = view.render();
    expect(markup).toContain('class="stationary-marker"');
    expect(markup).toContain('data-id="s0"');
  });

  it("passes the current view region when one is set", async () => {
    view.setRegion({ alpha: [1.0, 1.3], theta: [0.05, 0.4] });
    await view.converge();
    const body = client.callsOf("stationary")[0]!.body as StationaryRequest;
    expect(body.region).toEqual({ alpha: [1.0, 1.3], theta: [0.05, 0.4] });
  });

  it("allows only one in-flight converge per panel", async () => {
    client.delayMs = 30;
    const first = view.converge();
    await expect(view.converge()).rejects.toThrow(PanelBusyError);
    await first;
    await expect(view.converge()).resolves.toBeTruthy();
  });

  it("renders the derivative-magnitude heatmap when nothing is found", async () => {
    client.stationaryResponder = () => ({
      stationary_points: [],
      not_found: notFoundDoc(),
    });
    await view.refresh();
    await view.converge();
    expect(view.state.notFound).not.toBeNull();
    const markup = view.render();
    expect(markup).toContain('class="derivative-landscape"');
    expect(markup.match(/class="landscape-cell"/g)).toHaveLength(20);
    expect(markup).toContain("no stationary point found");
  });

  it("toggles the diagonalization cross-check overlay", async () => {
    await view.refresh();
    await view.converge();
    const doc = await view.toggleCrosscheck();
    expect(doc).not.toBeNull();
    expect(view.state.overlay).toBe(true);
    const markup = view.render();
    expect(markup).toContain('class="overlay-rational"');
    expect(markup).toContain('class="overlay-diagonalized"');
    expect(markup).toContain("|ΔE|");
    await view.toggleCrosscheck();
    expect(view.state.overlay).toBe(false);
    expect(view.render()).not.toContain('class="overlay-diagonalized"');
  });

  it("refuses to cross-check before a converge", async () => {
    await expect(view.toggleCrosscheck()).rejects.toThrow(/converge first/);
  });

  it("keeps the constant-fraction demo free of cusp candidates", async () => {
    client.trajectoryResponder = (body) =>
      trajectoryDoc({
        kind: `${body.kind}_trajectory`,
        energies: Array.from({ length: 21 }, () => [0.75, 0]),
      });
    await view.refresh();
    expect(view.cusps("theta")).toHaveLength(0);
    expect(view.cusps("alpha")).toHaveLength(0);
    expect(view.render()).not.toContain("cusp-candidate");
  });

  it("shows stationary markers from fetched numbers only", async () => {
    client.stationaryResponder = () => ({
      stationary_points: [stationaryDoc({ id: "s7", energy: [1.99, -0.25] })],
      not_found: null,
    });
    await view.refresh();
    await view.converge();
    const markup = view.render();
    expect(markup).toContain('data-id="s7"');
    expect(markup).toContain("1.990000000");
  });
});
