/**
 * Browser bootstrap: wires the stabilization and trajectory views to the
 * DOM. All interaction is translated to point indices before touching any
 * controller, so selections are pixel-independent; every displayed number
 * comes back from the service.
 */

import { ServiceClient } from "./api/client.js";
import { GridSpec, StabilizeResult } from "./api/types.js";
import { JobGate, PanelBusyError } from "./core/jobGate.js";
import { nearestIndex } from "./core/selection.js";
import { StabilizationView, type WindowChip } from "./views/stabilizationView.js";
import { TrajectoryView } from "./views/trajectoryView.js";

interface AppElements {
  stabilization: HTMLElement;
  trajectory: HTMLElement;
  status: HTMLElement;
  form: HTMLFormElement;
}

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing #${id}`);
  return el as T;
}

function parseGridText(text: string): GridSpec {
  const [start, stop, count] = text.split(":").map(Number);
  return GridSpec.parse({ start, stop, count });
}

export async function main(): Promise<void> {
  const els: AppElements = {
    stabilization: requireElement("stabilization-panel"),
    trajectory: requireElement("trajectory-panel"),
    status: requireElement("status-line"),
    form: requireElement<HTMLFormElement>("session-form"),
  };
  const client = new ServiceClient(window.location.origin);
  const gate = new JobGate();
  let stabView: StabilizationView | null = null;
  let trajView: TrajectoryView | null = null;

  const setStatus = (text: string) => {
    els.status.textContent = text;
  };

  const redrawStabilization = () => {
    if (stabView !== null) els.stabilization.innerHTML = stabView.render();
  };
  const redrawTrajectory = () => {
    if (trajView !== null) els.trajectory.innerHTML = trajView.render();
  };

  els.form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(els.form);
    const model = String(data.get("model") ?? "benchmark");
    const basis = String(data.get("basis") ?? "ho:40");
    const grid = parseGridText(String(data.get("grid") ?? "1.0:1.3:31"));
    void (async () => {
      try {
        setStatus("stabilizing…");
        const created = await client.createSession({ metadata: { origin: "explorer" } });
        const ticket = await gate.run("session", () =>
          client.stabilize(created.id, { model, basis, grid }),
        );
        const result = StabilizeResult.parse(await client.pollJob(ticket));
        stabView = new StabilizationView(client, created.id);
        await stabView.load();
        stabView.absorb(result);
        redrawStabilization();
        attachBrushHandlers(created.id);
        setStatus(
          `session ${created.id}: ${result.windows.length} windows, ` +
            `${result.crossings.length} crossings`,
        );
      } catch (err) {
        setStatus(err instanceof Error ? err.message : String(err));
      }
    })();
  });

  function attachBrushHandlers(sessionId: string): void {
    let dragging = false;
    els.stabilization.addEventListener("pointerdown", (event) => {
      const view = stabView;
      if (view === null || view.state.data === null) return;
      const svg = els.stabilization.querySelector<SVGSVGElement>("svg.stabilization-plot");
      if (svg === null) return;
      const { alpha, root } = locate(event, svg, view.state.data.alpha_grid);
      view.beginBrush(root, nearestIndex(view.state.data.alpha_grid, alpha));
      dragging = true;
      redrawStabilization();
    });
    els.stabilization.addEventListener("pointermove", (event) => {
      const view = stabView;
      if (!dragging || view === null || view.state.data === null) return;
      const svg = els.stabilization.querySelector<SVGSVGElement>("svg.stabilization-plot");
      if (svg === null) return;
      const { alpha } = locate(event, svg, view.state.data.alpha_grid);
      view.dragBrush(nearestIndex(view.state.data.alpha_grid, alpha));
      redrawStabilization();
    });
    els.stabilization.addEventListener("pointerup", () => {
      if (!dragging || stabView === null) return;
      dragging = false;
      void (async () => {
        try {
          const chip = await stabView!.endBrush();
          redrawStabilization();
          if (chip !== null) await openTrajectory(sessionId, chip);
        } catch (err) {
          if (!(err instanceof PanelBusyError)) {
            setStatus(err instanceof Error ? err.message : String(err));
          }
        }
      })();
    });
    els.stabilization.addEventListener("change", (event) => {
      const target = event.target as HTMLElement;
      if (target.classList.contains("override-box") && stabView !== null) {
        stabView.toggleOverride();
        if (stabView.state.rejection !== null) {
          void stabView.overrideRejection().then((chip) => {
            redrawStabilization();
            if (chip !== null) void openTrajectory(sessionId, chip);
          });
        }
      }
    });
  }

  async function openTrajectory(sessionId: string, chip: WindowChip): Promise<void> {
    trajView = new TrajectoryView(client, sessionId, chip.fit);
    setStatus(`fetching trajectories for ${chip.fit.id}…`);
    await trajView.refresh();
    redrawTrajectory();
    attachTrajectoryHandlers();
    setStatus(`exploring ${chip.fit.id} (${chip.indices.length} points)`);
  }

  function attachTrajectoryHandlers(): void {
    els.trajectory.addEventListener("change", (event) => {
      const view = trajView;
      if (view === null) return;
      const target = event.target as HTMLInputElement;
      void (async () => {
        try {
          if (target.classList.contains("fixed-alpha-slider")) {
            await view.setFixedAlpha(Number(target.value));
          } else if (target.classList.contains("fixed-theta-slider")) {
            await view.setFixedTheta(Number(target.value));
          } else if (target.classList.contains("overlay-box")) {
            await view.toggleCrosscheck();
          } else {
            return;
          }
          redrawTrajectory();
        } catch (err) {
          if (!(err instanceof PanelBusyError)) {
            setStatus(err instanceof Error ? err.message : String(err));
          }
        }
      })();
    });
    els.trajectory.addEventListener("click", (event) => {
      const view = trajView;
      if (view === null) return;
      const target = event.target as HTMLElement;
      if (!target.classList.contains("converge-btn")) return;
      void (async () => {
        try {
          setStatus("searching for stationary point…");
          const response = await view.converge();
          redrawTrajectory();
          setStatus(
            response.stationary_points.length > 0
              ? `stationary: ${response.stationary_points
                  .map((p) => `${p.id} @ α=${p.eta_star.alpha.toFixed(4)}`)
                  .join(", ")}`
              : "no stationary point found — showing |C′| landscape",
          );
        } catch (err) {
          if (!(err instanceof PanelBusyError)) {
            setStatus(err instanceof Error ? err.message : String(err));
          }
        }
      })();
    });
  }

  /** Map a pointer event to data coordinates and the nearest root curve. */
  function locate(
    event: PointerEvent,
    svg: SVGSVGElement,
    alphaGrid: readonly number[],
  ): { alpha: number; root: number } {
    const rect = svg.getBoundingClientRect();
    const frac = (event.clientX - rect.left) / rect.width;
    const width = svg.viewBox.baseVal.width || rect.width;
    const px = frac * width;
    const margin = { left: 56, right: 16, top: 12, bottom: 28 };
    const t = Math.min(Math.max((px - margin.left) / (width - margin.left - margin.right), 0), 1);
    const alpha = alphaGrid[0]! + t * (alphaGrid[alphaGrid.length - 1]! - alphaGrid[0]!);
    const index = nearestIndex(alphaGrid, alpha);
    const data = stabView?.state.data;
    let root = 0;
    if (data) {
      const height = svg.viewBox.baseVal.height || rect.height;
      const fy = (event.clientY - rect.top) / rect.height;
      const pyData = fy * height;
      let eMin = Infinity;
      let eMax = -Infinity;
      for (const row of data.curves) {
        for (const v of row) {
          eMin = Math.min(eMin, v);
          eMax = Math.max(eMax, v);
        }
      }
      const pad = 0.05 * (eMax - eMin || 1);
      const yTo = (v: number) =>
        margin.top +
        ((eMax + pad - v) / (eMax + pad - (eMin - pad))) * (height - margin.top - margin.bottom);
      let bestDist = Infinity;
      data.curves.forEach((row, r) => {
        const v = row[index];
        if (v === undefined) return;
        const d = Math.abs(yTo(v) - pyData);
        if (d < bestDist) {
          bestDist = d;
          root = r;
        }
      });
    }
    return { alpha, root };
  }
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  void main();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", () => void main());
}
