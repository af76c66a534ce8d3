/**
 * Per-panel concurrency gate: at most one in-flight service call per panel.
 *
 * The explorer shows results only on completion (no optimistic UI), so a
 * second request from the same panel while one is pending is a user error
 * surfaced as PanelBusyError rather than queued or raced.
 */

export class PanelBusyError extends Error {
  readonly panel: string;

  constructor(panel: string) {
    super(`panel '${panel}' already has a request in flight`);
    this.name = "PanelBusyError";
    this.panel = panel;
  }
}

export class JobGate {
  private readonly inflight = new Set<string>();

  busy(panel: string): boolean {
    return this.inflight.has(panel);
  }

  async run<T>(panel: string, task: () => Promise<T>): Promise<T> {
    if (this.inflight.has(panel)) {
      throw new PanelBusyError(panel);
    }
    this.inflight.add(panel);
    try {
      return await task();
    } finally {
      this.inflight.delete(panel);
    }
  }
}
