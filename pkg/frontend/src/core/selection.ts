/**
 * Index-based brush selection over a stabilization sweep.
 *
 * Selections are stored as grid point indices, never pixel coordinates, so
 * they survive re-renders, zooming, and window resizes, and the index set
 * sent to the service is exactly the set the user sees highlighted.
 */

/** An inclusive index range on one root's curve. */
export interface IndexBrush {
  rootIndex: number;
  startIndex: number;
  endIndex: number;
}

/** Normalize so startIndex <= endIndex regardless of drag direction. */
export function normalizeBrush(brush: IndexBrush): IndexBrush {
  if (brush.startIndex <= brush.endIndex) return brush;
  return { rootIndex: brush.rootIndex, startIndex: brush.endIndex, endIndex: brush.startIndex };
}

/** The exact index set a brush denotes (inclusive, ascending). */
export function brushIndices(brush: IndexBrush): number[] {
  const { startIndex, endIndex } = normalizeBrush(brush);
  const out: number[] = [];
  for (let i = startIndex; i <= endIndex; i += 1) out.push(i);
  return out;
}

/**
 * Map an alpha value (e.g. from a pixel scale's invert) to the nearest grid
 * index. The grid comes from the service and is ascending.
 */
export function nearestIndex(alphaGrid: readonly number[], alpha: number): number {
  if (alphaGrid.length === 0) throw new Error("empty alpha grid");
  let lo = 0;
  let hi = alphaGrid.length - 1;
  const first = alphaGrid[0]!;
  const last = alphaGrid[hi]!;
  if (alpha <= first) return 0;
  if (alpha >= last) return hi;
  while (hi - lo > 1) {
    const mid = (lo + hi) >> 1;
    if (alphaGrid[mid]! <= alpha) lo = mid;
    else hi = mid;
  }
  return alpha - alphaGrid[lo]! <= alphaGrid[hi]! - alpha ? lo : hi;
}

/** Build a brush from two alpha positions (drag start and end). */
export function brushFromAlphas(
  alphaGrid: readonly number[],
  rootIndex: number,
  alpha0: number,
  alpha1: number,
): IndexBrush {
  return normalizeBrush({
    rootIndex,
    startIndex: nearestIndex(alphaGrid, alpha0),
    endIndex: nearestIndex(alphaGrid, alpha1),
  });
}

/** True when the brush covers the given grid index. */
export function brushCovers(brush: IndexBrush, gridIndex: number): boolean {
  const b = normalizeBrush(brush);
  return gridIndex >= b.startIndex && gridIndex <= b.endIndex;
}

/**
 * Verify a round trip: the indices echoed by the service must be exactly
 * the brushed set, element for element, or the render would silently show
 * a different selection than was fitted.
 */
export function sameIndexSet(a: readonly number[], b: readonly number[]): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i += 1) {
    if (a[i] !== b[i]) return false;
  }
  return true;
}
