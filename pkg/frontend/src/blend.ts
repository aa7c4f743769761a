// Mapping from the degree slider to the 9-way blend the service accepts.

export const N_DEGREES = 9;
export const SLIDER_MIN = 1;
export const SLIDER_MAX = 9;
export const SLIDER_STEP = 0.05;

// Convexity tolerance mirroring the server gate. Blends built here sum to
// exactly 1, so this only matters for hand-edited weights.
export const BLEND_TOL = 1e-6;

export interface ClampResult {
  value: number;
  clamped: boolean;
}

/**
 * Clamp to [1, 9] and snap to the 0.05 grid. Grid positions are computed in
 * integer ticks (1/20ths) so representable values like 1.25 and 8.5 come out
 * exact instead of accumulating float dust from repeated 0.05 additions.
 */
export function clampSlider(v: number): ClampResult {
  if (!Number.isFinite(v)) {
    return { value: SLIDER_MIN, clamped: true };
  }
  const ticks = Math.round((v - SLIDER_MIN) * 20);
  const maxTicks = (SLIDER_MAX - SLIDER_MIN) * 20;
  const bounded = Math.min(Math.max(ticks, 0), maxTicks);
  return { value: SLIDER_MIN + bounded / 20, clamped: bounded !== ticks };
}

/**
 * Adjacent-pair blend for a continuous degree v in [1, 9].
 *
 * Weight v - floor(v) goes to degree ceil(v) and the remainder to floor(v);
 * integer v gives a one-hot. The floor weight is computed as 1 - wHi so the
 * pair sums to exactly 1.0 for every representable v.
 */
export function sliderToBlend(v: number): number[] {
  if (!Number.isFinite(v) || v < SLIDER_MIN || v > SLIDER_MAX) {
    throw new RangeError(`slider value must be in [${SLIDER_MIN}, ${SLIDER_MAX}], got ${v}`);
  }
  const blend = new Array<number>(N_DEGREES).fill(0);
  const lo = Math.floor(v);
  if (lo === v) {
    blend[lo - 1] = 1;
    return blend;
  }
  const wHi = v - lo;
  blend[lo - 1] = 1 - wHi;
  blend[lo] = wHi;
  return blend;
}

/** Scale nonnegative weights to sum 1. Returns null when that is impossible. */
export function normalizeWeights(weights: readonly number[]): number[] | null {
  if (weights.length !== N_DEGREES) {
    return null;
  }
  let sum = 0;
  for (const w of weights) {
    if (!Number.isFinite(w) || w < 0) {
      return null;
    }
    sum += w;
  }
  if (sum <= 0) {
    return null;
  }
  return weights.map((w) => w / sum);
}

/** Client-side mirror of the server's convexity gate. */
export function isConvexBlend(weights: readonly number[], tol: number = BLEND_TOL): boolean {
  if (weights.length !== N_DEGREES) {
    return false;
  }
  let sum = 0;
  for (const w of weights) {
    if (!Number.isFinite(w) || w < -tol) {
      return false;
    }
    sum += w;
  }
  return Math.abs(sum - 1) <= tol;
}
