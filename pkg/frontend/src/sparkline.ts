/** Bounded numeric series for the metric sparklines. */
export class Series {
  private values: number[] = [];

  constructor(public readonly cap = 600) {}

  push(v: number): void {
    this.values.push(v);
    if (this.values.length > this.cap) this.values.shift();
  }

  get length(): number {
    return this.values.length;
  }

  last(): number | null {
    return this.values.length ? this.values[this.values.length - 1] : null;
  }

  toArray(): number[] {
    return this.values.slice();
  }
}

/**
 * SVG path for a series scaled into a w x h box, y flipped so larger values
 * sit higher. NaN samples break the line instead of plotting.
 */
export function sparklinePath(
  values: number[],
  w: number,
  h: number,
  lo = 0,
  hi = 1,
): string {
  if (values.length < 2 || !(hi > lo)) return "";
  const dx = w / (values.length - 1);
  let path = "";
  let pen = false;
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (Number.isNaN(v)) {
      pen = false;
      continue;
    }
    const clamped = Math.min(hi, Math.max(lo, v));
    const y = h * (1 - (clamped - lo) / (hi - lo));
    path += `${pen ? "L" : "M"}${(i * dx).toFixed(1)} ${y.toFixed(1)} `;
    pen = true;
  }
  return path.trimEnd();
}
