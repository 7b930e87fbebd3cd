/**
 * Number formatting for display.  Values always arrive from service
 * payloads; these helpers only decide how many digits to show.
 */

/** Fixed number of significant digits, without exponent notation when avoidable. */
export function sig(value: number | null | undefined, digits = 6): string {
  if (value === null || value === undefined || !isFinite(value)) {
    return "—";
  }
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.floor(Math.log10(Math.abs(value)));
  if (magnitude < -4 || magnitude >= digits + 3) {
    return value.toExponential(digits - 1);
  }
  const rounded = Number(value.toPrecision(digits));
  return String(rounded);
}

/** Short label for an axis tick. */
export function tickLabel(value: number): string {
  return sig(value, 3);
}

/** Comma-joined coefficient list at display precision. */
export function coeffList(values: number[], digits = 6): string {
  return values.map((v) => sig(v, digits)).join(", ");
}

/** Parse a comma-separated number list typed by the user. */
export function parseNumberList(text: string): number[] | null {
  const parts = text.split(",").map((p) => p.trim()).filter((p) => p.length > 0);
  if (parts.length === 0) {
    return null;
  }
  const out: number[] = [];
  for (const part of parts) {
    const v = Number(part);
    if (!isFinite(v)) {
      return null;
    }
    out.push(v);
  }
  return out;
}
