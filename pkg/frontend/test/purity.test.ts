/**
 * Static guarantees about the UI source: every displayed number comes from
 * a service payload.  The source must contain no numerical-solver code and
 * no external runtime imports that could smuggle one in.
 */

import { readdirSync, readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

const SRC_DIR = fileURLToPath(new URL("../src", import.meta.url));

const sources = readdirSync(SRC_DIR)
  .filter((name) => name.endsWith(".ts"))
  .map((name) => ({ name, text: readFileSync(join(SRC_DIR, name), "utf8") }));

/** Tell-tale vocabulary of linear solvers and root finders. */
const FORBIDDEN = [
  /gauss/i,
  /choles/i,
  /\blu\b/i,
  /pivot/i,
  /elimina/i,
  /back[\s_-]?substitut/i,
  /lstsq/i,
  /least[\s_-]?squares/i,
  /linsolve/i,
  /\bsolve\s*\(/i,
  /newton/i,
  /bisect/i,
  /secant/i,
  /brent/i,
  /vandermonde/i,
  /polyfit/i,
  /determinant/i,
  /matmul/i,
  /\binverse\b/i,
];

describe("the UI never computes results itself", () => {
  it("has sources to scan", () => {
    expect(sources.length).toBeGreaterThan(5);
  });

  for (const pattern of FORBIDDEN) {
    it(`contains no ${String(pattern)}`, () => {
      for (const { name, text } of sources) {
        const match = text.match(pattern);
        expect(
          match,
          `${name} matches ${String(pattern)}: "${match?.[0] ?? ""}"`,
        ).toBeNull();
      }
    });
  }

  it("imports only sibling modules — no external runtime dependency", () => {
    const importRe = /(?:^|\n)\s*import\s[^;]*?from\s+["']([^"']+)["']/g;
    for (const { name, text } of sources) {
      for (const match of text.matchAll(importRe)) {
        expect(
          match[1].startsWith("./"),
          `${name} imports "${match[1]}"`,
        ).toBe(true);
      }
    }
  });

  it("never calls fetch directly outside the API client", () => {
    for (const { name, text } of sources) {
      if (name === "api.ts") {
        continue;
      }
      expect(/\bfetch\s*\(/.test(text), `${name} calls fetch`).toBe(false);
    }
  });
});
