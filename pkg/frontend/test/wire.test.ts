import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import {
  REJECTED_LABEL,
  decodeFeatures,
  decodeLabels,
  encodeFeatures,
  encodeLabels,
  readFeatures,
  readLabels,
  writeFeatures,
  writeLabels,
} from "../src/wire.js";

const FIXTURES = path.join(
  path.dirname(fileURLToPath(import.meta.url)), "fixtures");

function tmpFile(name: string): string {
  return path.join(fs.mkdtempSync(path.join(os.tmpdir(), "wire-")), name);
}

describe("feature files", () => {
  it("round-trips through bytes", () => {
    const matrix = {
      data: Float32Array.from([1.5, -2.25, 0.001, 42]),
      count: 2,
      n: 2,
    };
    const decoded = decodeFeatures(encodeFeatures(matrix));
    expect(decoded.count).toBe(2);
    expect(decoded.n).toBe(2);
    expect(Array.from(decoded.data)).toEqual([1.5, -2.25, 0.0010000000474974513, 42]);
  });

  it("writes bytes identical to the memory package's writer", () => {
    const golden = fs.readFileSync(path.join(FIXTURES, "golden.eamf"));
    const encoded = encodeFeatures({
      data: Float32Array.from([0.0, 1.5, -2.25, 3.75, 1e-3, 65504.0]),
      count: 3,
      n: 2,
    });
    expect(encoded.equals(golden)).toBe(true);
  });

  it("reads the golden file back exactly", () => {
    const matrix = readFeatures(path.join(FIXTURES, "golden.eamf"));
    expect(matrix.count).toBe(3);
    expect(matrix.n).toBe(2);
    expect(matrix.data[3]).toBe(3.75);
  });

  it("rejects bad magic, version, truncation, and non-finite values", () => {
    const good = encodeFeatures({ data: Float32Array.from([1]), count: 1, n: 1 });
    const badMagic = Buffer.from(good);
    badMagic.write("XXXX", 0, "ascii");
    expect(() => decodeFeatures(badMagic)).toThrow(/magic/);
    const badVersion = Buffer.from(good);
    badVersion.writeUInt8(9, 4);
    expect(() => decodeFeatures(badVersion)).toThrow(/version/);
    expect(() => decodeFeatures(good.subarray(0, good.length - 1))).toThrow(/payload/);
    expect(() =>
      encodeFeatures({ data: Float32Array.from([NaN]), count: 1, n: 1 }),
    ).toThrow(/finite/);
  });

  it("writes atomically to disk", () => {
    const file = tmpFile("x.eamf");
    writeFeatures({ data: Float32Array.from([1, 2]), count: 1, n: 2 }, file);
    expect(readFeatures(file).n).toBe(2);
    expect(fs.readdirSync(path.dirname(file))).toEqual(["x.eamf"]);
  });
});

describe("label files", () => {
  it("round-trips including the rejected sentinel", () => {
    const labels = Uint16Array.from([0, 9, REJECTED_LABEL]);
    expect(Array.from(decodeLabels(encodeLabels(labels)))).toEqual([
      0, 9, REJECTED_LABEL,
    ]);
  });

  it("matches the golden label files byte for byte", () => {
    const golden = fs.readFileSync(path.join(FIXTURES, "golden.eaml"));
    expect(encodeLabels([0, 7, 9]).equals(golden)).toBe(true);
    const goldenPred = fs.readFileSync(path.join(FIXTURES, "golden_pred.eaml"));
    expect(encodeLabels([3, REJECTED_LABEL, 5]).equals(goldenPred)).toBe(true);
  });

  it("reads the golden predicted labels", () => {
    const labels = readLabels(path.join(FIXTURES, "golden_pred.eaml"));
    expect(Array.from(labels)).toEqual([3, REJECTED_LABEL, 5]);
  });

  it("rejects corrupt label files", () => {
    const good = encodeLabels([1, 2]);
    const bad = Buffer.from(good);
    bad.write("NOPE", 0, "ascii");
    expect(() => decodeLabels(bad)).toThrow(/magic/);
    expect(() => decodeLabels(good.subarray(0, good.length - 1))).toThrow(/size/);
  });

  it("writes label files usable for round trips", () => {
    const file = tmpFile("l.eaml");
    writeLabels([5, 6], file);
    expect(Array.from(readLabels(file))).toEqual([5, 6]);
  });
});
