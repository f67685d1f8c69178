import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterAll, describe, expect, it } from "vitest";

import {
  ArrayView,
  CliError,
  decodeWav,
  encodeWav,
  fbankPitch,
  griffinLim,
  specAugment,
} from "../dist/index.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixtureWav = join(here, "..", "fixtures", "tone.wav");
const scratch = mkdtempSync(join(tmpdir(), "parity-"));

afterAll(() => rmSync(scratch, { recursive: true, force: true }));

function cli(args: string[]): void {
  const bin = (process.env.SPEECHFORGE_BIN ?? "speechforge").split(" ");
  execFileSync(bin[0], [...bin.slice(1), ...args], { encoding: "utf-8" });
}

function fixtureSamples(): { samples: Float32Array; sampleRate: number } {
  return decodeWav(readFileSync(fixtureWav));
}

describe("wav interchange", () => {
  it("re-encodes the fixture byte for byte", () => {
    const { samples, sampleRate } = fixtureSamples();
    const reencoded = encodeWav(samples, sampleRate);
    expect(reencoded.equals(readFileSync(fixtureWav))).toBe(true);
  });
});

describe("fbankPitch", () => {
  it("matches the CLI FMX1 output byte for byte", () => {
    const { samples, sampleRate } = fixtureSamples();
    const view = fbankPitch(samples, sampleRate);

    const cliOut = join(scratch, "cli-feats.fmx");
    cli(["featex", "--wav", fixtureWav, "--out-file", cliOut]);
    expect(view.toBytes().equals(readFileSync(cliOut))).toBe(true);
  });

  it("yields (T, 83) features", () => {
    const { samples, sampleRate } = fixtureSamples();
    const view = fbankPitch(samples, sampleRate);
    expect(view.cols).toBe(83);
    expect(view.rows).toBe(Math.floor(samples.length / 200) + 1);
  });

  it("surfaces core errors without aborting", () => {
    expect(() => fbankPitch(new Float32Array(0), 16000)).toThrowError(CliError);
    try {
      fbankPitch(new Float32Array(0), 16000);
    } catch (err) {
      expect(String(err)).toContain("shorter than one window");
    }
  });
});

describe("specAugment", () => {
  function someFeatures(): ArrayView {
    const { samples, sampleRate } = fixtureSamples();
    return fbankPitch(samples, sampleRate);
  }

  it("matches a direct CLI run with the same seed", () => {
    const features = someFeatures();
    const view = specAugment(features, { seed: 7 });

    const inPath = join(scratch, "specaug-in.fmx");
    const outPath = join(scratch, "specaug-out.fmx");
    writeFileSync(inPath, features.toBytes());
    cli([
      "augment", "specaug", "--in", inPath, "--out", outPath,
      "--seed", "7", "--freq-masks", "2", "--freq-width", "30",
      "--time-masks", "2", "--time-width", "40", "--fill", "mean",
    ]);
    expect(view.toBytes().equals(readFileSync(outPath))).toBe(true);
  });

  it("is seed-deterministic and free of cross-call state", () => {
    const features = someFeatures();
    const first = specAugment(features, { seed: 1 });
    const other = specAugment(features, { seed: 2 });
    const again = specAugment(features, { seed: 1 });
    expect(first.toBytes().equals(again.toBytes())).toBe(true);
    expect(first.toBytes().equals(other.toBytes())).toBe(false);
  });
});

describe("griffinLim", () => {
  it("zero-iteration linear-magnitude run matches the CLI byte for byte", () => {
    // a small positive magnitude matrix; 0 iterations = plain inversion
    const rows = 9;
    const cols = 513;
    const data = new Float32Array(rows * cols);
    for (let i = 0; i < data.length; i++) {
      data[i] = 0.01 + ((i * 2654435761) % 1000) / 1e5;
    }
    const mag = new ArrayView(rows, cols, data);
    const samples = griffinLim(mag, { iters: 0, fromLinear: true });
    expect(samples.length).toBe((rows - 1) * 200);

    const inPath = join(scratch, "gl-in.fmx");
    const outPath = join(scratch, "gl-out.wav");
    writeFileSync(inPath, mag.toBytes());
    cli(["glim", "--mel", inPath, "--out", outPath, "--iters", "0", "--from-linear"]);
    expect(encodeWav(samples, 16000).equals(readFileSync(outPath))).toBe(true);
  });

  it("inverts a log-Mel matrix from the feature path", () => {
    const { samples, sampleRate } = fixtureSamples();
    const feats = fbankPitch(samples, sampleRate);
    // first 80 columns are the log-Mel block
    const mel = new Float32Array(feats.rows * 80);
    for (let t = 0; t < feats.rows; t++) {
      for (let d = 0; d < 80; d++) {
        mel[t * 80 + d] = feats.get(t, d);
      }
    }
    const out = griffinLim(new ArrayView(feats.rows, 80, mel), { iters: 4 });
    expect(out.length).toBe((feats.rows - 1) * 200);
    let energy = 0;
    for (const v of out) energy += v * v;
    expect(energy).toBeGreaterThan(0);
  });
});

describe("ArrayView", () => {
  it("round-trips through FMX1 bytes losslessly", () => {
    const data = new Float32Array([0, -1.5, 3.25e-7, 65504, -0.1]);
    const view = new ArrayView(1, 5, data);
    const back = ArrayView.fromBytes(view.toBytes());
    expect(back.rows).toBe(1);
    expect(back.cols).toBe(5);
    expect(Array.from(back.data)).toEqual(Array.from(data));
    expect(back.toBytes().equals(view.toBytes())).toBe(true);
  });

  it("rejects malformed blobs", () => {
    expect(() => ArrayView.fromBytes(Buffer.from("nonsense"))).toThrowError(/FMX1/);
  });
});
