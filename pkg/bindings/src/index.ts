// Scripting bindings for the speechforge front-end and inversion
// operations. Each call shells out to the CLI and exchanges FMX1/WAV
// files, so results are byte-identical to batch runs; there is no state
// between calls.

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { ArrayView } from "./fmx.js";
import { runCli, withWorkDir } from "./runner.js";
import { decodeWav, encodeWav } from "./wav.js";

export { ArrayView } from "./fmx.js";
export { CliError } from "./runner.js";
export { decodeWav, encodeWav } from "./wav.js";
export type { WavData } from "./wav.js";

export interface FbankPitchConfig {
  cmvn?: boolean;
}

export interface SpecAugmentConfig {
  seed: number;
  freqMasks?: number;
  freqWidth?: number;
  timeMasks?: number;
  timeWidth?: number;
  fill?: "mean" | "zero";
}

export interface GriffinLimConfig {
  iters?: number;
  fromLinear?: boolean;
}

/** 83-dim fbank-pitch features for a mono float signal. */
export function fbankPitch(
  samples: Float32Array,
  sampleRate: number,
  config: FbankPitchConfig = {},
): ArrayView {
  return withWorkDir((dir) => {
    const wavPath = join(dir, "in.wav");
    const outPath = join(dir, "out.fmx");
    writeFileSync(wavPath, encodeWav(samples, sampleRate));
    const args = ["featex", "--wav", wavPath, "--out-file", outPath];
    if (config.cmvn) {
      args.push("--cmvn", "per-utt");
    }
    runCli(args);
    return ArrayView.fromBytes(readFileSync(outPath));
  });
}

/** Seeded frequency/time masking; same seed, same masks as the CLI. */
export function specAugment(features: ArrayView, config: SpecAugmentConfig): ArrayView {
  return withWorkDir((dir) => {
    const inPath = join(dir, "in.fmx");
    const outPath = join(dir, "out.fmx");
    writeFileSync(inPath, features.toBytes());
    runCli([
      "augment", "specaug",
      "--in", inPath,
      "--out", outPath,
      "--seed", String(config.seed),
      "--freq-masks", String(config.freqMasks ?? 2),
      "--freq-width", String(config.freqWidth ?? 30),
      "--time-masks", String(config.timeMasks ?? 2),
      "--time-width", String(config.timeWidth ?? 40),
      "--fill", config.fill ?? "mean",
    ]);
    return ArrayView.fromBytes(readFileSync(outPath));
  });
}

/** Phase retrieval from a log-Mel (or, with fromLinear, magnitude) matrix. */
export function griffinLim(melOrMagnitude: ArrayView, config: GriffinLimConfig = {}): Float32Array {
  return withWorkDir((dir) => {
    const inPath = join(dir, "in.fmx");
    const outPath = join(dir, "out.wav");
    writeFileSync(inPath, melOrMagnitude.toBytes());
    const args = ["glim", "--mel", inPath, "--out", outPath, "--iters", String(config.iters ?? 60)];
    if (config.fromLinear) {
      args.push("--from-linear");
    }
    runCli(args);
    return decodeWav(readFileSync(outPath)).samples;
  });
}
