// Subprocess boundary to the speechforge CLI. SPEECHFORGE_BIN overrides the
// executable (split on spaces, so "python3 -m speechforge" works too).

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class CliError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number | null,
  ) {
    super(message);
    this.name = "CliError";
  }
}

export function cliCommand(): string[] {
  const bin = process.env.SPEECHFORGE_BIN ?? "speechforge";
  return bin.split(" ").filter((s) => s.length > 0);
}

export function runCli(args: string[]): string {
  const [cmd, ...prefix] = cliCommand();
  const result = spawnSync(cmd, [...prefix, ...args], { encoding: "utf-8" });
  if (result.error) {
    throw new CliError(`failed to launch ${cmd}: ${result.error.message}`, null);
  }
  if (result.status !== 0) {
    const detail = (result.stderr || result.stdout || "").trim();
    throw new CliError(detail || `speechforge exited with ${result.status}`, result.status);
  }
  return result.stdout;
}

export function withWorkDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "speechforge-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
