/**
 * Process-boundary plumbing: every binding call shells out to the core
 * command-line tool and exchanges data through its file formats. The
 * kernels hold no state in this process, so the bindings are trivially
 * thread-compatible — each call owns a private scratch directory.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Raised when the core tool rejects a call; carries its message. */
export class CoreError extends Error {
  /** The tool's exit code: 2 validation, 3 I/O or format, 4 degenerate input. */
  readonly exitCode: number;

  constructor(message: string, exitCode: number) {
    super(message);
    this.name = "CoreError";
    this.exitCode = exitCode;
  }
}

/** Override the executable with the SCANMIX_BIN environment variable. */
function coreCommand(): string[] {
  const bin = process.env.SCANMIX_BIN;
  return bin ? [bin] : ["scanmix"];
}

/**
 * Runs one core subcommand synchronously and returns its stdout.
 * Non-zero exits become CoreError with the tool's stderr message.
 */
export function runCore(args: string[], cwd?: string): string {
  const [cmd, ...prefix] = coreCommand();
  let proc = spawnSync(cmd, [...prefix, ...args], { cwd, encoding: "utf-8" });
  if (proc.error && (proc.error as NodeJS.ErrnoException).code === "ENOENT") {
    // no console script on PATH; the module entry point is the same CLI
    proc = spawnSync("python3", ["-m", "scanmix", ...args], { cwd, encoding: "utf-8" });
  }
  if (proc.error) {
    throw proc.error;
  }
  if (proc.status !== 0) {
    const detail = (proc.stderr || proc.stdout || "").trim();
    throw new CoreError(detail || `core tool exited with ${proc.status}`, proc.status ?? -1);
  }
  return proc.stdout;
}

/** Runs `fn` with a fresh scratch directory, removing it afterwards. */
export function withScratchDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "scanmix-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
