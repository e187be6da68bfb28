/**
 * Process-level runner for the panopt3d command line tool.
 *
 * The bindings never import the Python package; every operation shells out to
 * the installed CLI and communicates through its documented file formats.
 */

import { spawnSync } from "node:child_process";

/** Raised when the CLI exits non-zero or cannot be spawned. */
export class CliError extends Error {
  readonly command: readonly string[];
  readonly exitCode: number | null;
  readonly stderr: string;

  constructor(command: readonly string[], exitCode: number | null, stderr: string) {
    const tail = stderr.trim().split("\n").slice(-3).join("\n");
    super(
      `panopt3d command failed (exit ${exitCode ?? "signal"}): ` +
        `${command.join(" ")}${tail ? `\n${tail}` : ""}`,
    );
    this.name = "CliError";
    this.command = command;
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

/**
 * Resolve the CLI invocation prefix. `PANOPT3D_BIN` may name an alternative
 * executable (whitespace-split, so `python3 -m panopt3d.cli` works); the
 * default is the `panopt3d` entry point on PATH.
 */
export function cliCommand(): string[] {
  const override = process.env["PANOPT3D_BIN"];
  if (override && override.trim() !== "") {
    return override.trim().split(/\s+/);
  }
  return ["panopt3d"];
}

/**
 * Run `panopt3d <args>` and return its stdout. Throws {@link CliError} when
 * the process cannot be spawned or exits non-zero.
 */
export function runCli(args: readonly string[]): string {
  const command = [...cliCommand(), ...args];
  const [bin, ...rest] = command;
  const result = spawnSync(bin!, rest, {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (result.error) {
    throw new CliError(command, null, String(result.error));
  }
  if (result.status !== 0) {
    throw new CliError(command, result.status, result.stderr ?? "");
  }
  return result.stdout ?? "";
}

/** Report the CLI's version string (e.g. `"0.1.0"`). */
export function cliVersion(): string {
  const out = runCli(["--version"]).trim();
  // argparse prints "<prog> <version>"; keep only the version token.
  const parts = out.split(/\s+/);
  return parts[parts.length - 1] ?? out;
}
