/**
 * Spawn a kernel process for tests and scripts.
 *
 * Runs `agsim serve`, waits for the single ready line on stdout
 * ({"ground": [host, port], "aerial": [host, port], "dt": ..., "seed": ...}),
 * and hands back the bound addresses plus a stop handle.
 */

import { ChildProcess, spawn } from "node:child_process";

import { ConnectError } from "./errors.js";

export interface KernelOptions {
  seed?: number;
  dt?: number;
  sync?: boolean;
  groundPort?: number;
  aerialPort?: number;
  /** Executable to launch; defaults to the installed `agsim` CLI. */
  bin?: string;
  readyTimeoutMs?: number;
}

export interface KernelHandle {
  ground: [string, number];
  aerial: [string, number];
  dt: number;
  seed: number;
  proc: ChildProcess;
  stop(): Promise<void>;
}

export async function startKernel(opts: KernelOptions = {}): Promise<KernelHandle> {
  const args = [
    "serve",
    "--ground-port",
    String(opts.groundPort ?? 0),
    "--aerial-port",
    String(opts.aerialPort ?? 0),
    "--seed",
    String(opts.seed ?? 0),
  ];
  if (opts.dt !== undefined) {
    args.push("--dt", String(opts.dt));
  }
  if (opts.sync ?? true) {
    args.push("--sync");
  }
  const proc = spawn(opts.bin ?? "agsim", args, {
    stdio: ["ignore", "pipe", "inherit"],
  });

  const line = await new Promise<string>((resolve, reject) => {
    let buffered = "";
    const timer = setTimeout(() => {
      proc.kill("SIGKILL");
      reject(new ConnectError("kernel did not print its ready line in time"));
    }, opts.readyTimeoutMs ?? 30_000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffered += chunk.toString("utf8");
      const newline = buffered.indexOf("\n");
      if (newline >= 0) {
        clearTimeout(timer);
        resolve(buffered.slice(0, newline));
      }
    });
    proc.once("error", (err) => {
      clearTimeout(timer);
      reject(new ConnectError(`cannot launch kernel: ${err.message}`));
    });
    proc.once("exit", (code) => {
      clearTimeout(timer);
      reject(new ConnectError(`kernel exited before it was ready (code ${code})`));
    });
  });

  const ready = JSON.parse(line) as {
    ground: [string, number];
    aerial: [string, number];
    dt: number;
    seed: number;
  };

  return {
    ...ready,
    proc,
    stop: () =>
      new Promise<void>((resolve) => {
        if (proc.exitCode !== null) {
          resolve();
          return;
        }
        const hammer = setTimeout(() => proc.kill("SIGKILL"), 2_000);
        proc.once("exit", () => {
          clearTimeout(hammer);
          resolve();
        });
        proc.kill("SIGTERM");
      }),
  };
}
