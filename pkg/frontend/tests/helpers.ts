/** Test scaffolding: spawn a real service instance on a synthetic vocabulary
 * and wait until it answers. The UI under test talks to it over plain HTTP,
 * exactly as in production. */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { connect, createServer } from "node:net";

const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

export interface ServiceHandle {
  base: string;
  dir: string;
  stop(): void;
}

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const server = createServer();
    server.on("error", reject);
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port assigned"));
        return;
      }
      server.close(() => resolvePort(address.port));
    });
  });
}

function buildCache(cachePath: string): void {
  const script = [
    "import sys",
    `sys.path.insert(0, ${JSON.stringify(join(REPO_ROOT, "tests"))})`,
    "from corpus import antipodal_sphere",
    "from lexdim import save_cache",
    `save_cache(antipodal_sphere(rng_seed=0), ${JSON.stringify(cachePath)})`,
  ].join("\n");
  const result = spawnSync("python3", ["-c", script], { encoding: "utf-8" });
  if (result.status !== 0) {
    throw new Error(`cache build failed: ${result.stderr}`);
  }
}

function portOpen(port: number): Promise<boolean> {
  return new Promise((resolve) => {
    const socket = connect({ port, host: "127.0.0.1" });
    socket.once("connect", () => {
      socket.destroy();
      resolve(true);
    });
    socket.once("error", () => resolve(false));
  });
}

async function waitHealthy(base: string, port: number, proc: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30000;
  // Probe the raw port first: fetch implementations log connection refusals.
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early with code ${proc.exitCode}`);
    }
    if (await portOpen(port)) break;
    await new Promise((r) => setTimeout(r, 100));
  }
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${base}/health`);
      if (resp.ok) return;
    } catch {
      // accepting connections but not serving yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service did not become healthy in time");
}

export async function startService(): Promise<ServiceHandle> {
  const dir = mkdtempSync(join(tmpdir(), "lexdim-ui-"));
  const cachePath = join(dir, "en.cache");
  buildCache(cachePath);

  const port = await freePort();
  const configPath = join(dir, "svc.conf");
  writeFileSync(
    configPath,
    `listen = 127.0.0.1:${port}\ndata_dir = ${join(dir, "data")}\nembeddings.en = ${cachePath}\n`,
  );
  const proc = spawn("lexdim", ["serve", "--config", configPath], { stdio: "ignore" });
  const base = `http://127.0.0.1:${port}`;
  await waitHealthy(base, port, proc);
  return {
    base,
    dir,
    stop() {
      proc.kill("SIGKILL");
      rmSync(dir, { recursive: true, force: true });
    },
  };
}

/** Storage stand-in for tests that should not touch real browser storage. */
export class FakeStore {
  private map = new Map<string, string>();

  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
}

export interface Deferred<T> {
  promise: Promise<T>;
  resolve(value: T): void;
  reject(err: unknown): void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Flush pending microtasks so awaited UI updates settle. */
export async function tick(times = 3): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await Promise.resolve();
  }
}
