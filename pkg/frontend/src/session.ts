/**
 * Blocking-style RPC session over one TCP connection.
 *
 * Calls are serialized per session and responses are matched by request id;
 * ids are strictly increasing for the lifetime of the session. A session is
 * not safe for concurrent use — callers needing parallel calls open
 * multiple sessions.
 */

import * as net from "node:net";

import { ConnectError, ProtocolError, SimError, errorForCode } from "./errors.js";
import { FrameDecoder, decodeMessage, encodeFrame } from "./wire.js";

export type Params = Record<string, unknown>;

type WireMessage = Record<string, unknown>;

export class Session {
  private nextId = 1;
  private readonly stash = new Map<number, WireMessage>();
  private waiters: Array<() => void> = [];
  private failure: SimError | null = null;
  private readonly decoder = new FrameDecoder();

  /** Use `connect()`; the constructor wants an already-connected socket. */
  constructor(
    private readonly sock: net.Socket,
    readonly host: string,
    readonly port: number,
  ) {
    sock.on("data", (chunk) => this.onData(chunk));
    sock.on("error", (err) =>
      this.fail(new ConnectError(`session to ${host}:${port} failed: ${err.message}`)),
    );
    sock.on("close", () =>
      this.fail(new ConnectError(`session to ${host}:${port} closed by peer`)),
    );
  }

  static connect<T extends Session>(
    this: new (sock: net.Socket, host: string, port: number) => T,
    host: string,
    port: number,
    timeoutMs = 10_000,
  ): Promise<T> {
    return new Promise<T>((resolve, reject) => {
      const sock = net.createConnection({ host, port, timeout: timeoutMs });
      const bail = (err: Error) => {
        sock.destroy();
        reject(new ConnectError(`cannot connect to ${host}:${port}: ${err.message}`));
      };
      sock.once("error", bail);
      sock.once("timeout", () => bail(new Error("connect timed out")));
      sock.once("connect", () => {
        sock.off("error", bail);
        sock.setTimeout(0);
        sock.setNoDelay(true);
        resolve(new this(sock, host, port));
      });
    });
  }

  /**
   * Fire a request without waiting; pair with {@link recv}.
   *
   * Mutating calls only answer after the tick that applies them, so a
   * synchronous-mode client pipelines: send the command, send or issue the
   * tick, then collect the command's response.
   */
  send(method: string, params: Params = {}): number {
    if (this.failure) {
      throw this.failure;
    }
    const id = this.nextId++;
    this.sock.write(encodeFrame({ id, method, params }));
    return id;
  }

  /** Response for a previously sent request; responses may interleave. */
  async recv(reqId: number): Promise<any> {
    for (;;) {
      const msg = this.stash.get(reqId);
      if (msg !== undefined) {
        this.stash.delete(reqId);
        const err = msg.error as { code: number; message?: string } | undefined;
        if (err !== undefined) {
          throw errorForCode(Number(err.code), String(err.message ?? ""));
        }
        return msg.result;
      }
      if (this.failure) {
        throw this.failure;
      }
      await new Promise<void>((wake) => this.waiters.push(wake));
    }
  }

  call(method: string, params: Params = {}): Promise<any> {
    return this.recv(this.send(method, params));
  }

  close(): void {
    this.fail(new ConnectError(`session to ${this.host}:${this.port} is closed`));
    this.sock.destroy();
  }

  private onData(chunk: Buffer): void {
    try {
      for (const payload of this.decoder.push(chunk)) {
        const msg = decodeMessage(payload);
        const id = msg.id;
        if (typeof id !== "number" || !Number.isInteger(id)) {
          throw new ProtocolError(`response id ${JSON.stringify(id)} is not an integer`);
        }
        this.stash.set(id, msg);
      }
    } catch (exc) {
      this.fail(exc instanceof SimError ? exc : new ProtocolError(String(exc)));
      this.sock.destroy();
      return;
    }
    this.wake();
  }

  private fail(err: SimError): void {
    if (this.failure === null) {
      this.failure = err;
    }
    this.wake();
  }

  private wake(): void {
    const pending = this.waiters;
    this.waiters = [];
    for (const wake of pending) {
      wake();
    }
  }
}
