import { describe, expect, it } from "vitest";

import {
  ActorNotFound,
  ProtocolError,
  SimError,
  UnknownMethod,
  errorForCode,
} from "../src/errors.js";
import { FrameDecoder, MAX_FRAME_BYTES, decodeMessage, encodeFrame } from "../src/wire.js";

describe("framing", () => {
  it("prefixes the payload with its big-endian length", () => {
    const frame = encodeFrame({ id: 1, method: "ping", params: {} });
    const length = frame.readUInt32BE(0);
    expect(length).toBe(frame.length - 4);
    expect(JSON.parse(frame.subarray(4).toString("utf8"))).toEqual({
      id: 1,
      method: "ping",
      params: {},
    });
  });

  it("round-trips encode -> decode", () => {
    const message = { id: 42, result: { values: [1.5, -2, true], name: "x" } };
    const payloads = new FrameDecoder().push(encodeFrame(message));
    expect(payloads).toHaveLength(1);
    expect(decodeMessage(payloads[0])).toEqual(message);
  });

  it("reassembles frames fed one byte at a time", () => {
    const a = encodeFrame({ id: 1, result: "first" });
    const b = encodeFrame({ id: 2, result: "second" });
    const stream = Buffer.concat([a, b]);
    const decoder = new FrameDecoder();
    const got: unknown[] = [];
    for (const byte of stream) {
      for (const payload of decoder.push(Buffer.from([byte]))) {
        got.push(decodeMessage(payload));
      }
    }
    expect(got).toEqual([
      { id: 1, result: "first" },
      { id: 2, result: "second" },
    ]);
  });

  it("holds partial frames until the rest arrives", () => {
    const frame = encodeFrame({ id: 9, result: null });
    const decoder = new FrameDecoder();
    expect(decoder.push(frame.subarray(0, 3))).toEqual([]);
    expect(decoder.push(frame.subarray(3, 7))).toEqual([]);
    const payloads = decoder.push(frame.subarray(7));
    expect(payloads).toHaveLength(1);
    expect(decodeMessage(payloads[0])).toEqual({ id: 9, result: null });
  });

  it("rejects oversize frames", () => {
    const header = Buffer.alloc(4);
    header.writeUInt32BE(MAX_FRAME_BYTES + 1, 0);
    expect(() => new FrameDecoder().push(header)).toThrow(ProtocolError);
  });

  it("rejects malformed payloads", () => {
    expect(() => decodeMessage(Buffer.from("not json"))).toThrow(ProtocolError);
    expect(() => decodeMessage(Buffer.from("[1, 2]"))).toThrow(ProtocolError);
    expect(() => decodeMessage(Buffer.from("42"))).toThrow(ProtocolError);
  });
});

describe("error table", () => {
  it("maps domain codes to typed exceptions", () => {
    const err = errorForCode(1, "actor 5 does not exist");
    expect(err).toBeInstanceOf(ActorNotFound);
    expect(err.code).toBe(1);
    expect(err.message).toBe("actor 5 does not exist");
  });

  it("maps protocol codes", () => {
    expect(errorForCode(-32601, "nope")).toBeInstanceOf(UnknownMethod);
  });

  it("falls back to the base error for unknown codes", () => {
    const err = errorForCode(99, "mystery");
    expect(err).toBeInstanceOf(SimError);
    expect(err).not.toBeInstanceOf(ActorNotFound);
    expect(err.code).toBe(99);
  });
});
