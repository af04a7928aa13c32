/**
 * Length-prefixed JSON framing shared by both RPC endpoints.
 *
 * Each frame is a 4-byte big-endian payload length followed by a UTF-8 JSON
 * document. Requests carry {id, method, params}; responses carry {id, result}
 * or {id, error: {code, message}}. Frames beyond 64 MiB are a protocol
 * violation and the offending connection is closed.
 */

import { ProtocolError } from "./errors.js";

export const MAX_FRAME_BYTES = 64 * 1024 * 1024;

export function encodeFrame(message: unknown): Buffer {
  const payload = Buffer.from(JSON.stringify(message), "utf8");
  if (payload.length > MAX_FRAME_BYTES) {
    throw new ProtocolError(`frame of ${payload.length} bytes exceeds the 64 MiB bound`);
  }
  const frame = Buffer.allocUnsafe(4 + payload.length);
  frame.writeUInt32BE(payload.length, 0);
  payload.copy(frame, 4);
  return frame;
}

export function decodeMessage(payload: Buffer): Record<string, unknown> {
  let message: unknown;
  try {
    message = JSON.parse(payload.toString("utf8"));
  } catch (exc) {
    throw new ProtocolError(`malformed frame: ${exc}`);
  }
  if (typeof message !== "object" || message === null || Array.isArray(message)) {
    throw new ProtocolError("frame payload must be a JSON object");
  }
  return message as Record<string, unknown>;
}

/** Incremental frame splitter: feed socket chunks, collect whole payloads. */
export class FrameDecoder {
  private buffer: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Buffer[] {
    this.buffer = this.buffer.length === 0 ? chunk : Buffer.concat([this.buffer, chunk]);
    const frames: Buffer[] = [];
    while (this.buffer.length >= 4) {
      const length = this.buffer.readUInt32BE(0);
      if (length > MAX_FRAME_BYTES) {
        throw new ProtocolError(`frame of ${length} bytes exceeds the 64 MiB bound`);
      }
      if (this.buffer.length < 4 + length) {
        break;
      }
      frames.push(this.buffer.subarray(4, 4 + length));
      this.buffer = this.buffer.subarray(4 + length);
    }
    return frames;
  }
}
