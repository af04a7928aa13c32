/**
 * Typed errors mirroring the kernel's wire-protocol error table.
 *
 * Domain errors carry small positive codes that cross the wire unchanged;
 * protocol-level failures use JSON-RPC style negative codes.
 */

export class SimError extends Error {
  static code = -32000;
  code: number;

  constructor(message = "") {
    super(message || new.target.name);
    this.name = new.target.name;
    this.code = (new.target as typeof SimError).code;
  }
}

export class ActorNotFound extends SimError {
  static code = 1;
}

export class SpawnCollision extends SimError {
  static code = 2;
}

export class ControlNotEnabled extends SimError {
  static code = 3;
}

export class CommandOutOfRange extends SimError {
  static code = 4;
}

export class WeatherNotFound extends SimError {
  static code = 5;
}

export class ModeError extends SimError {
  static code = 6;
}

export class MapNotFound extends SimError {
  static code = 7;
}

export class InvalidInput extends SimError {
  static code = 8;
}

export class RouteExhausted extends SimError {
  static code = 9;
}

export class ConfigError extends SimError {
  static code = 10;
}

export class WriteError extends SimError {
  static code = 11;
}

export class StatError extends SimError {
  static code = 12;
}

export class ConnectError extends SimError {
  static code = 13;
}

export class BridgeError extends SimError {
  static code = 14;
}

export class ResetError extends SimError {
  static code = 15;
}

export class EpisodeDone extends SimError {
  static code = 16;
}

export class BindError extends SimError {
  static code = 17;
}

/** Framing or envelope violation; the offending connection is closed. */
export class ProtocolError extends SimError {
  static code = -32700;
}

export class UnknownMethod extends SimError {
  static code = -32601;
}

const DOMAIN_ERRORS = [
  ActorNotFound,
  SpawnCollision,
  ControlNotEnabled,
  CommandOutOfRange,
  WeatherNotFound,
  ModeError,
  MapNotFound,
  InvalidInput,
  RouteExhausted,
  ConfigError,
  WriteError,
  StatError,
  ConnectError,
  BridgeError,
  ResetError,
  EpisodeDone,
  BindError,
  UnknownMethod,
] as const;

export const CODE_TO_ERROR: ReadonlyMap<number, typeof SimError> = new Map(
  DOMAIN_ERRORS.map((cls) => [cls.code, cls]),
);

/** Rebuild the typed exception for a wire error object. */
export function errorForCode(code: number, message: string): SimError {
  const cls = CODE_TO_ERROR.get(code) ?? SimError;
  const err = new cls(message);
  err.code = code;
  return err;
}
