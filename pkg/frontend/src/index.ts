export * from "./errors.js";
export { MAX_FRAME_BYTES, FrameDecoder, encodeFrame, decodeMessage } from "./wire.js";
export { Session } from "./session.js";
export type { Params } from "./session.js";
export { GroundClient, AerialClient } from "./clients.js";
export type {
  ActorTransform,
  MultirotorState,
  Pose,
  SpawnOptions,
  WorldSnapshot,
} from "./clients.js";
export { DroneChaseEnv, DEFAULT_CONFIG, OBS_DIM } from "./env.js";
export type { EnvConfig, StepInfo, StepResult } from "./env.js";
export { startKernel } from "./kernel.js";
export type { KernelHandle, KernelOptions } from "./kernel.js";
