/**
 * Typed wrappers over the two RPC endpoints.
 *
 * Method names and payload shapes match the kernel's wire surface; results
 * are returned as parsed JSON values. Image captures keep their base64
 * stream blob — decoding the binary stream format is out of scope here.
 */

import { Session } from "./session.js";

export interface Pose {
  position: number[];
  orientation: number[];
}

export interface ActorTransform {
  id: number;
  kind: string;
  pose: Pose;
  velocity: number[];
  bbox: number[];
}

export interface WorldSnapshot {
  tick: number;
  sim_time: number;
  dt: number;
  weather: {
    name: string;
    illumination: number;
    precipitation: number;
    fog_density: number;
  };
  actors: ActorTransform[];
}

export interface MultirotorState {
  id: number;
  tick: number;
  position: number[];
  velocity: number[];
  orientation: number[];
  commanded_velocity: number[];
  api_control_enabled: boolean;
  saturated: boolean;
}

export interface SpawnOptions {
  heading?: number;
  bbox?: number[];
  params?: Record<string, unknown>;
}

export class GroundClient extends Session {
  ping(): Promise<Record<string, never>> {
    return this.call("ping");
  }

  worldSnapshot(): Promise<WorldSnapshot> {
    return this.call("world_snapshot");
  }

  actorTransform(actorId: number): Promise<ActorTransform> {
    return this.call("actor_transform", { actor_id: actorId });
  }

  async spawnActor(kind: string, position: number[], opts: SpawnOptions = {}): Promise<number> {
    const req: Record<string, unknown> = {
      kind,
      position,
      heading: opts.heading ?? 0.0,
    };
    if (opts.bbox !== undefined) {
      req.bbox = opts.bbox;
    }
    if (opts.params !== undefined) {
      req.params = opts.params;
    }
    return (await this.call("spawn_actor", req)).actor_id;
  }

  destroyActor(actorId: number): Promise<unknown> {
    return this.call("destroy_actor", { actor_id: actorId });
  }

  setAutopilot(actorId: number, enabled: boolean, speed?: number): Promise<unknown> {
    const params: Record<string, unknown> = { actor_id: actorId, enabled };
    if (speed !== undefined) {
      params.speed = speed;
    }
    return this.call("set_autopilot", params);
  }

  setWeather(name: string): Promise<unknown> {
    return this.call("set_weather", { name });
  }

  setSyncMode(enabled: boolean): Promise<unknown> {
    return this.call("set_sync_mode", { enabled });
  }

  async tick(): Promise<number> {
    return (await this.call("tick")).tick;
  }

  recordMeta(): Promise<unknown> {
    return this.call("record_meta");
  }
}

export class AerialClient extends Session {
  ping(): Promise<Record<string, never>> {
    return this.call("ping");
  }

  multirotorState(actorId?: number): Promise<MultirotorState> {
    return this.call("multirotor_state", actorId === undefined ? {} : { actor_id: actorId });
  }

  enableApiControl(enabled: boolean, actorId?: number): Promise<unknown> {
    const params: Record<string, unknown> = { enabled };
    if (actorId !== undefined) {
      params.actor_id = actorId;
    }
    return this.call("enable_api_control", params);
  }

  setVelocity(velocity: number[], actorId?: number): Promise<unknown> {
    const params: Record<string, unknown> = { velocity };
    if (actorId !== undefined) {
      params.actor_id = actorId;
    }
    return this.call("set_velocity", params);
  }

  takeoffTo(altitudeM: number, actorId?: number): Promise<unknown> {
    const params: Record<string, unknown> = { altitude: altitudeM };
    if (actorId !== undefined) {
      params.actor_id = actorId;
    }
    return this.call("takeoff_to", params);
  }

  captureImage(
    opts: {
      modality?: string;
      width?: number;
      height?: number;
      mount?: string;
      actorId?: number;
    } = {},
  ): Promise<{ data_b64: string; [key: string]: unknown }> {
    const params: Record<string, unknown> = {
      modality: opts.modality ?? "depth",
      width: opts.width ?? 64,
      height: opts.height ?? 64,
      mount: opts.mount ?? "down",
    };
    if (opts.actorId !== undefined) {
      params.actor_id = opts.actorId;
    }
    return this.call("capture_image", params);
  }
}
