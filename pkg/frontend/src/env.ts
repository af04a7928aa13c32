/**
 * Episodic drone-chase environment over one ground and one aerial session.
 *
 * The agent commands drone velocity in NED while a target vehicle drives the
 * map loop. Each `step` advances the world exactly one synchronous tick, so
 * seeded episodes replay exactly.
 *
 * Observation (17 floats):
 *
 *   0..2   drone position, shared NED frame (m)
 *   3..5   drone velocity, NED (m/s)
 *   6..8   drone commanded velocity, NED (m/s)
 *   9..11  vehicle position minus drone position, NED (m)
 *   12..14 vehicle velocity, NED (m/s)
 *   15     altitude error: target minus current (m)
 *   16     saturation flag (0 or 1)
 *
 * Reward per step: -lateral_distance - 0.5*|altitude error| - 10*collision.
 * An episode ends on collision or after `maxSteps`; stepping a finished
 * episode throws `EpisodeDone`.
 */

import { AerialClient, GroundClient, ActorTransform } from "./clients.js";
import { CommandOutOfRange, EpisodeDone, ResetError } from "./errors.js";

export const OBS_DIM = 17;

export interface EnvConfig {
  maxSteps: number;
  targetAltitudeM: number;
  altitudeWeight: number;
  collisionPenalty: number;
  cruiseSpeedCmS: number;
  vMaxMS: number;
  /** Seeded lateral offset of the drone spawn, cm. */
  spawnJitterCm: number;
}

export const DEFAULT_CONFIG: EnvConfig = {
  maxSteps: 200,
  targetAltitudeM: 10.0,
  altitudeWeight: 0.5,
  collisionPenalty: 10.0,
  cruiseSpeedCmS: 500.0,
  vMaxMS: 10.0,
  spawnJitterCm: 300.0,
};

export interface StepInfo {
  steps: number;
  lateral_m: number;
  altitude_m: number;
  collision: boolean;
}

export interface StepResult {
  observation: number[];
  reward: number;
  done: boolean;
  info: StepInfo;
}

/** Small deterministic RNG so seeded resets are reproducible client-side. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Waypoints marching counterclockwise around a rectangle, cm. */
function rectLoop(halfX: number, halfY: number, spacing: number): Array<[number, number]> {
  const corners: Array<[number, number]> = [
    [-halfX, -halfY],
    [halfX, -halfY],
    [halfX, halfY],
    [-halfX, halfY],
  ];
  const points: Array<[number, number]> = [];
  for (let i = 0; i < 4; i++) {
    const [x0, y0] = corners[i];
    const [x1, y1] = corners[(i + 1) % 4];
    const length = Math.hypot(x1 - x0, y1 - y0);
    const steps = Math.max(1, Math.floor(length / spacing));
    for (let k = 0; k < steps; k++) {
      const t = k / steps;
      points.push([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t]);
    }
  }
  return points;
}

// flat_town's road loop; the SDK carries the map geometry the same way the
// kernel-side workflow clients do.
const FLAT_TOWN_ROUTE = rectLoop(12000.0, 8000.0, 500.0);

function routeHeading(route: Array<[number, number]>, index: number): number {
  const a = route[index % route.length];
  const b = route[(index + 1) % route.length];
  return Math.atan2(b[1] - a[1], b[0] - a[0]);
}

function positionNed(transform: ActorTransform): number[] {
  const p = transform.pose.position;
  return [p[0] / 100.0, p[1] / 100.0, -p[2] / 100.0];
}

function velocityNed(transform: ActorTransform): number[] {
  const v = transform.velocity;
  return [v[0] / 100.0, v[1] / 100.0, -v[2] / 100.0];
}

function aabbOverlap(c1: number[], h1: number[], c2: number[], h2: number[]): boolean {
  for (let axis = 0; axis < 3; axis++) {
    if (Math.abs(c1[axis] - c2[axis]) >= h1[axis] + h2[axis]) {
      return false;
    }
  }
  return true;
}

export class DroneChaseEnv {
  readonly config: EnvConfig;
  private vehicleId: number | null = null;
  private droneId: number | null = null;
  private offset: number[] = [0, 0, 0];
  private steps = 0;
  private done = true;

  constructor(
    private readonly ground: GroundClient,
    private readonly aerial: AerialClient,
    config: Partial<EnvConfig> = {},
  ) {
    this.config = { ...DEFAULT_CONFIG, ...config };
  }

  /** Fresh seeded episode; returns the first observation. */
  async reset(seed = 0): Promise<number[]> {
    await this.ground.setSyncMode(true);
    const rand = mulberry32(seed);
    const idx = Math.floor(rand() * FLAT_TOWN_ROUTE.length);
    const vpos = FLAT_TOWN_ROUTE[idx];
    const yaw = routeHeading(FLAT_TOWN_ROUTE, idx);
    const jitter = this.config.spawnJitterCm;
    const dronePos = [
      vpos[0] + (rand() * 2 - 1) * jitter,
      vpos[1] + (rand() * 2 - 1) * jitter,
      this.config.targetAltitudeM * 100.0,
    ];

    const pending: number[] = [];
    for (const aid of [this.droneId, this.vehicleId]) {
      if (aid !== null) {
        pending.push(this.ground.send("destroy_actor", { actor_id: aid }));
      }
    }
    const spawnV = this.ground.send("spawn_actor", {
      kind: "vehicle",
      position: [vpos[0], vpos[1], 75.0],
      heading: -yaw,
      params: {
        autopilot: true,
        route_index: idx,
        cruise_speed: this.config.cruiseSpeedCmS,
      },
    });
    const spawnD = this.ground.send("spawn_actor", { kind: "drone", position: dronePos });
    await this.ground.tick();
    try {
      for (const req of pending) {
        await this.ground.recv(req);
      }
      this.vehicleId = (await this.ground.recv(spawnV)).actor_id;
      this.droneId = (await this.ground.recv(spawnD)).actor_id;
    } catch (exc) {
      throw new ResetError(`episode setup failed: ${exc}`);
    }
    this.offset = [dronePos[0] / 100.0, dronePos[1] / 100.0, -dronePos[2] / 100.0];

    const enable = this.aerial.send("enable_api_control", {
      actor_id: this.droneId,
      enabled: true,
    });
    await this.aerial.ping();
    await this.ground.tick();
    await this.aerial.recv(enable);

    this.steps = 0;
    this.done = false;
    return (await this.observe()).obs;
  }

  async step(action: number[]): Promise<StepResult> {
    if (this.done) {
      throw new EpisodeDone("call reset() before stepping again");
    }
    if (
      !Array.isArray(action) ||
      action.length !== 3 ||
      !action.every((v) => typeof v === "number" && Number.isFinite(v))
    ) {
      throw new CommandOutOfRange("action must be a finite 3-vector (m/s)");
    }
    if (Math.hypot(action[0], action[1], action[2]) > this.config.vMaxMS + 1e-12) {
      throw new CommandOutOfRange(`|action| exceeds ${this.config.vMaxMS} m/s`);
    }

    const req = this.aerial.send("set_velocity", {
      actor_id: this.droneId,
      velocity: action,
    });
    await this.aerial.ping();
    await this.ground.tick();
    await this.aerial.recv(req);

    const { obs, lateral, altitude } = await this.observe();
    const collision = await this.collided();
    const reward =
      -lateral -
      this.config.altitudeWeight * Math.abs(this.config.targetAltitudeM - altitude) -
      this.config.collisionPenalty * (collision ? 1 : 0);
    this.steps += 1;
    this.done = collision || this.steps >= this.config.maxSteps;
    return {
      observation: obs,
      reward,
      done: this.done,
      info: { steps: this.steps, lateral_m: lateral, altitude_m: altitude, collision },
    };
  }

  async close(): Promise<void> {
    try {
      await this.ground.setSyncMode(false);
      for (const aid of [this.droneId, this.vehicleId]) {
        if (aid !== null) {
          await this.ground.destroyActor(aid);
        }
      }
    } finally {
      this.vehicleId = null;
      this.droneId = null;
      this.done = true;
    }
  }

  private async observe(): Promise<{ obs: number[]; lateral: number; altitude: number }> {
    const state = await this.aerial.multirotorState(this.droneId!);
    const transform = await this.ground.actorTransform(this.vehicleId!);

    const dronePos = state.position.map((v, i) => v + this.offset[i]);
    const vehiclePos = positionNed(transform);
    const vehicleVel = velocityNed(transform);

    const rel = vehiclePos.map((v, i) => v - dronePos[i]);
    const lateral = Math.hypot(rel[0], rel[1]);
    const altitude = -dronePos[2];
    const obs = [
      ...dronePos,
      ...state.velocity,
      ...state.commanded_velocity,
      ...rel,
      ...vehicleVel,
      this.config.targetAltitudeM - altitude,
      state.saturated ? 1.0 : 0.0,
    ];
    return { obs, lateral, altitude };
  }

  private async collided(): Promise<boolean> {
    const snap = await this.ground.worldSnapshot();
    let drone: ActorTransform | null = null;
    const others: ActorTransform[] = [];
    for (const actor of snap.actors) {
      if (actor.id === this.droneId) {
        drone = actor;
      } else {
        others.push(actor);
      }
    }
    if (drone === null) {
      return false;
    }
    const dp = drone.pose.position;
    const dh = drone.bbox;
    return others.some((a) => aabbOverlap(dp, dh, a.pose.position, a.bbox));
  }
}
