import * as net from "node:net";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AerialClient, GroundClient } from "../src/clients.js";
import { ActorNotFound, ConnectError, UnknownMethod } from "../src/errors.js";
import { KernelHandle, startKernel } from "../src/kernel.js";

/** Grab a port the OS just released, so connecting to it is refused. */
function closedPort(): Promise<number> {
  return new Promise((resolve) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const port = (server.address() as net.AddressInfo).port;
      server.close(() => resolve(port));
    });
  });
}

describe("session", () => {
  // Free-running kernel: blocking mutations resolve on the driver's own
  // ticks, so no pipelining is needed here.
  let kernel: KernelHandle;
  let ground: GroundClient;
  let aerial: AerialClient;

  beforeAll(async () => {
    kernel = await startKernel({ seed: 0, sync: false });
    ground = await GroundClient.connect(kernel.ground[0], kernel.ground[1]);
    aerial = await AerialClient.connect(kernel.aerial[0], kernel.aerial[1]);
  });

  afterAll(async () => {
    ground?.close();
    aerial?.close();
    await kernel?.stop();
  });

  it("refuses a closed port with ConnectError", async () => {
    const port = await closedPort();
    await expect(GroundClient.connect("127.0.0.1", port)).rejects.toBeInstanceOf(ConnectError);
  });

  it("hands out strictly increasing request ids per session", async () => {
    const first = ground.send("ping");
    const second = ground.send("ping");
    const third = ground.send("ping");
    expect(second).toBe(first + 1);
    expect(third).toBe(second + 1);
    await ground.recv(first);
    await ground.recv(second);
    await ground.recv(third);
    // The aerial session counts on its own.
    const aerialFirst = aerial.send("ping");
    await aerial.recv(aerialFirst);
    expect(aerial.send("ping")).toBe(aerialFirst + 1);
    await aerial.recv(aerialFirst + 1);
  });

  it("serves snapshots with the expected shape", async () => {
    const snap = await ground.worldSnapshot();
    expect(snap.weather.name).toBeDefined();
    expect(Array.isArray(snap.actors)).toBe(true);
    expect(snap.actors.length).toBeGreaterThan(0);
    for (const actor of snap.actors) {
      expect(actor.pose.position).toHaveLength(3);
      expect(actor.pose.orientation).toHaveLength(4);
      expect(actor.bbox).toHaveLength(3);
    }
  });

  it("maps domain errors to typed exceptions", async () => {
    await expect(ground.actorTransform(999999)).rejects.toBeInstanceOf(ActorNotFound);
    await expect(ground.call("warp_reality")).rejects.toBeInstanceOf(UnknownMethod);
  });

  it("spawns, queries and destroys an actor", async () => {
    const actorId = await ground.spawnActor("static", [17000.0, -17000.0, 100.0]);
    const transform = await ground.actorTransform(actorId);
    expect(transform.id).toBe(actorId);
    expect(transform.pose.position[0]).toBeCloseTo(17000.0, 6);
    await ground.destroyActor(actorId);
    await expect(ground.actorTransform(actorId)).rejects.toBeInstanceOf(ActorNotFound);
  });

  it("survives 5000 sequential state calls without id drift", async () => {
    const droneId = await ground.spawnActor("drone", [0.0, 0.0, 1000.0]);
    try {
      const firstId = aerial.send("multirotor_state", { actor_id: droneId });
      const first = await aerial.recv(firstId);
      expect(first.id).toBe(droneId);
      for (let i = 1; i < 5000; i++) {
        const reqId = aerial.send("multirotor_state", { actor_id: droneId });
        expect(reqId).toBe(firstId + i);
        const state = await aerial.recv(reqId);
        expect(state.id).toBe(droneId);
      }
    } finally {
      await ground.destroyActor(droneId);
    }
  });
});
