import { describe, expect, it } from "vitest";

import { blockingPoseAt, makeClock, motionPoseAt, tick } from "../src/playback.js";
import { frameToX, project, worldPositions, xToFrame } from "../src/draw.js";
import { EditorKey } from "../src/state.js";

function key(frame: number): EditorKey {
  return {
    frame,
    features: [[0, 1, 0], [0.1, 0.2, 0.3]],
    specified: [true, false],
    tolerance: [0.85, 0.85],
  };
}

describe("playback clock", () => {
  it("advances by fps and wraps", () => {
    let clock = { ...makeClock(60, 20), playing: true };
    clock = tick(clock, 0.5);
    expect(clock.frame).toBeCloseTo(10);
    clock = tick(clock, 3.0);
    expect(clock.frame).toBeCloseTo((10 + 60) % 60);
  });

  it("holds when paused", () => {
    const clock = makeClock(60, 20);
    expect(tick(clock, 1.0).frame).toBe(0);
  });
});

describe("lane sampling", () => {
  it("the input lane holds each key until the next one", () => {
    const keys = [key(10), key(30)];
    expect(blockingPoseAt(keys, 0)?.frame).toBe(10);
    expect(blockingPoseAt(keys, 10)?.frame).toBe(10);
    expect(blockingPoseAt(keys, 29)?.frame).toBe(10);
    expect(blockingPoseAt(keys, 30)?.frame).toBe(30);
    expect(blockingPoseAt(keys, 59)?.frame).toBe(30);
    expect(blockingPoseAt([], 5)).toBeNull();
  });

  it("the output lane clamps to clip bounds", () => {
    const frames = [[[0, 0, 0]], [[1, 1, 1]]] as [number, number, number][][];
    expect(motionPoseAt(frames, -3)).toBe(frames[0]);
    expect(motionPoseAt(frames, 7)).toBe(frames[1]);
  });
});

describe("projection helpers", () => {
  it("world positions add the root to non-root joints", () => {
    const world = worldPositions([[1, 2, 3], [0.1, 0.2, 0.3]]);
    expect(world[0]).toEqual([1, 2, 3]);
    expect(world[1]).toEqual([1.1, 2.2, 3.3]);
  });

  it("front view is x/y, side view is z/y", () => {
    expect(project("front", [1, 2, 3])).toEqual([1, 2]);
    expect(project("side", [1, 2, 3])).toEqual([3, 2]);
  });

  it("timeline frame/pixel mapping is inverse on frame centers", () => {
    const layout = { x: 10, y: 0, width: 590, height: 30, frames: 60 };
    for (const f of [0, 1, 13, 59]) {
      expect(xToFrame(layout, frameToX(layout, f))).toBe(f);
    }
  });
});
