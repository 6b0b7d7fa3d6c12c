import { describe, expect, it } from "vitest";

import {
  addKey, applyPreset, canGenerate, deleteKey, dragJoint, emptyState,
  moveKey, setJointSpecified, setTolerance, snapFrame, validate,
} from "../src/state.js";
import { SkeletonDoc, TOLERANCE_PRESETS } from "../src/types.js";

const skeleton: SkeletonDoc = {
  joint_names: ["root", "spine", "ankle_l"],
  parents: [-1, 0, 0],
  rest: [[0, 0.9, 0], [0, 0.3, 0], [0.1, -0.9, 0]],
  important_joints: [0, 1],
  foot_joints: [2],
};

function stateWithKeys(...frames: number[]) {
  let state = emptyState(60);
  for (const f of frames) state = addKey(state, skeleton, f);
  return state;
}

describe("key editing", () => {
  it("adds keys sorted with the root specified and default tolerance", () => {
    const state = stateWithKeys(30, 10);
    expect(state.keys.map((k) => k.frame)).toEqual([10, 30]);
    for (const key of state.keys) {
      expect(key.specified[0]).toBe(true);
      expect(key.tolerance.every((c) => c === TOLERANCE_PRESETS.default)).toBe(true);
      expect(key.features).toEqual(skeleton.rest);
    }
  });

  it("snaps an occupied frame to the nearest free one instead of rejecting", () => {
    const state = stateWithKeys(10);
    expect(snapFrame(state, 10)).toBe(9);
    const added = addKey(state, skeleton, 10);
    expect(added.keys.map((k) => k.frame)).toEqual([9, 10]);
  });

  it("clamps out-of-range drops onto the timeline", () => {
    const state = stateWithKeys();
    expect(snapFrame(state, -5)).toBe(0);
    expect(snapFrame(state, 500)).toBe(59);
  });

  it("moving a key past a neighbour swaps ordering and re-sorts", () => {
    let state = stateWithKeys(10, 30);
    state = moveKey(state, 0, 45); // drag the f=10 key past f=30
    expect(state.keys.map((k) => k.frame)).toEqual([30, 45]);
    expect(state.selectedKey).toBe(1);
  });

  it("deleting all keys disables generation", () => {
    let state = stateWithKeys(5);
    expect(canGenerate(state)).toBe(true);
    state = deleteKey(state, 0);
    expect(canGenerate(state)).toBe(false);
    expect(validate(state).problems[0]).toMatch(/at least one blocking pose/);
  });
});

describe("joint editing", () => {
  it("dragging a joint updates the view plane and marks it specified", () => {
    let state = stateWithKeys(10);
    state = dragJoint(state, 0, 1, "front", [0.25, 0.4]);
    expect(state.keys[0].features[1]).toEqual([0.25, 0.4, 0]);
    expect(state.keys[0].specified[1]).toBe(true);
    state = dragJoint(state, 0, 1, "side", [-0.1, 0.5]);
    expect(state.keys[0].features[1]).toEqual([0.25, 0.5, -0.1]);
  });

  it("unspecifying a joint returns it to the neutral rest value", () => {
    let state = stateWithKeys(10);
    state = dragJoint(state, 0, 2, "front", [0.4, 0.1]);
    state = setJointSpecified(state, skeleton, 0, 2, false);
    expect(state.keys[0].specified[2]).toBe(false);
    expect(state.keys[0].features[2]).toEqual(skeleton.rest[2]);
  });

  it("the root cannot be unspecified", () => {
    let state = stateWithKeys(10);
    state = setJointSpecified(state, skeleton, 0, 0, false);
    expect(state.keys[0].specified[0]).toBe(true);
  });
});

describe("tolerances", () => {
  it("clamps slider values into [0, 1]", () => {
    let state = stateWithKeys(10);
    state = setTolerance(state, 0, 1, 1.7);
    expect(state.keys[0].tolerance[1]).toBe(1);
    state = setTolerance(state, 0, 1, -0.2);
    expect(state.keys[0].tolerance[1]).toBe(0);
  });

  it("presets set every slider of the selected key", () => {
    let state = stateWithKeys(10, 20);
    state = applyPreset(state, "preserve", 0);
    expect(state.keys[0].tolerance.every((c) => c === 0.95)).toBe(true);
    expect(state.keys[1].tolerance.every((c) => c === 0.85)).toBe(true);
    state = applyPreset(state, "free");
    expect(state.keys[1].tolerance.every((c) => c === 0.3)).toBe(true);
  });

  it("default preset is 0.85", () => {
    expect(TOLERANCE_PRESETS.default).toBe(0.85);
    expect(TOLERANCE_PRESETS.preserve).toBe(0.95);
    expect(TOLERANCE_PRESETS.free).toBe(0.3);
  });
});

describe("validation", () => {
  it("accepts a well-formed state", () => {
    const state = stateWithKeys(3, 17, 40);
    expect(validate(state)).toEqual({ ok: true, problems: [] });
  });

  it("reports tolerance range violations", () => {
    const state = stateWithKeys(3);
    state.keys[0].tolerance[1] = 2.0; // forced corruption
    expect(validate(state).problems.join(" ")).toMatch(/tolerance outside/);
  });
});
