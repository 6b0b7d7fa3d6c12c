/** Editor state and edit operations.
 *
 * All edits are pure: they take a state and return a new one, keeping the
 * server-side blocking invariants true at every step (root specified,
 * strictly increasing unique frames, tolerances in [0, 1]). Invalid frame
 * positions are snapped to the nearest free frame, never rejected.
 */
import { BlockingDoc, PresetName, SkeletonDoc, TOLERANCE_PRESETS, Vec3 } from "./types.js";

export interface EditorKey {
  frame: number;
  features: Vec3[];
  specified: boolean[];
  tolerance: number[];
}

export interface EditorState {
  timelineLength: number;
  keys: EditorKey[];
  selectedKey: number | null;
  selectedJoint: number | null;
  lastJobId: string | null;
  playbackFrame: number;
}

export function emptyState(timelineLength = 60): EditorState {
  return {
    timelineLength,
    keys: [],
    selectedKey: null,
    selectedJoint: null,
    lastJobId: null,
    playbackFrame: 0,
  };
}

const clamp = (v: number, lo: number, hi: number) => Math.min(hi, Math.max(lo, v));

function sortKeys(keys: EditorKey[]): EditorKey[] {
  return [...keys].sort((a, b) => a.frame - b.frame);
}

/** Snap a requested frame to the nearest free integer frame on the timeline. */
export function snapFrame(state: EditorState, wanted: number, ignoreIndex = -1): number {
  const target = clamp(Math.round(wanted), 0, state.timelineLength - 1);
  const used = new Set(state.keys.filter((_, i) => i !== ignoreIndex).map((k) => k.frame));
  if (!used.has(target)) return target;
  for (let delta = 1; delta < state.timelineLength; delta++) {
    for (const candidate of [target - delta, target + delta]) {
      if (candidate >= 0 && candidate < state.timelineLength && !used.has(candidate)) {
        return candidate;
      }
    }
  }
  return target; // timeline full; caller will refuse the add
}

function neutralKey(skeleton: SkeletonDoc, frame: number): EditorKey {
  const J = skeleton.joint_names.length;
  return {
    frame,
    features: skeleton.rest.map((v) => [...v] as Vec3),
    specified: Array.from({ length: J }, (_, j) => j === 0),
    tolerance: Array.from({ length: J }, () => TOLERANCE_PRESETS.default),
  };
}

export function addKey(state: EditorState, skeleton: SkeletonDoc, wanted: number): EditorState {
  if (state.keys.length >= state.timelineLength) return state;
  const frame = snapFrame(state, wanted);
  const keys = sortKeys([...state.keys, neutralKey(skeleton, frame)]);
  return { ...state, keys, selectedKey: keys.findIndex((k) => k.frame === frame) };
}

export function deleteKey(state: EditorState, index: number): EditorState {
  if (index < 0 || index >= state.keys.length) return state;
  const keys = state.keys.filter((_, i) => i !== index);
  return { ...state, keys, selectedKey: null, selectedJoint: null };
}

/** Move a key; passing a neighbour swaps ordering (the list re-sorts). */
export function moveKey(state: EditorState, index: number, wanted: number): EditorState {
  if (index < 0 || index >= state.keys.length) return state;
  const frame = snapFrame(state, wanted, index);
  const moved = { ...state.keys[index], frame };
  const keys = sortKeys(state.keys.map((k, i) => (i === index ? moved : k)));
  return { ...state, keys, selectedKey: keys.indexOf(moved) };
}

/** Drag one joint of a key in one of the two orthographic views.
 * Front view edits (x, y); side view edits (z, y). Dragging a joint marks
 * it specified. The root stores world position, other joints root-relative.
 */
export function dragJoint(
  state: EditorState,
  keyIndex: number,
  joint: number,
  view: "front" | "side",
  position: [number, number],
): EditorState {
  const key = state.keys[keyIndex];
  if (!key || joint < 0 || joint >= key.features.length) return state;
  const features = key.features.map((v) => [...v] as Vec3);
  const [h, v] = position;
  if (view === "front") {
    features[joint][0] = h;
    features[joint][1] = v;
  } else {
    features[joint][2] = h;
    features[joint][1] = v;
  }
  const specified = [...key.specified];
  specified[joint] = true;
  specified[0] = true;
  const keys = state.keys.map((k, i) =>
    i === keyIndex ? { ...k, features, specified } : k,
  );
  return { ...state, keys, selectedKey: keyIndex, selectedJoint: joint };
}

export function setJointSpecified(
  state: EditorState,
  skeleton: SkeletonDoc,
  keyIndex: number,
  joint: number,
  specified: boolean,
): EditorState {
  const key = state.keys[keyIndex];
  if (!key || joint === 0) return state; // the root is always specified
  const spec = [...key.specified];
  spec[joint] = specified;
  const features = key.features.map((v) => [...v] as Vec3);
  if (!specified) {
    features[joint] = [...skeleton.rest[joint]] as Vec3; // back to neutral
  }
  const keys = state.keys.map((k, i) =>
    i === keyIndex ? { ...k, specified: spec, features } : k,
  );
  return { ...state, keys };
}

export function setTolerance(
  state: EditorState,
  keyIndex: number,
  joint: number,
  value: number,
): EditorState {
  const key = state.keys[keyIndex];
  if (!key) return state;
  const tolerance = [...key.tolerance];
  tolerance[joint] = clamp(value, 0, 1);
  const keys = state.keys.map((k, i) => (i === keyIndex ? { ...k, tolerance } : k));
  return { ...state, keys };
}

/** Apply a preset to every joint of a key (or to every key when index is null). */
export function applyPreset(
  state: EditorState,
  preset: PresetName,
  keyIndex: number | null = null,
): EditorState {
  const value = TOLERANCE_PRESETS[preset];
  const keys = state.keys.map((k, i) => {
    if (keyIndex !== null && i !== keyIndex) return k;
    return { ...k, tolerance: k.tolerance.map(() => value) };
  });
  return { ...state, keys };
}

export interface ValidationResult {
  ok: boolean;
  problems: string[];
}

/** Mirrors the server-side blocking invariants. */
export function validate(state: EditorState): ValidationResult {
  const problems: string[] = [];
  if (state.keys.length === 0) {
    problems.push("add at least one blocking pose to generate");
  }
  const frames = state.keys.map((k) => k.frame);
  for (let i = 1; i < frames.length; i++) {
    if (frames[i] <= frames[i - 1]) {
      problems.push(`key frames must be strictly increasing (${frames[i - 1]} vs ${frames[i]})`);
    }
  }
  for (const [i, key] of state.keys.entries()) {
    if (key.frame < 0 || key.frame >= state.timelineLength) {
      problems.push(`key ${i} is outside the timeline`);
    }
    if (!key.specified[0]) problems.push(`key ${i} must specify the root`);
    if (key.tolerance.some((c) => c < 0 || c > 1 || !Number.isFinite(c))) {
      problems.push(`key ${i} has a tolerance outside [0, 1]`);
    }
    if (key.features.some((v) => v.some((x) => !Number.isFinite(x)))) {
      problems.push(`key ${i} has a non-finite feature`);
    }
  }
  return { ok: problems.length === 0, problems };
}

export function canGenerate(state: EditorState): boolean {
  return validate(state).ok;
}

export function toBlockingDoc(state: EditorState): BlockingDoc {
  return {
    format_version: 1,
    timeline_length: state.timelineLength,
    poses: state.keys.map((k) => ({
      frame: k.frame,
      features: k.features.map((v) => [...v] as Vec3),
      specified: [...k.specified],
      tolerance: [...k.tolerance],
    })),
  };
}

export function fromBlockingDoc(doc: BlockingDoc): EditorState {
  if (doc.format_version !== 1) {
    throw new Error(`unsupported blocking format_version ${String(doc.format_version)}`);
  }
  return {
    timelineLength: doc.timeline_length,
    keys: sortKeys(
      doc.poses.map((p) => ({
        frame: p.frame,
        features: p.features.map((v) => [...v] as Vec3),
        specified: [...p.specified],
        tolerance: [...p.tolerance],
      })),
    ),
    selectedKey: null,
    selectedJoint: null,
    lastJobId: null,
    playbackFrame: 0,
  };
}
