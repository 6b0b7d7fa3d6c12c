/** Wire formats, mirroring the server's motion/blocking file schemas. */

export type Vec3 = [number, number, number];

export interface SkeletonDoc {
  format_version?: number;
  joint_names: string[];
  parents: number[];
  rest: Vec3[];
  important_joints: number[];
  foot_joints: number[];
}

export interface BlockingPoseDoc {
  frame: number;
  features: Vec3[];
  specified: boolean[];
  tolerance: number[];
}

export interface BlockingDoc {
  format_version: 1;
  timeline_length: number;
  poses: BlockingPoseDoc[];
}

export interface MotionDoc {
  format_version: 1;
  skeleton?: SkeletonDoc;
  fps: number;
  frames: Vec3[][];
}

export interface StrategyDoc {
  name: string;
  params: Record<string, number | boolean>;
}

export interface RefinementDoc {
  cadence?: number;
  search_radius?: number;
  apply_ground_fix?: boolean;
  default_tolerance?: number;
}

export interface GenerationRequestDoc {
  blocking: BlockingDoc;
  strategy: StrategyDoc;
  seed: number;
  refinement?: RefinementDoc;
}

export interface JobDoc {
  id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: { t: number | null; fraction: number; refinement_events: number };
  error: string | null;
}

export interface ProgressEvent {
  type: "progress";
  t: number;
  fraction: number;
}

export interface RefinementEvent {
  type: "refinement";
  t: number;
  fraction: number;
  matched_frames: number[];
  key_frames: number[];
  refined_keys: Vec3[][];
}

export interface StateEvent {
  type: "state";
  state: JobDoc["state"];
  error?: string;
}

export type JobEvent = ProgressEvent | RefinementEvent | StateEvent;

/** Trace file written by the generator (offline replay). */
export interface TraceDoc {
  format_version: 1;
  events: {
    t: number;
    matched_frames: number[];
    pre_blend: Vec3[][];
    post_blend: Vec3[][];
    condition: Vec3[][];
  }[];
}

/** Tolerance slider presets surfaced by the editor. */
export const TOLERANCE_PRESETS = {
  preserve: 0.95,
  default: 0.85,
  free: 0.3,
} as const;

export type PresetName = keyof typeof TOLERANCE_PRESETS;
