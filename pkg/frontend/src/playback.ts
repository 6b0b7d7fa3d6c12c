/** Synchronized playback of the input blocking lane against the generated
 * motion lane. The input lane shows the nearest blocking key's pose held
 * until the next key (blocking-style stepped preview). */
import { EditorKey } from "./state.js";
import { Vec3 } from "./types.js";

export interface PlaybackClock {
  frame: number;
  playing: boolean;
  fps: number;
  frames: number;
}

export function makeClock(frames: number, fps = 20): PlaybackClock {
  return { frame: 0, playing: false, fps, frames };
}

export function tick(clock: PlaybackClock, dtSeconds: number): PlaybackClock {
  if (!clock.playing || clock.frames < 1) return clock;
  const advanced = clock.frame + dtSeconds * clock.fps;
  return { ...clock, frame: advanced % clock.frames };
}

/** The key pose shown on the input lane at a given frame: the latest key at
 * or before the frame, else the first key. */
export function blockingPoseAt(keys: EditorKey[], frame: number): EditorKey | null {
  if (keys.length === 0) return null;
  let current = keys[0];
  for (const key of keys) {
    if (key.frame <= frame) current = key;
    else break;
  }
  return current;
}

export function motionPoseAt(frames: Vec3[][], frame: number): Vec3[] {
  const index = Math.min(frames.length - 1, Math.max(0, Math.round(frame)));
  return frames[index];
}
