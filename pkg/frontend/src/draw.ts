/** Canvas rendering: orthographic stick figures (front and side views), the
 * timeline strip with key markers and refinement overlays. */
import { RefinementEvent, SkeletonDoc, Vec3 } from "./types.js";

export interface ViewTransform {
  /** pixels per metre */
  scale: number;
  originX: number;
  originY: number;
}

export function worldPositions(features: Vec3[]): Vec3[] {
  const root = features[0];
  return features.map((v, j) =>
    j === 0 ? ([...v] as Vec3) : ([v[0] + root[0], v[1] + root[1], v[2] + root[2]] as Vec3),
  );
}

export function project(view: "front" | "side", world: Vec3): [number, number] {
  return view === "front" ? [world[0], world[1]] : [world[2], world[1]];
}

export function toCanvas(t: ViewTransform, point: [number, number]): [number, number] {
  return [t.originX + point[0] * t.scale, t.originY - point[1] * t.scale];
}

export function fromCanvas(t: ViewTransform, pixel: [number, number]): [number, number] {
  return [(pixel[0] - t.originX) / t.scale, (t.originY - pixel[1]) / t.scale];
}

/** Nearest joint to a canvas position, within a pixel radius; -1 if none. */
export function pickJoint(
  t: ViewTransform,
  view: "front" | "side",
  features: Vec3[],
  pixel: [number, number],
  radiusPx = 12,
): number {
  const world = worldPositions(features);
  let best = -1;
  let bestDist = radiusPx;
  world.forEach((w, j) => {
    const [px, py] = toCanvas(t, project(view, w));
    const d = Math.hypot(px - pixel[0], py - pixel[1]);
    if (d <= bestDist) {
      best = j;
      bestDist = d;
    }
  });
  return best;
}

export function drawGround(ctx: CanvasRenderingContext2D, t: ViewTransform, width: number): void {
  const [, gy] = toCanvas(t, [0, 0]);
  ctx.strokeStyle = "#ccc";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(0, gy);
  ctx.lineTo(width, gy);
  ctx.stroke();
}

export function drawFigure(
  ctx: CanvasRenderingContext2D,
  t: ViewTransform,
  view: "front" | "side",
  skeleton: SkeletonDoc,
  features: Vec3[],
  options: {
    color?: string;
    jointRadius?: number;
    specified?: boolean[];
    selectedJoint?: number | null;
    ghost?: boolean;
  } = {},
): void {
  const world = worldPositions(features);
  const color = options.color ?? "#1f2a44";
  const radius = options.jointRadius ?? 4;
  ctx.save();
  if (options.ghost) ctx.globalAlpha = 0.35;
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  skeleton.parents.forEach((parent, j) => {
    if (parent < 0) return;
    const [x0, y0] = toCanvas(t, project(view, world[parent]));
    const [x1, y1] = toCanvas(t, project(view, world[j]));
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.stroke();
  });
  world.forEach((w, j) => {
    const [x, y] = toCanvas(t, project(view, w));
    const spec = options.specified ? options.specified[j] : true;
    ctx.beginPath();
    ctx.arc(x, y, j === options.selectedJoint ? radius + 2 : radius, 0, Math.PI * 2);
    ctx.fillStyle = spec ? color : "#ffffff";
    ctx.fill();
    ctx.stroke();
  });
  ctx.restore();
}

export interface TimelineLayout {
  x: number;
  y: number;
  width: number;
  height: number;
  frames: number;
}

export function frameToX(layout: TimelineLayout, frame: number): number {
  return layout.x + (frame / Math.max(layout.frames - 1, 1)) * layout.width;
}

export function xToFrame(layout: TimelineLayout, x: number): number {
  const f = ((x - layout.x) / layout.width) * (layout.frames - 1);
  return Math.round(Math.min(layout.frames - 1, Math.max(0, f)));
}

export function drawTimeline(
  ctx: CanvasRenderingContext2D,
  layout: TimelineLayout,
  keyFrames: number[],
  selected: number | null,
  playbackFrame: number,
  markers: RefinementEvent[],
): void {
  ctx.save();
  ctx.fillStyle = "#f4f4f6";
  ctx.fillRect(layout.x, layout.y, layout.width, layout.height);
  ctx.strokeStyle = "#888";
  ctx.strokeRect(layout.x, layout.y, layout.width, layout.height);

  // refinement markers: retiming arrows from the key frame to its match
  const latest = markers[markers.length - 1];
  if (latest) {
    latest.key_frames.forEach((f, i) => {
      const fStar = latest.matched_frames[i];
      const x0 = frameToX(layout, f);
      const x1 = frameToX(layout, fStar);
      const y = layout.y + layout.height * 0.3;
      ctx.strokeStyle = "#3b82f6";
      ctx.beginPath();
      ctx.moveTo(x0, y);
      ctx.lineTo(x1, y);
      ctx.stroke();
      ctx.beginPath();
      const dir = Math.sign(x1 - x0) || 1;
      ctx.moveTo(x1, y);
      ctx.lineTo(x1 - 5 * dir, y - 3);
      ctx.lineTo(x1 - 5 * dir, y + 3);
      ctx.fill();
    });
  }

  keyFrames.forEach((f, i) => {
    const x = frameToX(layout, f);
    ctx.fillStyle = i === selected ? "#e11d48" : "#1f2a44";
    ctx.beginPath();
    ctx.moveTo(x, layout.y + 4);
    ctx.lineTo(x + 5, layout.y + layout.height / 2);
    ctx.lineTo(x, layout.y + layout.height - 4);
    ctx.lineTo(x - 5, layout.y + layout.height / 2);
    ctx.closePath();
    ctx.fill();
  });

  const px = frameToX(layout, playbackFrame);
  ctx.strokeStyle = "#e11d48";
  ctx.beginPath();
  ctx.moveTo(px, layout.y);
  ctx.lineTo(px, layout.y + layout.height);
  ctx.stroke();
  ctx.restore();
}

/** Progress bar with one tick per refinement event (T/N ticks for divisible
 * settings). */
export function drawProgress(
  ctx: CanvasRenderingContext2D,
  layout: TimelineLayout,
  fraction: number,
  markers: RefinementEvent[],
  totalSteps: number,
): void {
  ctx.save();
  ctx.fillStyle = "#e5e7eb";
  ctx.fillRect(layout.x, layout.y, layout.width, layout.height);
  ctx.fillStyle = "#10b981";
  ctx.fillRect(layout.x, layout.y, layout.width * fraction, layout.height);
  for (const marker of markers) {
    const frac = (totalSteps - marker.t + 1) / totalSteps;
    const x = layout.x + layout.width * frac;
    ctx.strokeStyle = "#3b82f6";
    ctx.beginPath();
    ctx.moveTo(x, layout.y);
    ctx.lineTo(x, layout.y + layout.height);
    ctx.stroke();
  }
  ctx.strokeStyle = "#888";
  ctx.strokeRect(layout.x, layout.y, layout.width, layout.height);
  ctx.restore();
}
