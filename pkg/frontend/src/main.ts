/** App assembly: editor canvases, tolerance panel, job launch, progress
 * stream, and the synchronized input/output playback lanes. */
import { ApiClient } from "./api.js";
import {
  drawFigure, drawGround, drawProgress, drawTimeline, fromCanvas,
  pickJoint, TimelineLayout, ViewTransform, xToFrame,
} from "./draw.js";
import { blockingPoseAt, makeClock, motionPoseAt, tick } from "./playback.js";
import { buildRequest, exportBlocking, importBlocking } from "./serialize.js";
import {
  addKey, applyPreset, canGenerate, deleteKey, dragJoint, EditorState,
  emptyState, moveKey, setJointSpecified, setTolerance, validate,
} from "./state.js";
import { isTerminal, markersFromTrace, streamJobEvents, summarize } from "./sse.js";
import {
  JobEvent, MotionDoc, PresetName, RefinementEvent, SkeletonDoc, TraceDoc,
} from "./types.js";

const api = new ApiClient("");

interface AppState {
  editor: EditorState;
  skeleton: SkeletonDoc | null;
  events: JobEvent[];
  result: { bytes: Uint8Array; doc: MotionDoc } | null;
  trace: TraceDoc | null;
  busy: boolean;
  totalSteps: number;
  statusText: string;
}

const app: AppState = {
  editor: emptyState(60),
  skeleton: null,
  events: [],
  result: null,
  trace: null,
  busy: false,
  totalSteps: 1000,
  statusText: "connecting to service...",
};

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

const frontCanvas = () => $("view-front") as HTMLCanvasElement;
const sideCanvas = () => $("view-side") as HTMLCanvasElement;
const outputCanvas = () => $("view-output") as HTMLCanvasElement;
const timelineCanvas = () => $("timeline") as HTMLCanvasElement;
const progressCanvas = () => $("progress") as HTMLCanvasElement;

const viewTransform = (canvas: HTMLCanvasElement): ViewTransform => ({
  scale: 120,
  originX: canvas.width / 2,
  originY: canvas.height - 30,
});

const timelineLayout = (): TimelineLayout => ({
  x: 10, y: 4, width: timelineCanvas().width - 20, height: 32,
  frames: app.editor.timelineLength,
});

let clock = makeClock(60);

function refinementMarkers(): RefinementEvent[] {
  const live = summarize(app.events).refinementMarkers;
  if (live.length > 0 || !app.trace) return live;
  return markersFromTrace(app.trace, app.editor.keys.map((k) => k.frame));
}

function redraw(): void {
  if (!app.skeleton) return;
  const markers = refinementMarkers();

  for (const [canvas, view] of [[frontCanvas(), "front"], [sideCanvas(), "side"]] as const) {
    const ctx = canvas.getContext("2d")!;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    drawGround(ctx, viewTransform(canvas), canvas.width);
    const key = app.editor.selectedKey !== null
      ? app.editor.keys[app.editor.selectedKey]
      : blockingPoseAt(app.editor.keys, app.editor.playbackFrame);
    if (key) {
      const latest = markers[markers.length - 1];
      if (latest) {
        const idx = app.editor.keys.findIndex((k) => k === key);
        if (idx >= 0 && latest.refined_keys[idx]) {
          drawFigure(ctx, viewTransform(canvas), view, app.skeleton,
                     latest.refined_keys[idx], { color: "#3b82f6", ghost: true });
        }
      }
      drawFigure(ctx, viewTransform(canvas), view, app.skeleton, key.features, {
        specified: key.specified,
        selectedJoint: app.editor.selectedJoint,
      });
    }
  }

  const outCtx = outputCanvas().getContext("2d")!;
  outCtx.clearRect(0, 0, outputCanvas().width, outputCanvas().height);
  drawGround(outCtx, viewTransform(outputCanvas()), outputCanvas().width);
  if (app.result) {
    const pose = motionPoseAt(app.result.doc.frames, clock.frame);
    drawFigure(outCtx, viewTransform(outputCanvas()), "side", app.skeleton, pose,
               { color: "#10b981" });
  }

  drawTimeline(timelineCanvas().getContext("2d")!, timelineLayout(),
               app.editor.keys.map((k) => k.frame), app.editor.selectedKey,
               Math.round(clock.frame), markers);
  drawProgress(progressCanvas().getContext("2d")!,
               { x: 10, y: 4, width: progressCanvas().width - 20, height: 14, frames: 0 },
               summarize(app.events).fraction, markers, app.totalSteps);

  const check = validate(app.editor);
  const button = $("btn-generate") as HTMLButtonElement;
  button.disabled = app.busy || !check.ok;
  button.title = check.ok ? "run motion detailing" : check.problems.join("; ");
  $("status").textContent = app.statusText;
  renderTolerancePanel();
}

function renderTolerancePanel(): void {
  const panel = $("tolerances");
  panel.innerHTML = "";
  const keyIndex = app.editor.selectedKey;
  if (keyIndex === null || !app.skeleton) {
    panel.textContent = "select a key to edit per-joint tolerances";
    return;
  }
  const key = app.editor.keys[keyIndex];
  app.skeleton.joint_names.forEach((name, j) => {
    const row = document.createElement("div");
    row.className = "tol-row";
    const spec = document.createElement("input");
    spec.type = "checkbox";
    spec.checked = key.specified[j];
    spec.disabled = j === 0;
    spec.onchange = () => {
      app.editor = setJointSpecified(app.editor, app.skeleton!, keyIndex, j, spec.checked);
      redraw();
    };
    const label = document.createElement("span");
    label.textContent = name;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(key.tolerance[j]);
    slider.oninput = () => {
      app.editor = setTolerance(app.editor, keyIndex, j, Number(slider.value));
      redraw();
    };
    const value = document.createElement("span");
    value.textContent = key.tolerance[j].toFixed(2);
    row.append(spec, label, slider, value);
    panel.append(row);
  });
}

function bindViewEditing(canvas: HTMLCanvasElement, view: "front" | "side"): void {
  let dragging = -1;
  canvas.addEventListener("mousedown", (e) => {
    if (app.editor.selectedKey === null) return;
    const key = app.editor.keys[app.editor.selectedKey];
    dragging = pickJoint(viewTransform(canvas), view, key.features,
                         [e.offsetX, e.offsetY]);
    if (dragging >= 0) {
      app.editor = { ...app.editor, selectedJoint: dragging };
      redraw();
    }
  });
  canvas.addEventListener("mousemove", (e) => {
    if (dragging < 0 || app.editor.selectedKey === null) return;
    const world = fromCanvas(viewTransform(canvas), [e.offsetX, e.offsetY]);
    const key = app.editor.keys[app.editor.selectedKey];
    const local: [number, number] = dragging === 0 ? world : [
      world[0] - (view === "front" ? key.features[0][0] : key.features[0][2]),
      world[1] - key.features[0][1],
    ];
    app.editor = dragJoint(app.editor, app.editor.selectedKey, dragging, view, local);
    redraw();
  });
  window.addEventListener("mouseup", () => { dragging = -1; });
}

function bindTimeline(): void {
  const canvas = timelineCanvas();
  let draggingKey = -1;
  canvas.addEventListener("mousedown", (e) => {
    const frame = xToFrame(timelineLayout(), e.offsetX);
    const hit = app.editor.keys.findIndex((k) => Math.abs(k.frame - frame) <= 1);
    if (e.shiftKey || hit < 0) {
      if (app.skeleton) {
        app.editor = addKey(app.editor, app.skeleton, frame);
      }
    } else {
      draggingKey = hit;
      app.editor = { ...app.editor, selectedKey: hit };
    }
    redraw();
  });
  canvas.addEventListener("mousemove", (e) => {
    if (draggingKey < 0) return;
    const frame = xToFrame(timelineLayout(), e.offsetX);
    app.editor = moveKey(app.editor, draggingKey, frame);
    draggingKey = app.editor.selectedKey ?? draggingKey;
    redraw();
  });
  window.addEventListener("mouseup", () => { draggingKey = -1; });
}

async function generate(): Promise<void> {
  if (!canGenerate(app.editor) || app.busy) return;
  app.busy = true;
  app.events = [];
  app.result = null;
  app.trace = null;
  app.statusText = "submitting job...";
  redraw();
  try {
    const seed = Number(($("seed") as HTMLInputElement).value) || 0;
    const cadence = Number(($("cadence") as HTMLInputElement).value) || 100;
    const request = buildRequest(app.editor, seed,
                                 { name: "detailing", params: {} },
                                 { cadence });
    const jobId = await api.submitJob(request);
    app.editor = { ...app.editor, lastJobId: jobId };
    app.statusText = `job ${jobId} running`;
    await streamJobEvents(api.baseUrl, jobId, (event) => {
      app.events.push(event);
      if (isTerminal(event)) return;
      redraw();
    });
    const summary = summarize(app.events);
    if (summary.state === "done") {
      app.result = await api.result(jobId);
      clock = makeClock(app.result.doc.frames.length, app.result.doc.fps);
      clock.playing = true;
      app.statusText =
        `done: ${summary.refinementMarkers.length} refinement events; playing result`;
    } else {
      app.statusText = `job failed: ${summary.error ?? "unknown error"}`;
    }
  } catch (err) {
    app.statusText = `error: ${String(err)}`;
  } finally {
    app.busy = false;
    redraw();
  }
}

function bindControls(): void {
  $("btn-generate").addEventListener("click", () => { void generate(); });
  $("btn-add-key").addEventListener("click", () => {
    if (app.skeleton) {
      app.editor = addKey(app.editor, app.skeleton, Math.round(clock.frame));
      redraw();
    }
  });
  $("btn-delete-key").addEventListener("click", () => {
    if (app.editor.selectedKey !== null) {
      app.editor = deleteKey(app.editor, app.editor.selectedKey);
      redraw();
    }
  });
  for (const preset of ["preserve", "default", "free"] as PresetName[]) {
    $(`btn-preset-${preset}`).addEventListener("click", () => {
      app.editor = applyPreset(app.editor, preset, app.editor.selectedKey);
      redraw();
    });
  }
  $("btn-play").addEventListener("click", () => { clock.playing = !clock.playing; });
  $("btn-export").addEventListener("click", () => {
    download("blocking.json", new TextEncoder().encode(exportBlocking(app.editor)));
  });
  $("btn-export-motion").addEventListener("click", () => {
    if (app.result) download("motion.json", app.result.bytes);
  });
  ($("file-import") as HTMLInputElement).addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) return;
    app.editor = importBlocking(await file.text());
    clock = makeClock(app.editor.timelineLength);
    redraw();
  });
  ($("file-trace") as HTMLInputElement).addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) return;
    app.trace = JSON.parse(await file.text()) as TraceDoc;
    app.statusText = `loaded trace with ${app.trace.events.length} events`;
    redraw();
  });
}

function download(name: string, bytes: Uint8Array): void {
  const blob = new Blob([bytes as BlobPart], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

function animate(last: number): void {
  requestAnimationFrame((now) => {
    clock = tick(clock, (now - last) / 1000);
    app.editor = { ...app.editor, playbackFrame: Math.round(clock.frame) };
    redraw();
    animate(now);
  });
}

async function boot(): Promise<void> {
  try {
    app.skeleton = await api.skeleton();
    app.statusText = "ready: shift-click the timeline to add blocking poses";
  } catch (err) {
    app.statusText = `service unreachable: ${String(err)}`;
  }
  bindViewEditing(frontCanvas(), "front");
  bindViewEditing(sideCanvas(), "side");
  bindTimeline();
  bindControls();
  redraw();
  animate(performance.now());
}

void boot();
