/** Server-sent-events parsing and refinement-marker bookkeeping.
 *
 * The wire format is data-only SSE frames: "data: {json}\n\n". The parser
 * is incremental so it can consume arbitrary chunk boundaries from fetch
 * streaming.
 */
import { JobEvent, RefinementEvent, TraceDoc } from "./types.js";

export class SseParser {
  private buffer = "";

  /** Feed a chunk; returns the complete events it finished. */
  push(chunk: string): JobEvent[] {
    this.buffer += chunk;
    const events: JobEvent[] = [];
    let split: number;
    while ((split = this.buffer.indexOf("\n\n")) >= 0) {
      const frame = this.buffer.slice(0, split);
      this.buffer = this.buffer.slice(split + 2);
      const data = frame
        .split("\n")
        .filter((line) => line.startsWith("data: "))
        .map((line) => line.slice("data: ".length))
        .join("\n");
      if (data) {
        events.push(JSON.parse(data) as JobEvent);
      }
    }
    return events;
  }
}

export function isTerminal(event: JobEvent): boolean {
  return event.type === "state" && (event.state === "done" || event.state === "failed");
}

export interface ProgressSummary {
  fraction: number;
  refinementMarkers: RefinementEvent[];
  state: string;
  error?: string;
}

export function summarize(events: JobEvent[]): ProgressSummary {
  const summary: ProgressSummary = { fraction: 0, refinementMarkers: [], state: "queued" };
  for (const event of events) {
    if (event.type === "state") {
      summary.state = event.state;
      if (event.error) summary.error = event.error;
    } else {
      summary.fraction = event.fraction;
      if (event.type === "refinement") summary.refinementMarkers.push(event);
    }
  }
  return summary;
}

/** Offline replay: a stored trace file yields the same overlay markers the
 * live stream would have produced. */
export function markersFromTrace(trace: TraceDoc, keyFrames: number[]): RefinementEvent[] {
  if (trace.format_version !== 1) {
    throw new Error(`unsupported trace format_version ${String(trace.format_version)}`);
  }
  return trace.events.map((e) => ({
    type: "refinement",
    t: e.t,
    fraction: 0,
    matched_frames: [...e.matched_frames],
    key_frames: [...keyFrames],
    refined_keys: e.post_blend.map((pose) => pose.map((v) => [...v] as [number, number, number])),
  }));
}

/** Stream a job's events over fetch; resolves when the stream terminates. */
export async function streamJobEvents(
  baseUrl: string,
  jobId: string,
  onEvent: (event: JobEvent) => void,
): Promise<void> {
  const response = await fetch(`${baseUrl}/api/jobs/${jobId}/events`);
  if (!response.ok || !response.body) {
    throw new Error(`event stream failed: ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  for (;;) {
    const { done, value } = await reader.read();
    if (done) return;
    for (const event of parser.push(decoder.decode(value, { stream: true }))) {
      onEvent(event);
      if (isTerminal(event)) {
        await reader.cancel();
        return;
      }
    }
  }
}
