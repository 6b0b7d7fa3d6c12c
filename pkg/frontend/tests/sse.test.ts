import { describe, expect, it } from "vitest";

import { isTerminal, markersFromTrace, SseParser, summarize } from "../src/sse.js";
import { JobEvent, TraceDoc } from "../src/types.js";

function frame(event: object): string {
  return `data: ${JSON.stringify(event)}\n\n`;
}

describe("SSE parsing", () => {
  it("parses complete frames", () => {
    const parser = new SseParser();
    const events = parser.push(
      frame({ type: "state", state: "running" }) +
      frame({ type: "progress", t: 950, fraction: 0.05 }));
    expect(events).toHaveLength(2);
    expect(events[0]).toEqual({ type: "state", state: "running" });
  });

  it("handles arbitrary chunk boundaries", () => {
    const parser = new SseParser();
    const whole = frame({ type: "progress", t: 100, fraction: 0.9 });
    const events = [
      ...parser.push(whole.slice(0, 7)),
      ...parser.push(whole.slice(7, 19)),
      ...parser.push(whole.slice(19)),
    ];
    expect(events).toEqual([{ type: "progress", t: 100, fraction: 0.9 }]);
  });

  it("flags terminal states", () => {
    expect(isTerminal({ type: "state", state: "done" })).toBe(true);
    expect(isTerminal({ type: "state", state: "failed" })).toBe(true);
    expect(isTerminal({ type: "state", state: "running" })).toBe(false);
    expect(isTerminal({ type: "progress", t: 1, fraction: 1 })).toBe(false);
  });
});

describe("progress summary", () => {
  it("counts refinement markers: T/N for divisible settings", () => {
    const total = 1000, cadence = 100;
    const events: JobEvent[] = [{ type: "state", state: "running" }];
    for (let t = total; t >= 1; t--) {
      if (t % cadence === 0) {
        events.push({
          type: "refinement", t, fraction: (total - t + 1) / total,
          matched_frames: [12], key_frames: [10], refined_keys: [[[0, 0, 0]]],
        });
      }
    }
    events.push({ type: "state", state: "done" });
    const summary = summarize(events);
    expect(summary.refinementMarkers).toHaveLength(total / cadence);
    expect(summary.refinementMarkers.map((m) => m.t))
      .toEqual([1000, 900, 800, 700, 600, 500, 400, 300, 200, 100]);
    expect(summary.state).toBe("done");
  });

  it("keeps the latest fraction and failure reason", () => {
    const summary = summarize([
      { type: "progress", t: 500, fraction: 0.5 },
      { type: "state", state: "failed", error: "cancelled" },
    ]);
    expect(summary.fraction).toBe(0.5);
    expect(summary.error).toBe("cancelled");
  });
});

describe("offline trace replay", () => {
  it("reproduces the same markers a live stream would produce", () => {
    const trace: TraceDoc = {
      format_version: 1,
      events: [
        { t: 200, matched_frames: [8], pre_blend: [[[0, 0, 0]]],
          post_blend: [[[0.5, 0, 0]]], condition: [[[0, 0, 0]]] },
        { t: 100, matched_frames: [11], pre_blend: [[[0.5, 0, 0]]],
          post_blend: [[[0.75, 0, 0]]], condition: [[[0, 0, 0]]] },
      ],
    };
    const markers = markersFromTrace(trace, [10]);
    expect(markers).toHaveLength(2);
    expect(markers[0].matched_frames).toEqual([8]);
    expect(markers[0].key_frames).toEqual([10]);
    expect(markers[1].refined_keys).toEqual([[[0.75, 0, 0]]]);
  });

  it("rejects unknown trace versions", () => {
    expect(() => markersFromTrace({ format_version: 3, events: [] } as unknown as TraceDoc, []))
      .toThrow(/format_version/);
  });
});
