/** Thin client for the generation service. The result payload is kept as
 * raw bytes so exporting it is byte-identical to the server's output. */
import { canonicalJson } from "./serialize.js";
import { GenerationRequestDoc, JobDoc, MotionDoc, SkeletonDoc } from "./types.js";

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  async skeleton(): Promise<SkeletonDoc> {
    return this.getJson("/api/skeleton");
  }

  async submitJob(request: GenerationRequestDoc): Promise<string> {
    const response = await fetch(`${this.baseUrl}/api/jobs`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: canonicalJson(request),
    });
    if (!response.ok) {
      throw new Error(`submit failed (${response.status}): ${await response.text()}`);
    }
    const doc = (await response.json()) as { id: string };
    return doc.id;
  }

  async job(id: string): Promise<JobDoc> {
    return this.getJson(`/api/jobs/${id}`);
  }

  async cancel(id: string): Promise<JobDoc> {
    const response = await fetch(`${this.baseUrl}/api/jobs/${id}/cancel`, { method: "POST" });
    if (!response.ok) throw new Error(`cancel failed: ${response.status}`);
    return (await response.json()) as JobDoc;
  }

  /** Raw result bytes plus the parsed document. */
  async result(id: string): Promise<{ bytes: Uint8Array; doc: MotionDoc }> {
    const response = await fetch(`${this.baseUrl}/api/jobs/${id}/result`);
    if (!response.ok) throw new Error(`result not ready: ${response.status}`);
    const bytes = new Uint8Array(await response.arrayBuffer());
    const doc = JSON.parse(new TextDecoder().decode(bytes)) as MotionDoc;
    return { bytes, doc };
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) throw new Error(`${path} failed: ${response.status}`);
    return (await response.json()) as T;
  }
}
