// Thin typed client over the service API.  Every mutation sends the
// last-seen revision as If-Match; 409 surfaces as StaleRevisionError so the
// caller can refetch and retry or revert.

import type { MatchesResponse, PreviewEvent, ProjectDoc, Timeline } from './types.js';

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class StaleRevisionError extends ApiError {}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = '',
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown,
                           revision?: number): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (revision !== undefined) headers['If-Match'] = String(revision);
    const resp = await this.fetchImpl(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let code = 'internal';
      let message = resp.statusText;
      try {
        const err = await resp.json();
        code = err.code ?? code;
        message = err.message ?? message;
      } catch {
        // non-JSON error body; keep defaults
      }
      const cls = resp.status === 409 ? StaleRevisionError : ApiError;
      throw new cls(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  getProject(id: string): Promise<ProjectDoc> {
    return this.request('GET', `/projects/${id}`);
  }

  getTimeline(id: string): Promise<Timeline> {
    return this.request('GET', `/projects/${id}/timeline`);
  }

  getMatches(id: string, segmentId: string, k: number): Promise<MatchesResponse> {
    return this.request('GET', `/projects/${id}/segments/${segmentId}/matches?k=${k}`);
  }

  getPreview(id: string): Promise<{ events: PreviewEvent[] }> {
    return this.request('GET', `/projects/${id}/preview`);
  }

  addAnnotation(id: string, revision: number, kind: 'audio_description' | 'caption',
                segmentId: string, text: string, anchorTime?: number): Promise<ProjectDoc> {
    return this.request('POST', `/projects/${id}/annotations`, {
      kind, segment_id: segmentId, text,
      anchor_time: anchorTime ?? null,
    }, revision);
  }

  dismissIssue(id: string, revision: number, issueId: string): Promise<ProjectDoc> {
    return this.request('POST', `/projects/${id}/issues/${issueId}/dismiss`,
                        undefined, revision);
  }

  addManualIssue(id: string, revision: number, segmentId: string): Promise<ProjectDoc> {
    return this.request('POST', `/projects/${id}/issues`,
                        { segment_id: segmentId }, revision);
  }

  setFilter(id: string, revision: number, tau: number): Promise<ProjectDoc> {
    return this.request('PUT', `/projects/${id}/filter`, { tau }, revision);
  }

  bundleUrl(id: string, relPath: string): string {
    return `${this.base}/projects/${id}/bundle/${relPath}`;
  }
}
