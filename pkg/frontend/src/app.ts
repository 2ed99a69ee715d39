// Application state and mutation flows, kept DOM-free so the contract tests
// can drive them headlessly.  Every mutation carries the last-seen revision;
// on a stale-revision conflict the state refetches and the caller reverts.

import { ApiClient, StaleRevisionError } from './api.js';
import type { ProjectDoc, Timeline } from './types.js';

export interface AppSnapshot {
  project: ProjectDoc;
  timeline: Timeline;
}

export class App {
  project!: ProjectDoc;
  timeline!: Timeline;
  onChange: (snap: AppSnapshot) => void = () => {};
  onError: (message: string) => void = () => {};

  constructor(private api: ApiClient, private projectId: string) {}

  get revision(): number {
    return this.project.revision;
  }

  async load(): Promise<void> {
    this.project = await this.api.getProject(this.projectId);
    this.timeline = await this.api.getTimeline(this.projectId);
    this.onChange({ project: this.project, timeline: this.timeline });
  }

  private async applyMutation(mutate: () => Promise<ProjectDoc>): Promise<boolean> {
    try {
      this.project = await mutate();
      this.timeline = await this.api.getTimeline(this.projectId);
      this.onChange({ project: this.project, timeline: this.timeline });
      return true;
    } catch (err) {
      if (err instanceof StaleRevisionError) {
        await this.load(); // someone else moved the project; resync and revert
        this.onError('project changed elsewhere; reloaded latest state');
        return false;
      }
      this.onError(err instanceof Error ? err.message : String(err));
      return false;
    }
  }

  saveAnnotation(kind: 'audio_description' | 'caption', segmentId: string,
                 text: string, anchorTime?: number): Promise<boolean> {
    return this.applyMutation(() =>
      this.api.addAnnotation(this.projectId, this.revision, kind, segmentId,
                             text, anchorTime));
  }

  dismiss(issueId: string): Promise<boolean> {
    return this.applyMutation(() =>
      this.api.dismissIssue(this.projectId, this.revision, issueId));
  }

  addManualIssue(segmentId: string): Promise<boolean> {
    return this.applyMutation(() =>
      this.api.addManualIssue(this.projectId, this.revision, segmentId));
  }

  setTau(tau: number): Promise<boolean> {
    return this.applyMutation(() =>
      this.api.setFilter(this.projectId, this.revision, tau));
  }

  // hover correspondence; resolves to [] on any failure (silent fallback)
  async matchesFor(segmentId: string, k = 5): Promise<[string, number][]> {
    try {
      const resp = await this.api.getMatches(this.projectId, segmentId, k);
      return resp.matches;
    } catch {
      return [];
    }
  }
}
