// Pure view models.  No scoring or color math happens here: every color,
// score, status, and match list is taken verbatim from the API payloads, so
// the DOM layer is a dumb projection of these models.

import type { Annotation, Issue, Timeline, TimelineBar } from './types.js';

export interface BarView {
  segmentId: string;
  issueId: string | null;
  track: 'visual' | 'audio';
  leftPct: number;
  widthPct: number;
  cssColor: string;
  color: [number, number, number];
  status: string | null;
  score: number;
  label: string;
}

export function cssColor(rgb: [number, number, number]): string {
  return `rgb(${rgb[0]}, ${rgb[1]}, ${rgb[2]})`;
}

function barView(bar: TimelineBar, track: 'visual' | 'audio', duration: number): BarView {
  const kind = bar.kind ? `${bar.kind} ` : '';
  return {
    segmentId: bar.segment_id,
    issueId: bar.issue_id,
    track,
    leftPct: (bar.start / duration) * 100,
    widthPct: ((bar.end - bar.start) / duration) * 100,
    cssColor: cssColor(bar.color),
    color: bar.color,
    status: bar.status,
    score: bar.score,
    label: `${kind}${bar.segment_id} ${fmtTime(bar.start)}-${fmtTime(bar.end)}` +
      (bar.status ? ` (${bar.status})` : ''),
  };
}

export function timelineViews(timeline: Timeline): { visual: BarView[]; audio: BarView[] } {
  return {
    visual: timeline.visual.map((b) => barView(b, 'visual', timeline.duration)),
    audio: timeline.audio.map((b) => barView(b, 'audio', timeline.duration)),
  };
}

export function fmtTime(t: number): string {
  const m = Math.floor(t / 60);
  const s = t - m * 60;
  return `${String(m).padStart(2, '0')}:${s.toFixed(1).padStart(4, '0')}`;
}

// --- description / caption panes -------------------------------------------

export interface PaneEntry {
  segmentId: string;
  issueId: string | null;
  sidebarColor: string;
  heightPct: number; // proportional to segment length within the pane
  status: string | null;
  editableText: string;
  transcript: string;
  showSave: boolean;
  showEdit: boolean;
  showDismiss: boolean;
}

function entryFor(bar: TimelineBar, paneSeconds: number,
                  annotations: Annotation[]): PaneEntry {
  const existing = annotations.filter((a) => a.segment_id === bar.segment_id);
  const text = existing.length ? existing[existing.length - 1].text : '';
  const status = bar.status;
  return {
    segmentId: bar.segment_id,
    issueId: bar.issue_id,
    sidebarColor: cssColor(bar.color),
    heightPct: ((bar.end - bar.start) / paneSeconds) * 100,
    status,
    editableText: text,
    transcript: bar.transcript ?? '',
    showSave: status !== 'addressed' && status !== 'dismissed',
    showEdit: status === 'addressed',
    showDismiss: status !== 'dismissed' && status !== 'addressed',
  };
}

// Visual segments currently surfaced as issues, tallest-first ordering kept
// by time; heights are proportional to segment length.
export function descriptionPane(timeline: Timeline, issues: Issue[],
                                annotations: Annotation[]): PaneEntry[] {
  const issueIds = new Set(issues.filter((i) => i.modality === 'visual')
                                 .map((i) => i.segment_id));
  const bars = timeline.visual.filter((b) => issueIds.has(b.segment_id));
  const total = bars.reduce((acc, b) => acc + (b.end - b.start), 0) || 1;
  return bars.map((b) => entryFor(
    b, total, annotations.filter((a) => a.kind === 'audio_description')));
}

// Every audio segment appears in the captions pane; speech rows carry their
// transcript, non-speech rows are editable caption slots.
export function captionsPane(timeline: Timeline,
                             annotations: Annotation[]): PaneEntry[] {
  const total = timeline.audio.reduce((acc, b) => acc + (b.end - b.start), 0) || 1;
  return timeline.audio.map((b) => entryFor(
    b, total, annotations.filter((a) => a.kind === 'caption')));
}

// --- hover correspondence ------------------------------------------------------

export const FADED_OPACITY = 0.25;

// Opposite-track opacity map while hovering a segment: matched bars at full
// opacity, everything else faded; empty input means no overlay at all.
export function matchOverlay(oppositeBars: TimelineBar[],
                             matches: [string, number][]): Map<string, number> {
  const overlay = new Map<string, number>();
  if (!matches.length) return overlay;
  const matched = new Set(matches.map(([id]) => id));
  for (const bar of oppositeBars) {
    overlay.set(bar.segment_id, matched.has(bar.segment_id) ? 1.0 : FADED_OPACITY);
  }
  return overlay;
}

// --- slider -----------------------------------------------------------------

export const SLIDER_STOPS = [
  { tau: 0.2, label: 'critical only' },
  { tau: 0.35, label: 'recommended' },
  { tau: 0.5, label: 'thorough' },
  { tau: 0.75, label: 'everything' },
];

export function issueSegments(issues: Issue[], modality: 'visual' | 'audio'): string[] {
  return issues.filter((i) => i.modality === modality).map((i) => i.segment_id).sort();
}
