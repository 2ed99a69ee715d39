// Payload shapes mirrored from the service API (avasym.service.schemas).

export type Modality = 'visual' | 'audio';
export type IssueStatus =
  | 'open'
  | 'addressed'
  | 'dismissed'
  | 'suppressed_presenter'
  | 'suppressed_silence';

export interface TimelineBar {
  segment_id: string;
  start: number;
  end: number;
  score: number;
  status: IssueStatus | null;
  issue_id: string | null;
  color: [number, number, number];
  kind?: string | null;
  transcript?: string | null;
}

export interface Timeline {
  project_id: string;
  revision: number;
  duration: number;
  tau: number;
  visual: TimelineBar[];
  audio: TimelineBar[];
}

export interface Issue {
  issue_id: string;
  segment_id: string;
  modality: Modality;
  score: number;
  status: IssueStatus;
  created_from: 'auto' | 'manual';
}

export interface Annotation {
  entry_id: string;
  kind: 'audio_description' | 'caption';
  segment_id: string;
  anchor_time: number;
  text: string;
}

export interface ProjectDoc {
  project_id: string;
  revision: number;
  duration: number;
  issues: Issue[];
  annotations: Annotation[];
  filter_config: { tau: number; th_presenter: number; th_silence: number };
  segments: {
    visual: { id: string; start: number; end: number }[];
    audio: { id: string; start: number; end: number; kind: string; transcript: string }[];
  };
}

export interface PreviewEvent {
  at: number;
  action: 'pause_video' | 'speak' | 'resume_video' | 'show_caption';
  text?: string | null;
  until?: number | null;
}

export interface MatchesResponse {
  segment_id: string;
  matches: [string, number][];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
