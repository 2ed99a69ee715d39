// Accessible-video preview: walks the server's event schedule, pausing the
// video while each description is spoken and overlaying captions over their
// spans.  The video and speech back ends are injected so the controller runs
// identically under the browser (Web Speech API) and under tests.

import type { PreviewEvent } from './types.js';

export interface VideoDriver {
  currentTime(): number;
  pause(): void;
  play(): void;
  onTimeUpdate(handler: (t: number) => void): void;
}

export interface SpeechDriver {
  available(): boolean;
  // resolves when the utterance finishes
  speak(text: string): Promise<void>;
}

export interface CaptionSink {
  show(text: string): void;
  clear(): void;
}

export interface ModalSink {
  // fallback display when speech synthesis is unavailable
  show(text: string, durationMs: number): Promise<void>;
}

export const FALLBACK_WORDS_PER_MINUTE = 175;

export function fallbackDurationMs(text: string): number {
  const words = text.split(/\s+/).filter(Boolean).length || 1;
  return (words / FALLBACK_WORDS_PER_MINUTE) * 60_000;
}

interface PauseGroup {
  at: number;
  texts: string[];
}

// Collapse the flat event list into pause groups and caption spans.
export function groupSchedule(events: PreviewEvent[]): {
  pauses: PauseGroup[];
  captions: { at: number; until: number; text: string }[];
} {
  const pauses: PauseGroup[] = [];
  const captions: { at: number; until: number; text: string }[] = [];
  let current: PauseGroup | null = null;
  for (const event of events) {
    switch (event.action) {
      case 'pause_video':
        current = { at: event.at, texts: [] };
        break;
      case 'speak':
        current?.texts.push(event.text ?? '');
        break;
      case 'resume_video':
        if (current) pauses.push(current);
        current = null;
        break;
      case 'show_caption':
        captions.push({ at: event.at, until: event.until ?? event.at, text: event.text ?? '' });
        break;
    }
  }
  return { pauses, captions };
}

export class PreviewController {
  private pauses: PauseGroup[];
  private captions: { at: number; until: number; text: string }[];
  private nextPause = 0;
  private running = false;

  constructor(
    schedule: PreviewEvent[],
    private video: VideoDriver,
    private speech: SpeechDriver,
    private captionSink: CaptionSink,
    private modal: ModalSink,
  ) {
    const grouped = groupSchedule(schedule);
    this.pauses = grouped.pauses;
    this.captions = grouped.captions;
    this.video.onTimeUpdate((t) => void this.handleTime(t));
  }

  start(): void {
    this.running = true;
    this.nextPause = 0;
    this.video.play();
  }

  stop(): void {
    this.running = false;
    this.captionSink.clear();
  }

  async handleTime(t: number): Promise<void> {
    if (!this.running) return;
    const caption = this.captions.find((c) => c.at <= t && t < c.until);
    if (caption) this.captionSink.show(caption.text);
    else this.captionSink.clear();

    const pause = this.pauses[this.nextPause];
    if (pause && t >= pause.at) {
      this.nextPause += 1;
      this.video.pause();
      for (const text of pause.texts) {
        if (this.speech.available()) {
          await this.speech.speak(text);
        } else {
          await this.modal.show(text, fallbackDurationMs(text));
        }
      }
      if (this.running) this.video.play();
    }
  }
}
