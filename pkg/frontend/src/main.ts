// Browser entry point: renders the authoring interface and wires it to the
// service API.  All state logic lives in app.ts / render.ts; this file is
// DOM glue only.

import { ApiClient } from './api.js';
import { App } from './app.js';
import {
  captionsPane,
  descriptionPane,
  fmtTime,
  matchOverlay,
  SLIDER_STOPS,
  timelineViews,
} from './render.js';
import {
  fallbackDurationMs,
  PreviewController,
  type CaptionSink,
  type ModalSink,
  type SpeechDriver,
  type VideoDriver,
} from './preview.js';
import type { TimelineBar } from './types.js';

const api = new ApiClient('');

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, cls?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function toast(message: string): void {
  const box = document.getElementById('toast')!;
  box.textContent = message;
  box.classList.add('visible');
  setTimeout(() => box.classList.remove('visible'), 4000);
}

async function pickProject(): Promise<string> {
  const fromUrl = new URLSearchParams(location.search).get('project');
  if (fromUrl) return fromUrl;
  const resp = await fetch('/projects');
  const doc = await resp.json();
  if (!doc.projects.length) {
    throw new Error('no projects stored; run `avasym analyze` first');
  }
  return doc.projects[0].project_id;
}

async function boot(): Promise<void> {
  const projectId = await pickProject();
  const app = new App(api, projectId);
  app.onError = toast;

  // media playback: audio element is the clock, frame <img> follows it
  const audio = document.getElementById('player') as HTMLAudioElement;
  const frame = document.getElementById('frame') as HTMLImageElement;
  audio.src = api.bundleUrl(projectId, 'audio.wav');
  const showFrame = (t: number) => {
    const idx = String(Math.max(0, Math.floor(t))).padStart(6, '0');
    frame.src = api.bundleUrl(projectId, `frames/frame_${idx}.png`);
  };
  audio.addEventListener('timeupdate', () => {
    showFrame(audio.currentTime);
    highlightPlayhead(audio.currentTime);
    document.getElementById('clock')!.textContent = fmtTime(audio.currentTime);
  });
  showFrame(0);

  const seek = (t: number) => {
    audio.currentTime = t;
    void audio.play();
  };

  let highlightPlayhead: (t: number) => void = () => {};

  function renderTimelines(): void {
    const views = timelineViews(app.timeline);
    const spansById = new Map<string, [number, number]>();
    for (const track of ['visual', 'audio'] as const) {
      const host = document.getElementById(`${track}-track`)!;
      host.textContent = '';
      for (const bar of views[track]) {
        spansById.set(bar.segmentId, [bar.leftPct, bar.widthPct]);
        const node = el('button', 'bar');
        node.style.left = `${bar.leftPct}%`;
        node.style.width = `${bar.widthPct}%`;
        node.style.backgroundColor = bar.cssColor;
        node.dataset.segment = bar.segmentId;
        node.title = bar.label;
        node.setAttribute('aria-label', bar.label);
        const barStart = (bar.leftPct / 100) * app.timeline.duration;
        node.addEventListener('click', () => seek(barStart));
        if (track === 'visual') {
          node.addEventListener('dblclick', () => void app.addManualIssue(bar.segmentId));
        }
        node.addEventListener('mouseenter', () => void hover(track, bar.segmentId));
        node.addEventListener('mouseleave', clearHover);
        node.addEventListener('focus', () => void hover(track, bar.segmentId));
        node.addEventListener('blur', clearHover);
        host.appendChild(node);
      }
    }
    highlightPlayhead = (t: number) => {
      for (const node of document.querySelectorAll<HTMLElement>('.bar')) {
        const seg = node.dataset.segment!;
        const span = spansById.get(seg);
        if (!span) continue;
        const start = (span[0] / 100) * app.timeline.duration;
        const end = start + (span[1] / 100) * app.timeline.duration;
        node.classList.toggle('playing', start <= t && t < end);
      }
      for (const row of document.querySelectorAll<HTMLElement>('.entry')) {
        row.classList.toggle('playing',
          row.dataset.start !== undefined &&
          Number(row.dataset.start) <= t && t < Number(row.dataset.end));
      }
    };
  }

  async function hover(track: 'visual' | 'audio', segmentId: string): Promise<void> {
    const matches = await app.matchesFor(segmentId);
    const opposite: 'visual' | 'audio' = track === 'visual' ? 'audio' : 'visual';
    const bars: TimelineBar[] = app.timeline[opposite];
    const overlay = matchOverlay(bars, matches);
    const host = document.getElementById(`${opposite}-track`)!;
    for (const node of host.querySelectorAll<HTMLElement>('.bar')) {
      const opacity = overlay.get(node.dataset.segment!);
      node.style.opacity = opacity === undefined ? '' : String(opacity);
    }
  }

  function clearHover(): void {
    for (const node of document.querySelectorAll<HTMLElement>('.bar')) {
      node.style.opacity = '';
    }
  }

  function renderPanes(): void {
    const descHost = document.getElementById('descriptions')!;
    const capHost = document.getElementById('captions')!;
    const spans = new Map(
      [...app.project.segments.visual, ...app.project.segments.audio]
        .map((s) => [s.id, [s.start, s.end] as [number, number]]));

    const build = (host: HTMLElement, entries: ReturnType<typeof descriptionPane>,
                   kind: 'audio_description' | 'caption') => {
      host.textContent = '';
      for (const entry of entries) {
        const row = el('div', 'entry');
        const span = spans.get(entry.segmentId)!;
        row.dataset.start = String(span[0]);
        row.dataset.end = String(span[1]);
        row.style.minHeight = `${Math.max(3, entry.heightPct)}vh`;
        const sidebar = el('span', 'sidebar');
        sidebar.style.backgroundColor = entry.sidebarColor;
        const jump = el('button', 'jump', `${fmtTime(span[0])} ${entry.segmentId}`);
        jump.addEventListener('click', () => seek(span[0]));
        const text = el('textarea') as HTMLTextAreaElement;
        text.value = entry.editableText;
        text.placeholder = entry.transcript ||
          (kind === 'caption' ? 'describe this sound' : 'describe this scene');
        if (entry.transcript) text.readOnly = true;
        const buttons = el('span', 'buttons');
        if (entry.showSave || entry.showEdit) {
          const save = el('button', 'save', entry.showEdit ? 'Edit' : 'Save');
          save.addEventListener('click', () => {
            if (text.value.trim()) void app.saveAnnotation(kind, entry.segmentId, text.value);
          });
          buttons.appendChild(save);
        }
        if (entry.showDismiss && entry.issueId) {
          const dismiss = el('button', 'dismiss', 'Dismiss');
          dismiss.addEventListener('click', () => void app.dismiss(entry.issueId!));
          buttons.appendChild(dismiss);
        }
        row.append(sidebar, jump, text, buttons);
        host.appendChild(row);
      }
    };

    build(descHost, descriptionPane(app.timeline, app.project.issues,
                                    app.project.annotations), 'audio_description');
    build(capHost, captionsPane(app.timeline, app.project.annotations)
      .filter((e) => !e.transcript || e.editableText), 'caption');
  }

  // slider with labeled stops; reverts itself via onChange after a 409
  const slider = document.getElementById('tau') as HTMLInputElement;
  const sliderLabel = document.getElementById('tau-label')!;
  slider.addEventListener('change', () => {
    void app.setTau(Number(slider.value));
  });

  app.onChange = () => {
    slider.value = String(app.project.filter_config.tau);
    const stop = SLIDER_STOPS.find((s) => s.tau >= app.project.filter_config.tau);
    sliderLabel.textContent =
      `tau ${app.project.filter_config.tau.toFixed(2)} (${stop?.label ?? 'custom'})`;
    renderTimelines();
    renderPanes();
  };

  // accessible preview
  const videoDriver: VideoDriver = {
    currentTime: () => audio.currentTime,
    pause: () => audio.pause(),
    play: () => void audio.play(),
    onTimeUpdate: (handler) =>
      audio.addEventListener('timeupdate', () => handler(audio.currentTime)),
  };
  const speechDriver: SpeechDriver = {
    available: () => 'speechSynthesis' in window,
    speak: (text) => new Promise((resolve) => {
      const utterance = new SpeechSynthesisUtterance(text);
      utterance.onend = () => resolve();
      utterance.onerror = () => resolve();
      speechSynthesis.speak(utterance);
    }),
  };
  const captionSink: CaptionSink = {
    show: (text) => { document.getElementById('caption-overlay')!.textContent = text; },
    clear: () => { document.getElementById('caption-overlay')!.textContent = ''; },
  };
  const modalSink: ModalSink = {
    show: (text, durationMs) => new Promise((resolve) => {
      const box = document.getElementById('modal')!;
      box.textContent = text;
      box.classList.add('visible');
      setTimeout(() => { box.classList.remove('visible'); resolve(); }, durationMs);
    }),
  };

  document.getElementById('preview-btn')!.addEventListener('click', async () => {
    const schedule = await api.getPreview(projectId);
    audio.currentTime = 0;
    const controller = new PreviewController(
      schedule.events, videoDriver, speechDriver, captionSink, modalSink);
    controller.start();
  });

  document.getElementById('export-captions')!.setAttribute(
    'href', `/projects/${projectId}/export?kind=captions`);
  document.getElementById('export-descriptions')!.setAttribute(
    'href', `/projects/${projectId}/export?kind=descriptions`);

  await app.load();
  document.getElementById('project-name')!.textContent = projectId;
}

boot().catch((err) => {
  document.body.textContent = `failed to start: ${err.message ?? err}`;
});

export { fallbackDurationMs };
