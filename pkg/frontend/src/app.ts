// Single-page annotator flow: load a bundle, pick a track, answer every
// task, export. No backend; state lives in memory plus localStorage.

import type { BundleFile, BundleTask, Session, TaskResponse } from './types';
import { BundleError, parseBundleText, trackCounts, trackTasks } from './schema';
import { loadSession, markExported, newSession, recordResponse, saveSession,
         trackSwitchBlock } from './session';
import { annotationFilename, buildAnnotationFile, downloadFile,
         unansweredTasks, type FileDeliverer } from './export';

export interface AppOptions {
  deliver?: FileDeliverer;
}

export interface AppState {
  phase: 'setup' | 'annotate';
  error: string | null;
  bundle: BundleFile | null;
  annotatorId: string;
  session: Session | null;
  index: number;
}

export class App {
  private root: HTMLElement;
  private doc: Document;
  private deliver: FileDeliverer;
  private state: AppState = {
    phase: 'setup',
    error: null,
    bundle: null,
    annotatorId: '',
    session: null,
    index: 0,
  };

  constructor(root: HTMLElement, options: AppOptions = {}) {
    this.root = root;
    this.doc = root.ownerDocument;
    this.deliver = options.deliver ?? downloadFile;
    this.render();
  }

  // --- controller methods (event handlers call these; tests may too) ---

  loadBundleText(text: string): void {
    try {
      this.state.bundle = parseBundleText(text);
      this.state.error = null;
    } catch (err) {
      this.state.bundle = null;
      this.state.error = err instanceof BundleError
        ? err.message
        : `could not read bundle: ${String(err)}`;
    }
    this.render();
  }

  setAnnotator(id: string): void {
    this.state.annotatorId = id.trim();
    this.render();
  }

  /** Returns the blocking reason, or null when the track was opened. */
  chooseTrack(track: number): string | null {
    const { bundle, annotatorId } = this.state;
    if (!bundle) return 'no bundle loaded';
    if (!annotatorId) {
      this.state.error = 'enter an annotator id first';
      this.render();
      return this.state.error;
    }
    const block = trackSwitchBlock(bundle.bundle_id, annotatorId, track);
    if (block) {
      this.state.error = block;
      this.render();
      return block;
    }
    const existing = loadSession(bundle.bundle_id, annotatorId, track);
    const session = existing ?? newSession(bundle.bundle_id, annotatorId, track);
    saveSession(session);
    const tasks = this.tasks(session);
    const firstOpen = tasks.findIndex((t) => !(t.task_id in session.responses));
    this.state.session = session;
    this.state.index = firstOpen === -1 ? tasks.length - 1 : firstOpen;
    this.state.phase = 'annotate';
    this.state.error = null;
    this.render();
    return null;
  }

  select(response: TaskResponse): void {
    const { session } = this.state;
    if (!session || session.exported) return;
    const task = this.currentTask();
    if (!task) return;
    this.state.session = recordResponse(session, task.task_id, response);
    this.render();
  }

  next(): void {
    const task = this.currentTask();
    const { session } = this.state;
    if (!task || !session) return;
    if (!(task.task_id in session.responses)) return; // blocked until answered
    if (this.state.index < this.tasks(session).length - 1) {
      this.state.index += 1;
      this.render();
    }
  }

  prev(): void {
    if (this.state.index > 0) {
      this.state.index -= 1;
      this.render();
    }
  }

  /** Export the completed track; returns the JSON text that was delivered. */
  exportAnnotations(): string {
    const { session } = this.state;
    if (!session) throw new Error('no active session');
    const file = buildAnnotationFile(session, this.tasks(session));
    const text = JSON.stringify(file, null, 1);
    this.deliver(annotationFilename(session), text);
    this.state.session = markExported(session);
    this.render();
    return text;
  }

  backToSetup(): void {
    this.state.phase = 'setup';
    this.state.session = null;
    this.state.error = null;
    this.render();
  }

  snapshot(): AppState {
    return { ...this.state };
  }

  // --- view -----------------------------------------------------------

  private tasks(session: Session): BundleTask[] {
    return this.state.bundle ? trackTasks(this.state.bundle, session.track) : [];
  }

  private currentTask(): BundleTask | null {
    const { session } = this.state;
    if (!session) return null;
    return this.tasks(session)[this.state.index] ?? null;
  }

  private el<K extends keyof HTMLElementTagNameMap>(
      tag: K, attrs: Record<string, string> = {},
      text?: string): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private render(): void {
    this.root.textContent = '';
    const shell = this.el('div', { class: 'shell' });
    shell.appendChild(this.el('h1', {}, 'Topic annotation tracks'));
    if (this.state.error) {
      shell.appendChild(this.el('p', { class: 'error', id: 'error-box' },
                                this.state.error));
    }
    shell.appendChild(this.state.phase === 'setup'
      ? this.renderSetup()
      : this.renderAnnotate());
    this.root.appendChild(shell);
  }

  private renderSetup(): HTMLElement {
    const pane = this.el('div', { class: 'pane', id: 'setup' });

    const annotator = this.el('input', {
      id: 'annotator-input',
      placeholder: 'annotator id',
      value: this.state.annotatorId,
    });
    annotator.addEventListener('change', () => {
      this.state.annotatorId = annotator.value.trim();
    });
    pane.appendChild(this.el('label', {}, 'Annotator id: '));
    pane.appendChild(annotator);

    const file = this.el('input', { id: 'bundle-input', type: 'file',
                                    accept: '.json,application/json' });
    file.addEventListener('change', () => {
      const chosen = (file as HTMLInputElement).files?.[0];
      if (!chosen) return;
      chosen.text().then(
        (text) => this.loadBundleText(text),
        (err) => {
          this.state.error = `could not read file: ${String(err)}`;
          this.render();
        });
    });
    pane.appendChild(this.el('label', {}, ' Task bundle: '));
    pane.appendChild(file);

    const { bundle } = this.state;
    if (bundle) {
      pane.appendChild(this.el('p', { id: 'bundle-info' },
        `${bundle.bundle_id}: ${bundle.tasks.length} tasks in `
        + `${bundle.n_tracks} tracks`));
      const list = this.el('ul', { id: 'track-list' });
      for (const [track, count] of trackCounts(bundle)) {
        const item = this.el('li');
        const button = this.el('button', { class: 'track-button',
                                           'data-track': String(track) },
                               `Track ${track + 1} (${count} tasks)`);
        button.addEventListener('click', () => {
          const input: HTMLInputElement | null =
            this.root.querySelector('#annotator-input');
          this.state.annotatorId = input?.value.trim() || this.state.annotatorId;
          this.chooseTrack(track);
        });
        item.appendChild(button);
        list.appendChild(item);
      }
      pane.appendChild(list);
    }
    return pane;
  }

  private renderAnnotate(): HTMLElement {
    const pane = this.el('div', { class: 'pane', id: 'annotate' });
    const session = this.state.session!;
    const tasks = this.tasks(session);
    const task = this.currentTask()!;
    const answered = tasks.length - unansweredTasks(session, tasks).length;

    pane.appendChild(this.el('p', { id: 'progress' },
      `Track ${session.track + 1} - task ${this.state.index + 1} of `
      + `${tasks.length} (${answered} answered)`));

    const card = this.el('div', { class: 'card', id: 'task-card',
                                  'data-task-id': task.task_id,
                                  'data-kind': task.kind });
    const current = session.responses[task.task_id];

    if (task.kind === 'twi') {
      card.appendChild(this.el('p', {},
        'Select the word that does not belong with the others.'));
      const options = this.el('div', { class: 'options' });
      for (const { w } of task.words) {
        const button = this.el('button', {
          class: 'option-button' + (current === w ? ' selected' : ''),
          'data-word': w,
        }, w);
        button.addEventListener('click', () => this.select(w));
        options.appendChild(button);
      }
      card.appendChild(options);
    } else {
      card.appendChild(this.el('p', {},
        'Do these words come from 1 or 2 topics?'));
      const words = this.el('p', { class: 'word-list', id: 'word-list' });
      task.words.forEach(({ w, bold }, i) => {
        if (i > 0) words.appendChild(this.doc.createTextNode(' '));
        words.appendChild(bold ? this.el('b', {}, w)
                               : this.doc.createTextNode(w));
      });
      card.appendChild(words);
      const options = this.el('div', { class: 'options' });
      for (const value of [1, 2]) {
        const button = this.el('button', {
          class: 'option-button' + (current === value ? ' selected' : ''),
          'data-choice': String(value),
        }, `${value} topic${value === 2 ? 's' : ''}`);
        button.addEventListener('click', () => this.select(value));
        options.appendChild(button);
      }
      card.appendChild(options);
    }
    pane.appendChild(card);

    const nav = this.el('div', { class: 'nav' });
    const prev = this.el('button', { id: 'prev-btn' }, 'Back');
    if (this.state.index === 0) prev.setAttribute('disabled', '');
    prev.addEventListener('click', () => this.prev());
    nav.appendChild(prev);

    const next = this.el('button', { id: 'next-btn' }, 'Next');
    const unanswered = !(task.task_id in session.responses);
    if (unanswered || this.state.index === tasks.length - 1) {
      next.setAttribute('disabled', '');
    }
    next.addEventListener('click', () => this.next());
    nav.appendChild(next);

    const remaining = unansweredTasks(session, tasks).length;
    const exportBtn = this.el('button', { id: 'export-btn' },
      session.exported ? 'Exported'
        : remaining > 0 ? `Export (${remaining} left)` : 'Export annotations');
    if (remaining > 0 || session.exported) exportBtn.setAttribute('disabled', '');
    exportBtn.addEventListener('click', () => this.exportAnnotations());
    nav.appendChild(exportBtn);

    if (session.exported) {
      const switchBtn = this.el('button', { id: 'switch-btn' },
                                'Choose another track');
      switchBtn.addEventListener('click', () => this.backToSetup());
      nav.appendChild(switchBtn);
    }
    pane.appendChild(nav);
    return pane;
  }
}

export function initApp(root: HTMLElement, options: AppOptions = {}): App {
  return new App(root, options);
}
