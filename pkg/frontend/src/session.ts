// Session persistence via localStorage: responses survive reloads, and
// an unexported session pins the annotator to one track until export.

import type { Session, TaskResponse } from './types';

const PREFIX = 'topicbench';
const ACTIVE_KEY = `${PREFIX}:active`;

function sessionKey(bundleId: string, annotatorId: string, track: number): string {
  return `${PREFIX}:session:${bundleId}:${annotatorId}:${track}`;
}

export function newSession(bundleId: string, annotatorId: string,
                           track: number): Session {
  return { bundleId, annotatorId, track, responses: {}, exported: false };
}

export function loadSession(bundleId: string, annotatorId: string,
                            track: number): Session | null {
  try {
    const raw = localStorage.getItem(sessionKey(bundleId, annotatorId, track));
    if (!raw) return null;
    const parsed = JSON.parse(raw) as Session;
    if (typeof parsed.responses !== 'object' || parsed.responses === null) {
      return null;
    }
    return parsed;
  } catch {
    return null;
  }
}

export function saveSession(session: Session): void {
  try {
    localStorage.setItem(
      sessionKey(session.bundleId, session.annotatorId, session.track),
      JSON.stringify(session));
    localStorage.setItem(ACTIVE_KEY, JSON.stringify({
      bundleId: session.bundleId,
      annotatorId: session.annotatorId,
      track: session.track,
      exported: session.exported,
    }));
  } catch {
    // storage full or unavailable; the in-memory session still works
  }
}

export function recordResponse(session: Session, taskId: string,
                               response: TaskResponse): Session {
  const updated: Session = {
    ...session,
    responses: { ...session.responses, [taskId]: response },
  };
  saveSession(updated);
  return updated;
}

export function markExported(session: Session): Session {
  const updated = { ...session, exported: true };
  saveSession(updated);
  return updated;
}

export interface ActivePointer {
  bundleId: string;
  annotatorId: string;
  track: number;
  exported: boolean;
}

/** The one session an annotator may have open before exporting. */
export function activePointer(): ActivePointer | null {
  try {
    const raw = localStorage.getItem(ACTIVE_KEY);
    return raw ? (JSON.parse(raw) as ActivePointer) : null;
  } catch {
    return null;
  }
}

/** null when the track may be opened; otherwise the blocking reason. */
export function trackSwitchBlock(bundleId: string, annotatorId: string,
                                 track: number): string | null {
  const active = activePointer();
  if (!active || active.exported) return null;
  if (active.bundleId === bundleId && active.annotatorId === annotatorId
      && active.track === track) {
    return null; // resuming the same session
  }
  return `track ${active.track + 1} of bundle ${active.bundleId} is in `
    + 'progress; export it before switching';
}
