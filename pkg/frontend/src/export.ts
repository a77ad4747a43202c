// Annotation export: build the JSON the scorer ingests and hand it to
// the browser as a download.

import type { AnnotationFile, BundleTask, Session } from './types';
import { SCHEMA_VERSION } from './schema';

export function unansweredTasks(session: Session, tasks: BundleTask[]): BundleTask[] {
  return tasks.filter((t) => !(t.task_id in session.responses));
}

/** Records follow the track's presentation order. TWM answers are numbers. */
export function buildAnnotationFile(session: Session,
                                    tasks: BundleTask[]): AnnotationFile {
  const remaining = unansweredTasks(session, tasks);
  if (remaining.length > 0) {
    throw new Error(`${remaining.length} task(s) still unanswered`);
  }
  const records = tasks.map((t) => {
    const raw = session.responses[t.task_id];
    return {
      task_id: t.task_id,
      annotator_id: session.annotatorId,
      response: t.kind === 'twm' ? Number(raw) : String(raw),
    };
  });
  return { schema_version: SCHEMA_VERSION, records };
}

export function annotationFilename(session: Session): string {
  return `annotations-${session.bundleId}-track${session.track}-`
    + `${session.annotatorId}.json`;
}

export type FileDeliverer = (filename: string, text: string) => void;

/** Default deliverer: trigger a browser download. */
export function downloadFile(filename: string, text: string): void {
  const blob = new Blob([text], { type: 'application/json' });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = filename;
  document.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}
