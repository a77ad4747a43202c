// Bundle validation: structural checks plus a leak guard that refuses
// any file carrying answer-key material. The UI must never see keys.

import type { BundleFile, BundleTask } from './types';

export const SCHEMA_VERSION = 1;

/** Fields that only the sealed key file may contain. */
const KEY_FIELDS = new Set([
  'intruder_position',
  'intruder',
  'label',
  'y',
  'is_control',
  'answer_key',
  'head_words',
  'intruder_similarity',
]);

export class BundleError extends Error {}

function scanForKeyFields(node: unknown, path: string): void {
  if (Array.isArray(node)) {
    node.forEach((item, i) => scanForKeyFields(item, `${path}[${i}]`));
    return;
  }
  if (node !== null && typeof node === 'object') {
    for (const [key, value] of Object.entries(node as Record<string, unknown>)) {
      if (KEY_FIELDS.has(key)) {
        throw new BundleError(
          `refusing bundle: answer-key field "${key}" found at ${path}`);
      }
      scanForKeyFields(value, `${path}.${key}`);
    }
  }
}

function checkTask(task: unknown, index: number): BundleTask {
  if (task === null || typeof task !== 'object') {
    throw new BundleError(`task ${index} is not an object`);
  }
  const t = task as Record<string, unknown>;
  if (typeof t.task_id !== 'string' || !t.task_id) {
    throw new BundleError(`task ${index} lacks a task_id`);
  }
  if (t.kind !== 'twi' && t.kind !== 'twm') {
    throw new BundleError(`task ${t.task_id}: unknown kind "${t.kind}"`);
  }
  if (typeof t.model_id !== 'string') {
    throw new BundleError(`task ${t.task_id}: missing model_id`);
  }
  if (typeof t.track !== 'number' || !Number.isInteger(t.track) || t.track < 0) {
    throw new BundleError(`task ${t.task_id}: bad track`);
  }
  if (!Array.isArray(t.words)) {
    throw new BundleError(`task ${t.task_id}: words must be an array`);
  }
  const expected = t.kind === 'twi' ? 5 : 8;
  if (t.words.length !== expected) {
    throw new BundleError(
      `task ${t.task_id}: ${t.words.length} words, expected ${expected}`);
  }
  for (const w of t.words) {
    const word = w as Record<string, unknown>;
    if (typeof word.w !== 'string' || typeof word.bold !== 'boolean') {
      throw new BundleError(`task ${t.task_id}: malformed word entry`);
    }
  }
  if (t.kind === 'twm') {
    const bold = (t.words as { bold: boolean }[]).filter((w) => w.bold).length;
    if (bold !== 4) {
      throw new BundleError(`task ${t.task_id}: ${bold} bold words, expected 4`);
    }
  }
  return t as unknown as BundleTask;
}

export function validateBundle(obj: unknown): BundleFile {
  if (obj === null || typeof obj !== 'object' || Array.isArray(obj)) {
    throw new BundleError('bundle must be a JSON object');
  }
  scanForKeyFields(obj, '$');
  const b = obj as Record<string, unknown>;
  if (b.schema_version !== SCHEMA_VERSION) {
    throw new BundleError(
      `unsupported schema_version ${JSON.stringify(b.schema_version)}`);
  }
  if (typeof b.bundle_id !== 'string' || !b.bundle_id) {
    throw new BundleError('missing bundle_id');
  }
  if (!Array.isArray(b.tasks) || b.tasks.length === 0) {
    throw new BundleError('bundle has no tasks');
  }
  const seen = new Set<string>();
  const tasks = b.tasks.map((t, i) => {
    const task = checkTask(t, i);
    if (seen.has(task.task_id)) {
      throw new BundleError(`duplicate task_id ${task.task_id}`);
    }
    seen.add(task.task_id);
    return task;
  });
  const nTracks = typeof b.n_tracks === 'number'
    ? b.n_tracks
    : Math.max(...tasks.map((t) => t.track)) + 1;
  return {
    schema_version: SCHEMA_VERSION,
    bundle_id: b.bundle_id,
    seed: typeof b.seed === 'number' ? b.seed : 0,
    n_tracks: nTracks,
    tasks,
    meta: b.meta,
  };
}

export function parseBundleText(text: string): BundleFile {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    throw new BundleError('file is not valid JSON');
  }
  return validateBundle(obj);
}

/** Tasks of one track, in bundle presentation order. */
export function trackTasks(bundle: BundleFile, track: number): BundleTask[] {
  return bundle.tasks.filter((t) => t.track === track);
}

export function trackCounts(bundle: BundleFile): Map<number, number> {
  const counts = new Map<number, number>();
  for (let i = 0; i < bundle.n_tracks; i += 1) counts.set(i, 0);
  for (const t of bundle.tasks) {
    counts.set(t.track, (counts.get(t.track) ?? 0) + 1);
  }
  return counts;
}
