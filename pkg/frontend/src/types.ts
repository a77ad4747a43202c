export interface BundleWord {
  w: string;
  bold: boolean;
}

export interface BundleTask {
  task_id: string;
  kind: 'twi' | 'twm';
  model_id: string;
  words: BundleWord[];
  track: number;
}

export interface BundleFile {
  schema_version: number;
  bundle_id: string;
  seed: number;
  n_tracks: number;
  tasks: BundleTask[];
  meta?: unknown;
}

/** TWI stores the chosen word; TWM stores the perceived topic count. */
export type TaskResponse = string | number;

export interface AnnotationRecord {
  task_id: string;
  annotator_id: string;
  response: TaskResponse;
}

export interface AnnotationFile {
  schema_version: number;
  records: AnnotationRecord[];
}

export interface Session {
  bundleId: string;
  annotatorId: string;
  track: number;
  responses: Record<string, TaskResponse>;
  exported: boolean;
}
