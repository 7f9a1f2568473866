/** Wire types for the review service's JSON API. */

export type Diagnosis =
  | "clean"
  | "noisy_label"
  | "missing_label"
  | "noisy_and_missing"
  | "unresolved";

export type QueueContext = "calibration" | "flagged";

export interface QueueItem {
  image_id: string;
  context: QueueContext;
  diagnosis: Diagnosis;
  margin: number;
}

export interface SoftEntry {
  label: string;
  score: number;
  likelihood: number;
}

export interface ReviewItem {
  image_id: string;
  original: string;
  labels: SoftEntry[];
  diagnosis: Diagnosis;
  image_url: string;
  context: QueueContext;
  vocabulary: string[];
  margin: number;
}

export interface VerdictSubmission {
  image_id: string;
  labels: string[];
  reviewer: string;
}

export interface VerdictRecord extends VerdictSubmission {
  timestamp: string;
  context: QueueContext;
}

export interface ExpertiseEntry {
  method: string;
  est_acc: number;
  coverage: number;
  penalty: number;
}

export interface Report {
  dataset_id: string;
  image_count: number;
  noisy_label_count: number;
  missing_label_count: number;
  threshold: number;
  threshold_mode: string;
  cutoff: number;
  full_score: number;
  top_k: number;
  diagnosis_counts: Record<Diagnosis, number>;
}

export interface RecomputeResult {
  expertise: ExpertiseEntry[];
  report: Report;
}
