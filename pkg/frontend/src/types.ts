/** Shapes of the JSON the advisor service serves. */

export interface PreviewRow {
  before_ms: number;
  after_ms: number;
  ratio: number;
}

export interface PlanRecord {
  id: string;
  placement: Record<string, "onprem" | "cloud">;
  moved: string[];
  objectives: { q_perf: number; q_avai: number; q_cost: string };
  feasible: boolean;
  previews: Record<string, PreviewRow>;
}

export interface DendrogramNode {
  id: number;
  members: number[];
  representative: number;
  label: string;
  height: number;
  children: number[];
}

export interface Dendrogram {
  root: number;
  nodes: DendrogramNode[];
}

export interface Preferences {
  critical_apis: string[];
  placement_pins: Record<string, "onprem" | "cloud">;
  onprem_limits: Record<string, number>;
  budget: number | null;
}

export interface SessionManifest {
  session_id: string;
  telemetry_digest: string;
  seed: number;
  config: Record<string, unknown>;
  preferences: Preferences;
  front: PlanRecord[];
  dendrogram: Dendrogram | null;
  evaluations: number;
  generations: number;
  reward_curve: number[];
}

export interface DriftVerdict {
  ratio: number;
  triggered: boolean;
  inconclusive: boolean;
  recent_samples: number;
}

export interface MonitorStatus {
  apis: Record<string, DriftVerdict>;
  re_recommend: boolean;
}

export interface SessionCreated {
  session_id: string;
  status: "complete" | "running";
}
