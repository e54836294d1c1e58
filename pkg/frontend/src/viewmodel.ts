/** Pure view-model logic: everything here is testable without a DOM. */

import type {
  Dendrogram,
  DendrogramNode,
  PlanRecord,
  Preferences,
  SessionManifest,
} from "./types.js";

export interface ScatterPoint {
  planId: string;
  x: number; // mean latency ratio (lower is better)
  y: number; // cost per horizon, parsed from the exact decimal string
  disruption: number; // weighted count of disrupted APIs
  label: string;
}

/** One scatter point per served plan, in front order. */
export function scatterPoints(front: PlanRecord[]): ScatterPoint[] {
  return front.map((plan) => ({
    planId: plan.id,
    x: plan.objectives.q_perf,
    y: Number(plan.objectives.q_cost),
    disruption: plan.objectives.q_avai,
    label: `${plan.id}: ${plan.moved.length} moved`,
  }));
}

/** Axis bounds with a small margin so boundary points stay visible. */
export function scatterBounds(
  points: ScatterPoint[],
  margin = 0.05,
): { xMin: number; xMax: number; yMin: number; yMax: number } {
  if (points.length === 0) {
    return { xMin: 0, xMax: 1, yMin: 0, yMax: 1 };
  }
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const pad = (lo: number, hi: number) => {
    const span = hi - lo || 1;
    return [lo - margin * span, hi + margin * span];
  };
  const [xMin, xMax] = pad(Math.min(...xs), Math.max(...xs));
  const [yMin, yMax] = pad(Math.min(...ys), Math.max(...ys));
  return { xMin, xMax, yMin, yMax };
}

/** Coarse-to-fine navigation over the plan dendrogram. */
export class DrillState {
  private byId: Map<number, DendrogramNode>;
  private path: number[];

  constructor(private tree: Dendrogram) {
    this.byId = new Map(tree.nodes.map((n) => [n.id, n]));
    this.path = [tree.root];
  }

  get current(): DendrogramNode {
    const node = this.byId.get(this.path[this.path.length - 1]);
    if (!node) throw new Error("drill state points at a missing node");
    return node;
  }

  get breadcrumbs(): number[] {
    return [...this.path];
  }

  children(): DendrogramNode[] {
    return this.current.children.map((id) => {
      const child = this.byId.get(id);
      if (!child) throw new Error(`dendrogram child ${id} missing`);
      return child;
    });
  }

  isAtLeaf(): boolean {
    return this.current.children.length === 0;
  }

  drillTo(nodeId: number): void {
    if (!this.current.children.includes(nodeId)) {
      throw new Error(`node ${nodeId} is not a child of the current node`);
    }
    this.path.push(nodeId);
  }

  up(): void {
    if (this.path.length > 1) this.path.pop();
  }

  reset(): void {
    this.path = [this.tree.root];
  }

  /** Plan indices selectable from the current node (its members). */
  selectable(): number[] {
    return [...this.current.members];
  }
}

/** Every leaf node id, for exhaustiveness checks and flattened views. */
export function leafNodeIds(tree: Dendrogram): number[] {
  return tree.nodes.filter((n) => n.children.length === 0).map((n) => n.id);
}

export interface PreferencesForm {
  criticalApis: string; // comma-separated
  pins: string; // "component=onprem, component=cloud"
  cpuLimit: string; // blank = unconstrained
  budget: string; // blank = unconstrained
}

/** Parse the form into the exact JSON the service accepts. */
export function preferencesPayload(form: PreferencesForm): Preferences {
  const critical = form.criticalApis
    .split(",")
    .map((s) => s.trim())
    .filter(Boolean)
    .sort();
  const pins: Record<string, "onprem" | "cloud"> = {};
  for (const part of form.pins.split(",")) {
    const trimmed = part.trim();
    if (!trimmed) continue;
    const [component, location] = trimmed.split("=").map((s) => s.trim());
    if (location !== "onprem" && location !== "cloud") {
      throw new Error(`pin for ${component} must be onprem or cloud`);
    }
    pins[component] = location;
  }
  const limits: Record<string, number> = {};
  if (form.cpuLimit.trim()) {
    const value = Number(form.cpuLimit);
    if (!Number.isFinite(value) || value <= 0) throw new Error("bad cpu limit");
    limits.cpu = value;
  }
  let budget: number | null = null;
  if (form.budget.trim()) {
    budget = Number(form.budget);
    if (!Number.isFinite(budget) || budget <= 0) throw new Error("bad budget");
  }
  return {
    critical_apis: critical,
    placement_pins: Object.fromEntries(Object.entries(pins).sort()),
    onprem_limits: limits,
    budget,
  };
}

/** Fill the form back from a served manifest, closing the round trip. */
export function formFromPreferences(prefs: Preferences): PreferencesForm {
  return {
    criticalApis: [...prefs.critical_apis].sort().join(", "),
    pins: Object.entries(prefs.placement_pins)
      .sort()
      .map(([component, location]) => `${component}=${location}`)
      .join(", "),
    cpuLimit: prefs.onprem_limits.cpu != null ? String(prefs.onprem_limits.cpu) : "",
    budget: prefs.budget != null ? String(prefs.budget) : "",
  };
}

export interface PreviewTableRow {
  api: string;
  beforeMs: number;
  afterMs: number;
  ratio: number;
}

export function previewTable(plan: PlanRecord): PreviewTableRow[] {
  return Object.entries(plan.previews)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([api, row]) => ({
      api,
      beforeMs: row.before_ms,
      afterMs: row.after_ms,
      ratio: row.ratio,
    }));
}

/** Short human summary for the session header. */
export function sessionSummary(manifest: SessionManifest): string {
  const plans = manifest.front.length;
  return (
    `session ${manifest.session_id}: ${plans} plan${plans === 1 ? "" : "s"}, ` +
    `${manifest.evaluations} evaluations over ${manifest.generations} generations`
  );
}
