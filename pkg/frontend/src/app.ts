/** DOM wiring: render the front scatter, drill panel, and preference form.
 *
 * All state transformations live in viewmodel.ts; this file only draws.
 */

import { AdvisorClient } from "./api.js";
import type { PlanRecord, SessionManifest } from "./types.js";
import {
  DrillState,
  formFromPreferences,
  preferencesPayload,
  previewTable,
  scatterBounds,
  scatterPoints,
  sessionSummary,
} from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 520;
const HEIGHT = 360;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderScatter(
  container: HTMLElement,
  front: PlanRecord[],
  onSelect: (planId: string) => void,
): void {
  container.replaceChildren();
  const points = scatterPoints(front);
  const bounds = scatterBounds(points);
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("width", String(WIDTH));
  for (const point of points) {
    const cx =
      ((point.x - bounds.xMin) / (bounds.xMax - bounds.xMin)) * (WIDTH - 40) + 20;
    const cy =
      HEIGHT -
      (((point.y - bounds.yMin) / (bounds.yMax - bounds.yMin)) * (HEIGHT - 40) + 20);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(cx));
    dot.setAttribute("cy", String(cy));
    dot.setAttribute("r", String(5 + 2 * point.disruption));
    dot.setAttribute("class", "plan-dot");
    dot.addEventListener("click", () => onSelect(point.planId));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = point.label;
    dot.appendChild(title);
    svg.appendChild(dot);
  }
  container.appendChild(svg);
}

function renderPlan(container: HTMLElement, plan: PlanRecord): void {
  container.replaceChildren();
  container.appendChild(el("h3", `${plan.id} (moved: ${plan.moved.join(", ") || "none"})`));
  const table = el("table");
  const head = el("tr");
  for (const label of ["api", "before ms", "after ms", "ratio"]) {
    head.appendChild(el("th", label));
  }
  table.appendChild(head);
  for (const row of previewTable(plan)) {
    const tr = el("tr");
    tr.appendChild(el("td", row.api));
    tr.appendChild(el("td", row.beforeMs.toFixed(2)));
    tr.appendChild(el("td", row.afterMs.toFixed(2)));
    tr.appendChild(el("td", row.ratio.toFixed(3)));
    table.appendChild(tr);
  }
  container.appendChild(table);
}

function renderDrill(
  container: HTMLElement,
  drill: DrillState,
  manifest: SessionManifest,
  onPick: (plan: PlanRecord) => void,
): void {
  container.replaceChildren();
  const node = drill.current;
  container.appendChild(el("h3", `cluster: ${node.label} (${node.members.length} plans)`));
  if (drill.breadcrumbs.length > 1) {
    const back = el("button", "back");
    back.addEventListener("click", () => {
      drill.up();
      renderDrill(container, drill, manifest, onPick);
    });
    container.appendChild(back);
  }
  if (drill.isAtLeaf()) {
    const plan = manifest.front[node.members[0]];
    const pick = el("button", `inspect ${plan.id}`);
    pick.addEventListener("click", () => onPick(plan));
    container.appendChild(pick);
    return;
  }
  for (const child of drill.children()) {
    const representative = manifest.front[child.representative];
    const button = el(
      "button",
      `${child.label}: ${child.members.length} plans, e.g. ${representative.id}`,
    );
    button.addEventListener("click", () => {
      drill.drillTo(child.id);
      renderDrill(container, drill, manifest, onPick);
    });
    container.appendChild(button);
  }
}

async function refreshMonitor(client: AdvisorClient, container: HTMLElement): Promise<void> {
  const status = await client.monitorStatus();
  container.replaceChildren();
  for (const [api, verdict] of Object.entries(status.apis).sort()) {
    const state = verdict.inconclusive
      ? "inconclusive"
      : verdict.triggered
        ? "DRIFT"
        : "ok";
    container.appendChild(el("div", `${api}: ${state} (ratio ${verdict.ratio.toFixed(2)})`));
  }
  if (status.re_recommend) {
    container.appendChild(el("strong", "drift detected: request a fresh recommendation"));
  }
}

export async function mount(root: HTMLElement, baseUrl = ""): Promise<void> {
  const client = new AdvisorClient(baseUrl);
  const header = el("div");
  const scatter = el("div");
  const drillPanel = el("div");
  const planPanel = el("div");
  const monitorPanel = el("div");
  const form = el("form");
  root.replaceChildren(header, scatter, drillPanel, planPanel, monitorPanel, form);

  const fields = {
    criticalApis: el("input"),
    pins: el("input"),
    cpuLimit: el("input"),
    budget: el("input"),
  };
  for (const [name, input] of Object.entries(fields)) {
    const label = el("label", `${name}: `);
    label.appendChild(input);
    form.appendChild(label);
  }
  const submit = el("button", "re-run with these preferences");
  form.appendChild(submit);

  let currentSession: SessionManifest | null = null;

  async function showSession(sessionId: string): Promise<void> {
    const manifest = await client.getSession(sessionId);
    currentSession = manifest;
    header.textContent = sessionSummary(manifest);
    const pick = (plan: PlanRecord) => renderPlan(planPanel, plan);
    renderScatter(scatter, manifest.front, (planId) => {
      const plan = manifest.front.find((p) => p.id === planId);
      if (plan) pick(plan);
    });
    if (manifest.dendrogram) {
      renderDrill(drillPanel, new DrillState(manifest.dendrogram), manifest, pick);
    }
    const filled = formFromPreferences(manifest.preferences);
    fields.criticalApis.value = filled.criticalApis;
    fields.pins.value = filled.pins;
    fields.cpuLimit.value = filled.cpuLimit;
    fields.budget.value = filled.budget;
  }

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!currentSession) return;
    const payload = preferencesPayload({
      criticalApis: fields.criticalApis.value,
      pins: fields.pins.value,
      cpuLimit: fields.cpuLimit.value,
      budget: fields.budget.value,
    });
    const created = await client.updatePreferences(currentSession.session_id, payload);
    // poll until the new session lands, then switch to it
    const poll = async (): Promise<void> => {
      try {
        await showSession(created.session_id);
      } catch {
        setTimeout(poll, 1000);
      }
    };
    await poll();
  });

  const listing = await client.listSessions();
  if (listing.sessions.length > 0) {
    await showSession(listing.sessions[listing.sessions.length - 1]);
  } else {
    const created = await client.createSession(null, 0);
    if (created.status === "complete") await showSession(created.session_id);
    else header.textContent = `run ${created.session_id} in progress...`;
  }
  await refreshMonitor(client, monitorPanel);
  setInterval(() => void refreshMonitor(client, monitorPanel), 30_000);
}
