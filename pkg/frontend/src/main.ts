/**
 * Gallery app wiring: load a bundle (file upload or /api/rank), show
 * the source view and ranked candidates, re-rank live on weight slider
 * moves, surface per-channel loss breakdowns, and export the selected
 * target's spec.
 */

import { fetchHealth, requestRank } from "./api.js";
import { exportChoice } from "./exportChoice.js";
import { errorCard, renderChart } from "./render.js";
import { rerankSession, weightedScore } from "./rerank.js";
import type { GalleryBundle, GallerySession, SortKey, TargetDump } from "./types.js";

const MEASURES = ["identification", "comparison", "trend"] as const;

let session: GallerySession | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function fmt(value: number | null): string {
  if (value === null || !Number.isFinite(value)) return "∞";
  return value.toFixed(3);
}

function descriptorLabel(target: TargetDump): string {
  const d = target.descriptor;
  const parts = [`${target.spec.width}×${d.height}`];
  if (d.transposed) parts.push("transposed");
  if (d.maxbins !== null) parts.push(`bins≤${d.maxbins}`);
  if (d.aggregate) parts.push(d.aggregate);
  if (d.markChange) parts.push(`→${d.markChange}`);
  return parts.join(" · ");
}

function lossTable(target: TargetDump): string {
  const rows = MEASURES.map((m) => {
    const block = target.losses[m];
    const detail = Object.entries(block.perChannel)
      .map(([k, v]) => `${k}: ${fmt(v)}`)
      .join(", ");
    return `<tr><th>${m}</th><td>${fmt(block.total)}</td><td class="detail">${detail}</td></tr>`;
  });
  return `<table class="losses"><tbody>${rows.join("")}</tbody></table>`;
}

function renderTargets(): void {
  if (!session) return;
  const container = el<HTMLDivElement>("targets");
  const ranked = rerankSession(session);
  container.innerHTML = "";
  ranked.forEach((target, index) => {
    const card = document.createElement("div");
    card.className = "card" + (session!.selection === target.id ? " selected" : "");
    card.dataset.id = target.id;
    let chart: string;
    try {
      chart = renderChart(target.rendered);
    } catch (err) {
      chart = errorCard(String(err));
    }
    card.innerHTML =
      `<header><span class="rank">#${index + 1}</span> <code>${target.id}</code>` +
      `<span class="score">${weightedScore(target, session!.weights).toFixed(3)}</span></header>` +
      `<div class="desc">${descriptorLabel(target)}</div>` +
      `<div class="chart-box">${chart}</div>` +
      lossTable(target);
    card.addEventListener("click", () => {
      session!.selection = session!.selection === target.id ? null : target.id;
      el<HTMLButtonElement>("export").disabled = session!.selection === null;
      renderTargets();
    });
    container.appendChild(card);
  });
}

function loadBundle(bundle: GalleryBundle): void {
  const weights = bundle.config.weights;
  session = {
    bundle,
    weights: [weights[0] ?? 1, weights[1] ?? 1, weights[2] ?? 1],
    selection: null,
    sortKey: "score",
  };
  MEASURES.forEach((m, i) => {
    el<HTMLInputElement>(`w-${m}`).value = String(session!.weights[i]);
    el<HTMLSpanElement>(`wv-${m}`).textContent = session!.weights[i].toFixed(2);
  });
  el<HTMLDivElement>("source-chart").innerHTML = renderChart(bundle.source.rendered);
  el<HTMLDivElement>("source-meta").textContent =
    `${bundle.source.spec.mark} ${bundle.source.spec.width}×${bundle.source.spec.height}, ` +
    `${bundle.targets.length} candidates at width ${bundle.config.targetWidth}`;
  el<HTMLButtonElement>("export").disabled = true;
  renderTargets();
}

function wireControls(): void {
  MEASURES.forEach((m, i) => {
    const slider = el<HTMLInputElement>(`w-${m}`);
    slider.addEventListener("input", () => {
      if (!session) return;
      session.weights[i] = Number(slider.value);
      el<HTMLSpanElement>(`wv-${m}`).textContent = session.weights[i].toFixed(2);
      renderTargets();
    });
  });

  el<HTMLSelectElement>("sort-key").addEventListener("change", (event) => {
    if (!session) return;
    session.sortKey = (event.target as HTMLSelectElement).value as SortKey;
    renderTargets();
  });

  el<HTMLInputElement>("bundle-file").addEventListener("change", async (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      loadBundle(JSON.parse(await file.text()) as GalleryBundle);
    } catch (err) {
      el<HTMLDivElement>("targets").innerHTML = errorCard(`could not load bundle: ${err}`);
    }
  });

  el<HTMLButtonElement>("rank-remote").addEventListener("click", async () => {
    const status = el<HTMLSpanElement>("rank-status");
    try {
      status.textContent = "ranking…";
      const spec = JSON.parse(el<HTMLTextAreaElement>("spec-input").value);
      const dataText = el<HTMLTextAreaElement>("data-input").value;
      const bundle = await requestRank({ spec, dataText });
      loadBundle(bundle);
      status.textContent = "done";
    } catch (err) {
      status.textContent = String(err);
    }
  });

  el<HTMLButtonElement>("export").addEventListener("click", () => {
    if (!session) return;
    const exported = exportChoice(session);
    if (!exported) return;
    const blob = new Blob([exported.content], { type: "application/json" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = exported.filename;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  });
}

async function init(): Promise<void> {
  wireControls();
  try {
    const health = await fetchHealth();
    el<HTMLSpanElement>("health").textContent = `backend ${health.version} ready`;
  } catch {
    el<HTMLSpanElement>("health").textContent = "backend offline (file loading still works)";
  }
}

init();
