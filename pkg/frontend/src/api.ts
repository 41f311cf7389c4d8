/** Thin fetch wrappers for the local ranking service. */

import type { GalleryBundle } from "./types.js";

export interface RankRequest {
  spec: unknown;
  dataText?: string;
  dataUrl?: string;
  weights?: number[];
  targetWidth?: number;
  seed?: number;
}

export async function fetchHealth(base = ""): Promise<{ status: string; version: string }> {
  const response = await fetch(`${base}/api/health`);
  if (!response.ok) throw new Error(`health check failed: ${response.status}`);
  return response.json();
}

export async function requestRank(body: RankRequest, base = ""): Promise<GalleryBundle> {
  const response = await fetch(`${base}/api/rank`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const payload = await response.json();
  if (!response.ok) {
    throw new Error(`${payload.error ?? response.status}: ${payload.message ?? "rank failed"}`);
  }
  return payload as GalleryBundle;
}
