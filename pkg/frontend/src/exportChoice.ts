/**
 * Export of the selected target's chart spec, byte-identical to the
 * bundle's stored spec: the backend writes compact key-sorted JSON and
 * JSON.parse/stringify preserve key order, so re-serialization
 * reproduces the original bytes.
 */

import type { GallerySession } from "./types.js";

export interface ExportedChoice {
  filename: string;
  content: string;
}

export function exportChoice(session: GallerySession): ExportedChoice | null {
  if (!session.selection) return null;
  const target = session.bundle.targets.find((t) => t.id === session.selection);
  if (!target) return null;
  return {
    filename: `${target.id}.spec.json`,
    content: JSON.stringify(target.spec),
  };
}
