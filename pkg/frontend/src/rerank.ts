/**
 * Client-side re-ranking. All loss math stays on the backend; the
 * client only combines the precomputed totals, so moving a weight
 * slider re-sorts instantly without a network round trip.
 */

import type { GallerySession, SortKey, TargetDump } from "./types.js";

const BIG = 1e9; // stands in for flagged non-finite components

function total(value: number | null): number {
  return value === null || !Number.isFinite(value) ? BIG : value;
}

export function weightedScore(target: TargetDump, weights: number[]): number {
  const losses = target.losses;
  return (
    weights[0] * total(losses.identification.total) +
    weights[1] * total(losses.comparison.total) +
    weights[2] * total(losses.trend.total)
  );
}

function sortValue(target: TargetDump, weights: number[], sortKey: SortKey): number {
  switch (sortKey) {
    case "identification":
      return total(target.losses.identification.total);
    case "comparison":
      return total(target.losses.comparison.total);
    case "trend":
      return total(target.losses.trend.total);
    default:
      return weightedScore(target, weights);
  }
}

/** Targets sorted ascending by the current weights/sort key; ties break
 * on the target id so the order is always total and stable. */
export function rerank(
  targets: TargetDump[],
  weights: number[],
  sortKey: SortKey = "score",
): TargetDump[] {
  return targets
    .slice()
    .sort((a, b) => {
      const va = sortValue(a, weights, sortKey);
      const vb = sortValue(b, weights, sortKey);
      if (va !== vb) return va - vb;
      return a.id < b.id ? -1 : a.id > b.id ? 1 : 0;
    });
}

export function rerankSession(session: GallerySession): TargetDump[] {
  return rerank(session.bundle.targets, session.weights, session.sortKey);
}
