import { describe, expect, it } from "vitest";

import { rerank, weightedScore } from "../src/rerank.js";
import type { GalleryBundle, TargetDump } from "../src/types.js";
import bundleJson from "./fixtures/bundle.json";

const bundle = bundleJson as unknown as GalleryBundle;

function fakeTarget(id: string, ident: number, comp: number, trend: number): TargetDump {
  return {
    id,
    descriptor: { height: 150, transposed: false, maxbins: null, aggregate: null, markChange: null },
    spec: bundle.targets[0].spec,
    rendered: bundle.targets[0].rendered,
    losses: {
      identification: { perChannel: {}, total: ident },
      comparison: { perChannel: {}, total: comp },
      trend: { perChannel: {}, total: trend },
    },
    score: 0,
  };
}

describe("rerank", () => {
  it("reproduces the backend order for the bundle's own weights", () => {
    const stored = bundle.targets.map((t) => t.id);
    const reranked = rerank(bundle.targets, bundle.config.weights).map((t) => t.id);
    expect(reranked).toEqual(stored);
  });

  it("orders by id when all weights are zero", () => {
    const ids = rerank(bundle.targets, [0, 0, 0]).map((t) => t.id);
    expect(ids).toEqual([...ids].sort());
  });

  it("sorts by a single measure when selected", () => {
    const byTrend = rerank(bundle.targets, [1, 1, 1], "trend");
    const totals = byTrend.map((t) => t.losses.trend.total ?? Infinity);
    expect(totals).toEqual([...totals].sort((a, b) => a - b));
  });

  it("weighted score matches the hand formula", () => {
    const t = bundle.targets[3];
    const w = [0.2, 0.5, 0.9];
    const expected =
      0.2 * (t.losses.identification.total as number) +
      0.5 * (t.losses.comparison.total as number) +
      0.9 * (t.losses.trend.total as number);
    expect(weightedScore(t, w)).toBeCloseTo(expected, 12);
  });

  it("raising a weight never helps the lossier target (slider monotonicity)", () => {
    // identical losses except one measure where hi > lo
    for (const m of [0, 1, 2]) {
      const losses: [number, number, number] = [1, 2, 3];
      const lossesHi: [number, number, number] = [...losses];
      lossesHi[m] += 5;
      const lo = fakeTarget("a-lo", ...losses);
      const hi = fakeTarget("b-hi", ...lossesHi);
      for (let w = 0; w <= 1.0001; w += 0.1) {
        const weights: number[] = [1, 1, 1];
        weights[m] = w;
        const order = rerank([hi, lo], weights).map((t) => t.id);
        if (w > 0) {
          expect(order).toEqual(["a-lo", "b-hi"]);
        }
        // at w == 0 both score equally; the id tie-break keeps it total
        if (w === 0) {
          const scores = [weightedScore(lo, weights), weightedScore(hi, weights)];
          expect(scores[0]).toBeCloseTo(scores[1], 12);
        }
      }
    }
  });

  it("treats null totals as huge (flagged components sink)", () => {
    const flagged = fakeTarget("z-flagged", 0, 0, 0);
    flagged.losses.trend.total = null;
    const fine = fakeTarget("a-fine", 10, 10, 10);
    const order = rerank([flagged, fine], [1, 1, 1]).map((t) => t.id);
    expect(order).toEqual(["a-fine", "z-flagged"]);
  });
});
