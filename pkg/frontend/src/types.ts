/** Wire types of the gallery bundle produced by the ranking backend. */

export interface FieldDef {
  name: string;
  kind: "continuous" | "nominal" | "temporal";
}

export interface EncodingDef {
  field: string;
  bin?: { maxbins: number };
  aggregate?: "count" | "mean" | "median" | "sum";
  scheme?: string;
}

export interface ChartSpec {
  mark: "point" | "bar" | "line" | "rect";
  width: number;
  height: number;
  data: { url: string; fields: FieldDef[] };
  encoding: Record<string, EncodingDef>;
}

export interface RenderedTupleDump {
  x: number;
  y: number;
  lab?: [number, number, number];
  size?: number;
  shape?: string;
  group?: string;
}

export interface RenderedDump {
  spec: ChartSpec;
  tuples: RenderedTupleDump[];
}

export interface LossBlock {
  perChannel: Record<string, number | null>;
  total: number | null;
}

export interface LossReportDump {
  identification: LossBlock;
  comparison: LossBlock;
  trend: LossBlock;
  flags?: string[];
}

export interface TransformDescriptorDump {
  height: number;
  transposed: boolean;
  maxbins: number | null;
  aggregate: string | null;
  markChange: string | null;
}

export interface TargetDump {
  id: string;
  descriptor: TransformDescriptorDump;
  spec: ChartSpec;
  rendered: RenderedDump;
  losses: LossReportDump;
  score: number;
}

export interface GalleryBundle {
  config: { mode: string; seed: number; targetWidth: number; weights: number[] };
  source: { id: string; spec: ChartSpec; rendered: RenderedDump };
  targets: TargetDump[];
}

export type SortKey = "score" | "identification" | "comparison" | "trend";

export interface GallerySession {
  bundle: GalleryBundle;
  weights: [number, number, number];
  selection: string | null;
  sortKey: SortKey;
}
