export type SetLabel = "train" | "val" | "test";
export type DisplayLabel = SetLabel | "unassigned";

export interface RegionRecord {
  name: string;
  map_id: string;
  set: SetLabel;
  priority: number;
  polygon: [number, number][];
}

export interface ProjectInfo {
  name: string;
  revision: number;
  sample_count: number;
  sequence_count: number;
  maps: string[];
  attr_keys: string[];
}

export interface SamplePoint {
  id: string;
  x: number;
  y: number;
  set: DisplayLabel;
}

export interface SampleView {
  map_id: string;
  revision: number;
  total: number;
  returned: number;
  samples: SamplePoint[];
}

export interface RegionsView {
  revision: number;
  regions: RegionRecord[];
}

export interface BalanceRatios {
  [value: string]: { [group: string]: number | null };
}

export interface AttributeBalance {
  key: string;
  coverage: { [group: string]: number };
  ratios: BalanceRatios;
}

export interface StatsDone {
  state: "done";
  revision: number;
  counts: { [label: string]: number };
  proportions: { [label: string]: number };
  leakage_at_5m: { val: number | null; test: number | null } | null;
  balance: { attributes: AttributeBalance[] };
  cut_sequences: number;
}

export interface StatsPending {
  state: "pending";
  revision: number;
}

export interface StatsSuperseded {
  state: "superseded";
  revision: number;
  current_revision: number;
}

export type StatsResponse = StatsDone | StatsPending | StatsSuperseded;

export interface ExportResult {
  revision: number;
  out_dir: string;
  files: string[];
  counts: { [label: string]: number };
  cut_sequences: number;
}
