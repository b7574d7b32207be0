/** Wire types for the line-delimited JSON protocol served over /ws. */

export interface HistogramPayload {
  bin_edges: number[];
  counts: number[];
  n_null: number;
}

export interface NumericSummaryPayload {
  min: number | null;
  q1: number | null;
  median: number | null;
  q3: number | null;
  max: number | null;
  mean: number | null;
  std: number | null;
  n_pos: number;
  n_zero: number;
  n_neg: number;
  sortedness: string;
  outliers_sigma: number;
  outliers_iqr: number;
}

export interface CategoricalSummaryPayload {
  cardinality: number;
  top_values: [string, number][];
  n_null: number;
  duplicate_rows: number;
  is_unique: boolean;
  strlen_min: number | null;
  strlen_mean: number | null;
  strlen_max: number | null;
}

export interface TemporalSummaryPayload {
  t_min: number | null;
  t_max: number | null;
  sortedness: string;
}

export interface ColumnProfile {
  name: string;
  stype: 'boolean' | 'integer' | 'float' | 'temporal' | 'categorical';
  null_fraction: number;
  histogram?: HistogramPayload;
  summary:
    | NumericSummaryPayload
    | CategoricalSummaryPayload
    | TemporalSummaryPayload;
}

export interface TableProfile {
  table_name: string;
  nrows: number;
  ncols: number;
  epoch: number;
  fingerprint: { hash: string; nrows: number; ncols: number };
  temporary: boolean;
  columns: ColumnProfile[];
}

export interface ProfilesMessage {
  type: 'profiles';
  id?: string;
  epoch: number;
  profiles: TableProfile[];
}

export interface RemovedMessage {
  type: 'removed';
  epoch: number;
  names: string[];
}

export interface ExecResultMessage {
  type: 'exec_result';
  id?: string;
  ok: boolean;
  error?: { kind: string; message: string; span?: { line: number; col: number } };
  plots?: { table: string; column: string; kind: string }[];
}

export interface SnippetMessage {
  type: 'snippet';
  id?: string;
  text: string;
  new_name: string;
}

export interface ErrorMessage {
  type: 'error';
  id?: string;
  kind: string;
  message: string;
}

export type ServerMessage =
  | ProfilesMessage
  | RemovedMessage
  | ExecResultMessage
  | SnippetMessage
  | ErrorMessage;

export interface ExportRequest {
  kind:
    | 'cat_value'
    | 'num_range'
    | 'outliers_sigma'
    | 'outliers_iqr'
    | 'duplicates'
    | 'plot';
  table: string;
  column: string;
  params?: {
    value?: string | null;
    lo?: number;
    hi?: number;
    last_bin?: boolean;
  };
}

export function isNumeric(col: ColumnProfile): boolean {
  return col.stype === 'integer' || col.stype === 'float';
}

export function numericSummary(col: ColumnProfile): NumericSummaryPayload {
  return col.summary as NumericSummaryPayload;
}

export function categoricalSummary(col: ColumnProfile): CategoricalSummaryPayload {
  return col.summary as CategoricalSummaryPayload;
}

export function temporalSummary(col: ColumnProfile): TemporalSummaryPayload {
  return col.summary as TemporalSummaryPayload;
}
