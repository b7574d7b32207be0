/**
 * Pure HTML rendering of a ViewState. No client-side re-binning: the
 * overview sparkline and the expanded distribution both draw from the same
 * pre-binned histogram payload.
 */

import {
  categoricalSummary,
  ColumnProfile,
  isNumeric,
  numericSummary,
  TableProfile,
  temporalSummary,
} from './protocol.js';
import { colKey, highlightedColumns, hoverBinCount, ViewState, visibleBins } from './state.js';

const esc = (s: string): string =>
  s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');

const attr = (s: string): string => esc(s);

const fmt = (v: number | null): string => {
  if (v === null) return '–';
  if (Number.isInteger(v)) return String(v);
  return v.toPrecision(5).replace(/\.?0+$/, '');
};

const fmtDate = (epochMs: number): string =>
  new Date(epochMs).toISOString().slice(0, 10);

function sparkBars(
  counts: number[],
  start: number,
  end: number,
  table: string,
  column: string,
  cls: string
): string {
  const slice = counts.slice(start, end);
  const peak = Math.max(...slice, 1);
  const bars = slice
    .map((c, i) => {
      const bin = start + i;
      const h = Math.max(1, Math.round((c / peak) * 36));
      return (
        `<div class="bar" data-act="hover-bin" data-table="${attr(table)}" ` +
        `data-col="${attr(column)}" data-bin="${bin}" ` +
        `style="height:${h}px" title="${c}"></div>`
      );
    })
    .join('');
  return `<div class="${cls}" data-table="${attr(table)}" data-col="${attr(column)}">${bars}</div>`;
}

function numericDistribution(t: TableProfile, col: ColumnProfile): string {
  const hist = col.histogram!;
  const bars = hist.counts
    .map((c, i) => {
      const peak = Math.max(...hist.counts, 1);
      const h = Math.max(1, Math.round((c / peak) * 80));
      const lo = hist.bin_edges[i];
      const hi = hist.bin_edges[i + 1];
      return (
        `<div class="bar big" data-act="export-bin" data-table="${attr(t.table_name)}" ` +
        `data-col="${attr(col.name)}" data-bin="${i}" data-lo="${lo}" data-hi="${hi}" ` +
        `data-last="${i === hist.counts.length - 1}" style="height:${h}px"></div>`
      );
    })
    .join('');
  return `<div class="dist hist">${bars}</div>`;
}

function numericSummaryHtml(t: TableProfile, col: ColumnProfile): string {
  const s = numericSummary(col);
  const rows = [
    ['min', fmt(s.min)],
    ['q1', fmt(s.q1)],
    ['median', fmt(s.median)],
    ['q3', fmt(s.q3)],
    ['max', fmt(s.max)],
    ['mean', fmt(s.mean)],
    ['std', fmt(s.std)],
    ['pos / zero / neg', `${s.n_pos} / ${s.n_zero} / ${s.n_neg}`],
    ['sorted', s.sortedness],
  ]
    .map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`)
    .join('');
  const exp = (kind: string, label: string, count: number) =>
    `<button data-act="${kind}" data-table="${attr(t.table_name)}" ` +
    `data-col="${attr(col.name)}">${label}: ${count} → code</button>`;
  return (
    `<table class="facts">${rows}</table>` +
    `<div class="exports">${exp('export-sigma', '3σ outliers', s.outliers_sigma)}` +
    `${exp('export-iqr', '1.5·IQR outliers', s.outliers_iqr)}</div>`
  );
}

function categoricalDistribution(t: TableProfile, col: ColumnProfile): string {
  const s = categoricalSummary(col);
  const peak = Math.max(...s.top_values.map(([, c]) => c), 1);
  const rows = s.top_values
    .map(([v, c]) => {
      const w = Math.max(2, Math.round((c / peak) * 100));
      return (
        `<div class="topk-row" data-act="export-value" data-table="${attr(t.table_name)}" ` +
        `data-col="${attr(col.name)}" data-value="${attr(v)}">` +
        `<span class="topk-label">${esc(v)}</span>` +
        `<span class="topk-bar" style="width:${w}%"></span>` +
        `<span class="topk-count">${c}</span></div>`
      );
    })
    .join('');
  return `<div class="dist topk">${rows}</div>`;
}

function categoricalSummaryHtml(t: TableProfile, col: ColumnProfile): string {
  const s = categoricalSummary(col);
  const uniq = s.is_unique
    ? 'all values unique'
    : `${s.duplicate_rows} duplicate rows over ${s.cardinality} values`;
  const rows = [
    ['unique values', String(s.cardinality)],
    ['uniqueness', uniq],
    ['string length', `${fmt(s.strlen_min)} / ${fmt(s.strlen_mean)} / ${fmt(s.strlen_max)}`],
  ]
    .map(([k, v]) => `<tr><td>${k}</td><td>${esc(v)}</td></tr>`)
    .join('');
  return (
    `<table class="facts">${rows}</table>` +
    `<div class="exports"><button data-act="export-dups" data-table="${attr(t.table_name)}" ` +
    `data-col="${attr(col.name)}">inspect duplicates → code</button></div>`
  );
}

function temporalDistribution(st: ViewState, t: TableProfile, col: ColumnProfile): string {
  const hist = col.histogram!;
  const { start, end } = visibleBins(st, t.table_name, col.name, hist.counts);
  const zoomed = start !== 0 || end !== hist.counts.length;
  const reset = zoomed
    ? `<button data-act="zoom-reset" data-table="${attr(t.table_name)}" ` +
      `data-col="${attr(col.name)}">reset zoom</button>`
    : '';
  return (
    sparkBars(hist.counts, start, end, t.table_name, col.name, 'dist timeline') + reset
  );
}

function temporalSummaryHtml(col: ColumnProfile): string {
  const s = temporalSummary(col);
  const rows = [
    ['from', s.t_min === null ? '–' : fmtDate(s.t_min)],
    ['to', s.t_max === null ? '–' : fmtDate(s.t_max)],
    ['sorted', s.sortedness],
  ]
    .map(([k, v]) => `<tr><td>${k}</td><td>${v}</td></tr>`)
    .join('');
  return `<table class="facts">${rows}</table>`;
}

function overview(t: TableProfile, col: ColumnProfile): string {
  if (col.histogram && col.histogram.counts.length > 0) {
    return sparkBars(
      col.histogram.counts,
      0,
      col.histogram.counts.length,
      t.table_name,
      col.name,
      'spark'
    );
  }
  if (!isNumeric(col) && col.stype !== 'temporal') {
    const s = categoricalSummary(col);
    return `<span class="cardinality">${s.cardinality} unique</span>`;
  }
  return '';
}

function columnPanel(st: ViewState, t: TableProfile, col: ColumnProfile): string {
  const key = colKey(t.table_name, col.name);
  const open = st.openColumns.has(key);
  const summaryOpen = st.openSummaries.has(key);
  const highlighted = highlightedColumns(st).has(key);
  const nullPct = (col.null_fraction * 100).toFixed(1);
  let distribution = '';
  let summary = '';
  if (open) {
    if (isNumeric(col)) {
      distribution = numericDistribution(t, col);
      if (summaryOpen) summary = numericSummaryHtml(t, col);
    } else if (col.stype === 'temporal') {
      distribution = temporalDistribution(st, t, col);
      if (summaryOpen) summary = temporalSummaryHtml(col);
    } else {
      distribution = categoricalDistribution(t, col);
      if (summaryOpen) summary = categoricalSummaryHtml(t, col);
    }
    const plotBtn =
      `<button data-act="export-plot" data-table="${attr(t.table_name)}" ` +
      `data-col="${attr(col.name)}">chart → code</button>`;
    const toggle =
      `<button data-act="toggle-summary" data-table="${attr(t.table_name)}" ` +
      `data-col="${attr(col.name)}">${summaryOpen ? 'hide' : 'show'} summary</button>`;
    summary = `<div class="summary">${summary}${toggle}${plotBtn}</div>`;
  }
  return (
    `<div class="column${highlighted ? ' highlight' : ''}" data-key="${attr(key)}">` +
    `<div class="col-head" data-act="toggle-col" data-table="${attr(t.table_name)}" ` +
    `data-col="${attr(col.name)}">` +
    `<span class="col-name">${esc(col.name)}</span>` +
    `<span class="col-type">${col.stype}</span>` +
    `<span class="col-null">${nullPct}% null</span>` +
    `${overview(t, col)}</div>` +
    `${distribution}${summary}</div>`
  );
}

function tablePanel(st: ViewState, t: TableProfile): string {
  const open = st.openTables.has(t.table_name);
  const pinned = st.pins.has(t.table_name);
  const cols = open ? t.columns.map((c) => columnPanel(st, t, c)).join('') : '';
  return (
    `<div class="table${t.temporary ? ' temporary' : ''}" data-table="${attr(t.table_name)}">` +
    `<div class="table-head" data-act="toggle-table" data-table="${attr(t.table_name)}">` +
    `<span class="pin${pinned ? ' pinned' : ''}" data-act="toggle-pin" ` +
    `data-table="${attr(t.table_name)}">${pinned ? '★' : '☆'}</span>` +
    `<span class="t-name">${esc(t.table_name)}</span>` +
    `<span class="t-shape">${t.nrows} × ${t.ncols}</span></div>` +
    `${cols}</div>`
  );
}

export function renderSidebar(st: ViewState): string {
  const tooltip = hoverBinCount(st);
  const tip =
    tooltip === null ? '' : `<div class="tooltip">${tooltip} rows in bin</div>`;
  const sort =
    `<div class="sortbar">` +
    `<button data-act="sort-recency"${st.sortMode === 'recency' ? ' class="on"' : ''}>recent</button>` +
    `<button data-act="sort-alpha"${st.sortMode === 'alphabetical' ? ' class="on"' : ''}>a–z</button>` +
    `</div>`;
  return sort + tip + st.profiles.map((t) => tablePanel(st, t)).join('');
}

export function renderScrollback(st: ViewState): string {
  return st.scrollback
    .map(
      (e) =>
        `<div class="entry${e.ok ? '' : ' err'}"><pre>${esc(e.source)}</pre>` +
        `<div class="detail">${esc(e.detail)}</div></div>`
    )
    .join('');
}
