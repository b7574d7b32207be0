import { describe, expect, it } from 'vitest';

import type { ColumnProfile, ProfilesMessage, TableProfile } from './protocol.js';
import {
  applyUpdate,
  colKey,
  highlightedColumns,
  hoverBinCount,
  hoverColumn,
  initialState,
  insertSnippet,
  pushScrollback,
  setConsole,
  setZoom,
  toggleColumn,
  toggleSummary,
  toggleTable,
  unhover,
  visibleBins,
} from './state.js';

function numCol(name: string, counts: number[] = [3, 5, 2]): ColumnProfile {
  return {
    name,
    stype: 'integer',
    null_fraction: 0,
    histogram: { bin_edges: [0, 1, 2, 3].slice(0, counts.length + 1), counts, n_null: 0 },
    summary: {
      min: 0, q1: 0.5, median: 1, q3: 1.5, max: 2, mean: 1, std: 0.8,
      n_pos: 9, n_zero: 1, n_neg: 0, sortedness: 'unsorted',
      outliers_sigma: 0, outliers_iqr: 0,
    },
  };
}

function catCol(name: string): ColumnProfile {
  return {
    name,
    stype: 'categorical',
    null_fraction: 0.1,
    summary: {
      cardinality: 3,
      top_values: [['a', 5], ['b', 3], ['c', 1]],
      n_null: 1,
      duplicate_rows: 6,
      is_unique: false,
      strlen_min: 1, strlen_mean: 1, strlen_max: 1,
    },
  };
}

function table(name: string, epoch: number, cols: ColumnProfile[]): TableProfile {
  return {
    table_name: name,
    nrows: 10,
    ncols: cols.length,
    epoch,
    fingerprint: { hash: 'abc', nrows: 10, ncols: cols.length },
    temporary: false,
    columns: cols,
  };
}

const profilesMsg = (epoch: number, profiles: TableProfile[]): ProfilesMessage => ({
  type: 'profiles',
  epoch,
  profiles,
});

describe('applyUpdate', () => {
  it('stores pushed profiles and the epoch', () => {
    const st = applyUpdate(initialState(), profilesMsg(3, [table('df', 3, [numCol('x')])]));
    expect(st.profiles.map((p) => p.table_name)).toEqual(['df']);
    expect(st.lastEpoch).toBe(3);
  });

  it('ignores a stale push with a lower epoch', () => {
    let st = applyUpdate(initialState(), profilesMsg(5, [table('new', 5, [numCol('x')])]));
    st = applyUpdate(st, profilesMsg(2, [table('old', 2, [numCol('x')])]));
    expect(st.profiles[0].table_name).toBe('new');
    expect(st.lastEpoch).toBe(5);
  });

  it('keeps the server-sent order verbatim', () => {
    const msg = profilesMsg(1, [
      table('zeta', 1, [numCol('x')]),
      table('alpha', 0, [numCol('x')]),
    ]);
    const st = applyUpdate(initialState(), msg);
    expect(st.profiles.map((p) => p.table_name)).toEqual(['zeta', 'alpha']);
  });

  it('preserves open state across updates for surviving columns', () => {
    let st = applyUpdate(initialState(), profilesMsg(1, [table('df', 1, [numCol('x'), numCol('y')])]));
    st = toggleTable(st, 'df');
    st = toggleColumn(st, 'df', 'x');
    st = applyUpdate(st, profilesMsg(2, [table('df', 2, [numCol('x')])]));
    expect(st.openTables.has('df')).toBe(true);
    expect(st.openColumns.has(colKey('df', 'x'))).toBe(true);
  });

  it('prunes state for columns that no longer exist', () => {
    let st = applyUpdate(initialState(), profilesMsg(1, [table('df', 1, [numCol('x')])]));
    st = toggleColumn(st, 'df', 'x');
    st = toggleSummary(st, 'df', 'x');
    st = setZoom(st, 'df', 'x', [1, 2]);
    st = hoverColumn(st, 'df', 'x', 0);
    st = applyUpdate(st, profilesMsg(2, [table('df', 2, [numCol('z')])]));
    expect(st.openColumns.size).toBe(0);
    expect(st.openSummaries.size).toBe(0);
    expect(st.zoom.size).toBe(0);
    expect(st.hover).toBeNull();
  });

  it('drops removed tables and their open state', () => {
    let st = applyUpdate(initialState(), profilesMsg(1, [table('df', 1, [numCol('x')])]));
    st = toggleTable(st, 'df');
    st = applyUpdate(st, { type: 'removed', epoch: 2, names: ['df'] });
    expect(st.profiles).toEqual([]);
    expect(st.openTables.size).toBe(0);
    expect(st.lastEpoch).toBe(2);
  });
});

describe('toggles', () => {
  it('toggleTable flips membership', () => {
    let st = toggleTable(initialState(), 'df');
    expect(st.openTables.has('df')).toBe(true);
    st = toggleTable(st, 'df');
    expect(st.openTables.has('df')).toBe(false);
  });

  it('toggleColumn and toggleSummary are independent per (table, column)', () => {
    let st = toggleColumn(initialState(), 'a', 'x');
    st = toggleSummary(st, 'b', 'x');
    expect(st.openColumns.has(colKey('a', 'x'))).toBe(true);
    expect(st.openColumns.has(colKey('b', 'x'))).toBe(false);
    expect(st.openSummaries.has(colKey('b', 'x'))).toBe(true);
  });
});

describe('hover', () => {
  it('highlights columns with the same name across tables', () => {
    let st = applyUpdate(initialState(), profilesMsg(1, [
      table('a', 1, [numCol('price'), numCol('qty')]),
      table('b', 0, [numCol('price')]),
    ]));
    st = hoverColumn(st, 'a', 'price');
    expect(highlightedColumns(st)).toEqual(new Set([colKey('a', 'price'), colKey('b', 'price')]));
    st = unhover(st);
    expect(highlightedColumns(st).size).toBe(0);
  });

  it('hoverBinCount reads the count straight from the histogram payload', () => {
    let st = applyUpdate(initialState(), profilesMsg(1, [table('df', 1, [numCol('x', [7, 11, 4])])]));
    st = hoverColumn(st, 'df', 'x', 1);
    expect(hoverBinCount(st)).toBe(11);
    st = hoverColumn(st, 'df', 'x', 9);
    expect(hoverBinCount(st)).toBeNull();
  });
});

describe('console', () => {
  it('insertSnippet inserts at the cursor without clobbering existing text', () => {
    let st = setConsole(initialState(), 'first line\nsecond', 11);
    st = insertSnippet(st, 'x = head df 5');
    expect(st.consoleBuffer).toBe('first line\nx = head df 5\nsecond');
    expect(st.cursor).toBe('first line\nx = head df 5\n'.length);
  });

  it('pushScrollback records the entry and clears the buffer', () => {
    let st = setConsole(initialState(), 'x = head df 5', 5);
    st = pushScrollback(st, 'x = head df 5', true, 'ok');
    expect(st.scrollback).toHaveLength(1);
    expect(st.scrollback[0]).toEqual({ source: 'x = head df 5', ok: true, detail: 'ok' });
    expect(st.consoleBuffer).toBe('');
  });
});

describe('temporal zoom', () => {
  it('restricts rendered bins without touching the payload', () => {
    const counts = [1, 2, 3, 4, 5, 6];
    let st = setZoom(initialState(), 'df', 'ts', [2, 4]);
    expect(visibleBins(st, 'df', 'ts', counts)).toEqual({ start: 2, end: 5 });
    expect(counts).toHaveLength(6);
    st = setZoom(st, 'df', 'ts', null);
    expect(visibleBins(st, 'df', 'ts', counts)).toEqual({ start: 0, end: 6 });
  });

  it('normalizes an inverted brush', () => {
    const st = setZoom(initialState(), 'df', 'ts', [4, 1]);
    expect(visibleBins(st, 'df', 'ts', [0, 0, 0, 0, 0, 0])).toEqual({ start: 1, end: 5 });
  });
});

describe('renderSidebar smoke', () => {
  it('renders expanded distributions from the pre-binned payload', async () => {
    const { renderSidebar } = await import('./render.js');
    let st = applyUpdate(initialState(), profilesMsg(1, [
      table('df', 1, [numCol('x', [7, 11, 4]), catCol('county')]),
    ]));
    st = toggleTable(st, 'df');
    st = toggleColumn(st, 'df', 'x');
    st = toggleColumn(st, 'df', 'county');
    const html = renderSidebar(st);
    expect(html).toContain('df');
    // one big bar per histogram bin, no client-side re-binning
    expect((html.match(/class="bar big"/g) ?? []).length).toBe(3);
    // every top-k value renders as an exportable row
    expect((html.match(/data-act="export-value"/g) ?? []).length).toBe(3);
    expect(html).toContain('data-value="a"');
  });
});
