/**
 * Browser entry point: wires a WebSocket to the pure state/render modules.
 *
 * Event handling is fully delegated through data-act attributes, so the DOM
 * can be re-rendered wholesale on every state change. Exported snippets are
 * inserted into the console buffer at the cursor and never executed on the
 * user's behalf.
 */

import type { ExportRequest, ServerMessage, SnippetMessage } from './protocol.js';
import {
  applyUpdate,
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
  ViewState,
} from './state.js';
import { renderScrollback, renderSidebar } from './render.js';

let state: ViewState = initialState();
let msgSeq = 0;
// request id -> source text, so exec results can land in the scrollback
const pendingExec = new Map<string, string>();

const sidebar = () => document.getElementById('sidebar')!;
const scrollbackEl = () => document.getElementById('scrollback')!;
const consoleEl = () => document.getElementById('console') as HTMLTextAreaElement;

function connect(): WebSocket {
  const proto = location.protocol === 'https:' ? 'wss' : 'ws';
  const ws = new WebSocket(`${proto}://${location.host}/ws`);
  ws.onopen = () => {
    // updates are computed only while a subscriber is attached; tell the
    // server when this tab stops looking
    send(ws, { type: 'subscribe' });
  };
  ws.onmessage = (ev) => {
    const msg = JSON.parse(ev.data) as ServerMessage;
    state = reduce(state, msg);
    redraw();
  };
  ws.onclose = () => {
    setTimeout(() => {
      socket = connect();
    }, 1000);
  };
  document.addEventListener('visibilitychange', () => {
    if (ws.readyState !== WebSocket.OPEN) return;
    send(ws, { type: document.hidden ? 'unsubscribe' : 'subscribe' });
  });
  return ws;
}

function send(ws: WebSocket, msg: Record<string, unknown>): string {
  const id = `m${msgSeq++}`;
  ws.send(JSON.stringify({ id, ...msg }));
  return id;
}

/** Fold one server message into the view state. */
export function reduce(st: ViewState, msg: ServerMessage): ViewState {
  if (msg.type === 'profiles' || msg.type === 'removed') {
    return applyUpdate(st, msg);
  }
  if (msg.type === 'exec_result') {
    const source = msg.id !== undefined ? pendingExec.get(msg.id) : undefined;
    if (source === undefined) return st;
    if (msg.id !== undefined) pendingExec.delete(msg.id);
    const detail = msg.ok
      ? (msg.plots ?? []).map((p) => `plot ${p.table}.${p.column} (${p.kind})`).join('; ')
      : `${msg.error?.kind}: ${msg.error?.message}`;
    return pushScrollback(st, source, msg.ok, detail);
  }
  if (msg.type === 'snippet') {
    return insertSnippet(st, (msg as SnippetMessage).text);
  }
  if (msg.type === 'error') {
    return pushScrollback(st, '', false, `${msg.kind}: ${msg.message}`);
  }
  return st;
}

function redraw(): void {
  sidebar().innerHTML = renderSidebar(state);
  scrollbackEl().innerHTML = renderScrollback(state);
  const c = consoleEl();
  if (c.value !== state.consoleBuffer) {
    c.value = state.consoleBuffer;
    c.selectionStart = c.selectionEnd = state.cursor;
  }
}

function requestExport(req: ExportRequest): void {
  send(socket, { type: 'export', request: req });
}

function execute(source: string): void {
  if (!source.trim()) return;
  const id = send(socket, { type: 'exec', source });
  pendingExec.set(id, source);
}

function onSidebarClick(ev: MouseEvent): void {
  const el = (ev.target as HTMLElement).closest('[data-act]') as HTMLElement | null;
  if (!el) return;
  const act = el.dataset.act!;
  const table = el.dataset.table ?? '';
  const col = el.dataset.col ?? '';
  switch (act) {
    case 'toggle-table':
      state = toggleTable(state, table);
      break;
    case 'toggle-pin': {
      ev.stopPropagation();
      const pinned = !state.pins.has(table);
      const pins = new Set(state.pins);
      pinned ? pins.add(table) : pins.delete(table);
      state = { ...state, pins };
      send(socket, { type: 'pin', table, pinned });
      break;
    }
    case 'toggle-col':
      state = toggleColumn(state, table, col);
      break;
    case 'toggle-summary':
      state = toggleSummary(state, table, col);
      break;
    case 'sort-recency':
      state = { ...state, sortMode: 'recency' };
      send(socket, { type: 'sort', mode: 'recency' });
      break;
    case 'sort-alpha':
      state = { ...state, sortMode: 'alphabetical' };
      send(socket, { type: 'sort', mode: 'alphabetical' });
      break;
    case 'export-value':
      requestExport({
        kind: 'cat_value',
        table,
        column: col,
        params: { value: el.dataset.value ?? null },
      });
      break;
    case 'export-bin':
      requestExport({
        kind: 'num_range',
        table,
        column: col,
        params: {
          lo: Number(el.dataset.lo),
          hi: Number(el.dataset.hi),
          last_bin: el.dataset.last === 'true',
        },
      });
      break;
    case 'export-sigma':
      requestExport({ kind: 'outliers_sigma', table, column: col });
      break;
    case 'export-iqr':
      requestExport({ kind: 'outliers_iqr', table, column: col });
      break;
    case 'export-dups':
      requestExport({ kind: 'duplicates', table, column: col });
      break;
    case 'export-plot':
      requestExport({ kind: 'plot', table, column: col });
      break;
    case 'zoom-reset':
      state = setZoom(state, table, col, null);
      break;
    default:
      return;
  }
  redraw();
}

function onSidebarHover(ev: MouseEvent): void {
  const el = (ev.target as HTMLElement).closest('[data-act="hover-bin"], .col-head') as
    | HTMLElement
    | null;
  if (!el) {
    if (state.hover !== null) {
      state = unhover(state);
      redraw();
    }
    return;
  }
  const table = el.dataset.table ?? '';
  const col = el.dataset.col ?? '';
  const bin = el.dataset.bin !== undefined ? Number(el.dataset.bin) : undefined;
  state = hoverColumn(state, table, col, bin);
  redraw();
}

function onConsoleKey(ev: KeyboardEvent): void {
  const c = consoleEl();
  if (ev.key === 'Enter' && (ev.ctrlKey || ev.metaKey)) {
    ev.preventDefault();
    execute(c.value);
    return;
  }
  queueMicrotask(() => {
    state = setConsole(state, c.value, c.selectionStart ?? c.value.length);
  });
}

let socket: WebSocket;

export function main(): void {
  socket = connect();
  sidebar().addEventListener('click', onSidebarClick);
  sidebar().addEventListener('mouseover', onSidebarHover);
  const c = consoleEl();
  c.addEventListener('keydown', onConsoleKey);
  c.addEventListener('click', () => {
    state = setConsole(state, c.value, c.selectionStart ?? 0);
  });
  document.getElementById('run')!.addEventListener('click', () => execute(consoleEl().value));
  document.getElementById('reset')!.addEventListener('click', () => {
    send(socket, { type: 'reset' });
  });
  redraw();
}

if (typeof document !== 'undefined' && document.getElementById('sidebar')) {
  main();
}
