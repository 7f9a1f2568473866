/** Review flow: fetch queue, show items, collect verdicts, recompute.
 *
 * Keyboard-first: verifying a hundred calibration images has to be fast.
 *   a      accept the original label as the verdict
 *   1..9   toggle the nth candidate label
 *   n      select "none apply" (empty verdict)
 *   enter  submit the current selection
 *   s      skip to the next item
 *   r      recompute expertise and the report from the verdict log
 *
 * Selections survive fetch failures; a banner offers retry instead of
 * dropping state. A verdict only counts as submitted once the server echoes
 * the appended record, and the queue is re-fetched to confirm.
 */

import { ApiError, ReviewClient } from "./api.js";
import {
  renderBanner,
  renderCompletion,
  renderItem,
  renderQueueStatus,
  renderReport,
  renderSelection,
} from "./render.js";
import type { QueueItem, ReviewItem } from "./types.js";

interface AppState {
  queue: QueueItem[];
  position: number;
  item: ReviewItem | null;
  selection: Set<string>;
  filter: string;
  busy: boolean;
  lastSubmitted: string | null;
}

const client = new ReviewClient("");
const state: AppState = {
  queue: [],
  position: 0,
  item: null,
  selection: new Set(),
  filter: "",
  busy: false,
  lastSubmitted: null,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function showBanner(message: string, retry: () => void): void {
  const banner = el("banner-slot");
  banner.innerHTML = renderBanner(message);
  const button = document.getElementById("retry");
  if (button) {
    button.addEventListener("click", () => {
      banner.innerHTML = "";
      retry();
    });
  }
}

async function guarded(action: () => Promise<void>, retry: () => void): Promise<void> {
  try {
    await action();
  } catch (error) {
    const message =
      error instanceof ApiError
        ? `service error (${error.status}): ${error.message}`
        : `service unreachable: ${String(error)}`;
    showBanner(message, retry);
  }
}

async function loadQueue(): Promise<void> {
  await guarded(async () => {
    state.queue = await client.queue();
    state.position = 0;
    await loadCurrent();
  }, () => void loadQueue());
}

async function loadCurrent(): Promise<void> {
  if (state.position >= state.queue.length) {
    state.item = null;
    el("item-slot").innerHTML = renderCompletion();
    el("status-line").textContent = "queue empty";
    return;
  }
  const next = state.queue[state.position]!;
  await guarded(async () => {
    state.item = await client.item(next.image_id);
    state.selection = new Set();
    state.filter = "";
    paint();
  }, () => void loadCurrent());
}

function paint(): void {
  if (!state.item) return;
  el("item-slot").innerHTML = renderItem(state.item, state.selection, state.filter);
  el("status-line").textContent = renderQueueStatus(state.position, state.queue);
  bindItemEvents();
}

function paintSelectionOnly(): void {
  // cheap refresh that keeps the filter input focused while typing
  if (!state.item) return;
  const line = document.querySelector(".selection-line");
  if (line) line.innerHTML = `selection: ${renderSelection(state.selection)}`;
  document.querySelectorAll<HTMLElement>(".candidate").forEach((node) => {
    node.classList.toggle("selected", state.selection.has(node.dataset.label ?? ""));
  });
  document.querySelectorAll<HTMLElement>(".vocab-option").forEach((node) => {
    node.classList.toggle("selected", state.selection.has(node.dataset.label ?? ""));
  });
}

function toggle(label: string): void {
  if (state.selection.has(label)) {
    state.selection.delete(label);
  } else {
    state.selection.add(label);
  }
  paintSelectionOnly();
}

function bindItemEvents(): void {
  document.querySelectorAll<HTMLElement>(".candidate, .vocab-option").forEach((node) => {
    node.addEventListener("click", () => {
      const label = node.dataset.label;
      if (label) toggle(label);
    });
  });
  const filter = document.getElementById("vocab-filter") as HTMLInputElement | null;
  if (filter) {
    filter.addEventListener("input", () => {
      state.filter = filter.value;
      const grid = document.querySelector(".vocab-grid");
      if (grid && state.item) {
        grid.innerHTML = renderItem(state.item, state.selection, state.filter)
          .split('<div class="vocab-grid">')[1]!
          .split("</div>")[0]!;
        bindVocabOnly();
      }
    });
  }
}

function bindVocabOnly(): void {
  document.querySelectorAll<HTMLElement>(".vocab-option").forEach((node) => {
    node.addEventListener("click", () => {
      const label = node.dataset.label;
      if (label) toggle(label);
    });
  });
}

async function submit(labels: string[]): Promise<void> {
  if (!state.item || state.busy) return;
  const imageId = state.item.image_id;
  state.busy = true;
  await guarded(
    async () => {
      const record = await client.submitVerdict({
        image_id: imageId,
        labels,
        reviewer: reviewerName(),
      });
      state.lastSubmitted = record.image_id;
      // confirm by re-fetch: the submitted item must be gone from the queue
      state.queue = await client.queue();
      state.position = 0;
      state.busy = false;
      await loadCurrent();
    },
    () => {
      state.busy = false;
      void submit(labels);
    },
  );
  state.busy = false;
}

function reviewerName(): string {
  const input = document.getElementById("reviewer") as HTMLInputElement | null;
  return input?.value.trim() || "reviewer";
}

async function recompute(): Promise<void> {
  await guarded(async () => {
    const result = await client.recompute();
    el("report-slot").innerHTML = renderReport(result.report, result.expertise);
  }, () => void recompute());
}

async function refreshReport(): Promise<void> {
  await guarded(async () => {
    const [report, expertise] = await Promise.all([client.report(), client.expertise()]);
    el("report-slot").innerHTML = renderReport(report, expertise);
  }, () => void refreshReport());
}

function onKey(event: KeyboardEvent): void {
  const active = document.activeElement;
  if (active instanceof HTMLInputElement) return; // typing in the filter
  if (!state.item) {
    if (event.key === "r") void recompute();
    return;
  }
  if (event.key >= "1" && event.key <= "9") {
    const index = Number(event.key) - 1;
    const entry = state.item.labels[index];
    if (entry) toggle(entry.label);
  } else if (event.key === "a") {
    void submit([state.item.original]);
  } else if (event.key === "n") {
    void submit([]);
  } else if (event.key === "Enter") {
    void submit([...state.selection]);
  } else if (event.key === "s") {
    state.position += 1;
    void loadCurrent();
  } else if (event.key === "r") {
    void recompute();
  }
}

export function start(): void {
  document.addEventListener("keydown", onKey);
  el("recompute-button").addEventListener("click", () => void recompute());
  el("submit-button").addEventListener("click", () => void submit([...state.selection]));
  el("none-button").addEventListener("click", () => void submit([]));
  el("accept-button").addEventListener("click", () => {
    if (state.item) void submit([state.item.original]);
  });
  el("skip-button").addEventListener("click", () => {
    state.position += 1;
    void loadCurrent();
  });
  void loadQueue();
  void refreshReport();
}

start();
