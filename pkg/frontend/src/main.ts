import { ApiClient } from "./api.js";
import { resolveApiBase } from "./config.js";
import { canSubmit, CaseFormState, emptyForm, toRequest } from "./form.js";
import { QueueController } from "./queue.js";
import { renderNotice, renderOutcome, renderQueueItem } from "./render.js";
import { ReviewItem } from "./types.js";

const api = new ApiClient(resolveApiBase());

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

// ---------------------------------------------------------------------------
// Tabs
// ---------------------------------------------------------------------------

function showTab(name: "submit" | "queue"): void {
  byId("panel-submit").hidden = name !== "submit";
  byId("panel-queue").hidden = name !== "queue";
  byId("tab-submit").classList.toggle("active", name === "submit");
  byId("tab-queue").classList.toggle("active", name === "queue");
  if (name === "queue") void queue.refresh().catch(showQueueError);
}

// ---------------------------------------------------------------------------
// Case form
// ---------------------------------------------------------------------------

const state: CaseFormState = emptyForm();

function syncForm(): void {
  state.symptomText = byId<HTMLTextAreaElement>("symptom-text").value;
  state.temperature = byId<HTMLInputElement>("vital-temperature").value;
  state.spo2 = byId<HTMLInputElement>("vital-spo2").value;
  state.heartRate = byId<HTMLInputElement>("vital-heart-rate").value;
  state.age = byId<HTMLInputElement>("vital-age").value;
  state.sex = byId<HTMLSelectElement>("vital-sex").value;
  byId<HTMLButtonElement>("submit-case").disabled = !canSubmit(state);
}

async function submitCase(event: Event): Promise<void> {
  event.preventDefault();
  syncForm();
  const zone = byId("outcome-zone");
  const parsed = toRequest(state);
  if (!parsed.request) {
    clear(zone);
    for (const message of parsed.errors) zone.appendChild(renderNotice(message, "error"));
    return;
  }
  state.submitting = true;
  syncFormDisabled();
  try {
    const outcome = await api.submitCase(parsed.request);
    clear(zone);
    zone.appendChild(renderOutcome(outcome));
    if (outcome.status === "flagged") {
      const link = document.createElement("a");
      link.href = "#queue";
      link.textContent = "Open the review queue";
      link.addEventListener("click", (clickEvent) => {
        clickEvent.preventDefault();
        showTab("queue");
      });
      zone.appendChild(link);
    }
  } catch (error) {
    clear(zone);
    const detail = error instanceof Error ? error.message : String(error);
    zone.appendChild(renderNotice(`submission failed: ${detail}`, "error"));
  } finally {
    state.submitting = false;
    syncFormDisabled();
  }
}

function syncFormDisabled(): void {
  byId<HTMLButtonElement>("submit-case").disabled = !canSubmit(state);
}

// ---------------------------------------------------------------------------
// Queue
// ---------------------------------------------------------------------------

function renderQueue(items: ReviewItem[]): void {
  const pendingZone = byId("queue-pending");
  const resolvedZone = byId("queue-resolved");
  clear(pendingZone);
  clear(resolvedZone);
  const handlers = {
    onResolve: (item: ReviewItem, action: "confirm_label" | "override_label",
                label: string, notes: string, resolver: string) => {
      const resolution: { action: typeof action; label?: string; notes?: string } =
        { action };
      if (label.trim()) resolution.label = label.trim();
      if (notes.trim()) resolution.notes = notes.trim();
      void queue.resolve(item, resolution, resolver);
    },
  };
  for (const item of items) {
    const node = renderQueueItem(item, handlers);
    (item.status === "pending" ? pendingZone : resolvedZone).appendChild(node);
  }
  byId("queue-pending-count").textContent = String(
    items.filter((i) => i.status === "pending").length);
}

function showQueueError(error: unknown): void {
  const detail = error instanceof Error ? error.message : String(error);
  byId("queue-notices").appendChild(renderNotice(`queue load failed: ${detail}`, "error"));
}

const queue = new QueueController(api, {
  onChange: renderQueue,
  onNotice: (message, kind) => {
    const zone = byId("queue-notices");
    clear(zone);
    zone.appendChild(renderNotice(message, kind));
  },
});

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

export function start(): void {
  byId("case-form").addEventListener("submit", submitCase);
  for (const id of ["symptom-text", "vital-temperature", "vital-spo2",
                    "vital-heart-rate", "vital-age", "vital-sex"]) {
    byId(id).addEventListener("input", syncForm);
  }
  byId("tab-submit").addEventListener("click", () => showTab("submit"));
  byId("tab-queue").addEventListener("click", () => showTab("queue"));
  syncForm();
  showTab("submit");
  void api.health()
    .then((info) => {
      byId("backend-info").textContent =
        `service ok - ${info.classes} classes - ${info.kernel_backend} kernels`;
    })
    .catch(() => {
      byId("backend-info").textContent = "service unreachable";
    });
}

if (typeof document !== "undefined" && document.getElementById("case-form")) {
  start();
}
