import { ConsoleApi } from "./api.js";
import { loadDashboard } from "./dashboard.js";
import { byId, clear, el } from "./dom.js";
import { OrderEntry } from "./orderEntry.js";
import { QcWorkbench } from "./qcWorkbench.js";
import { ConsoleSession } from "./session.js";

const api = new ConsoleApi("");
const operatorId =
  new URLSearchParams(window.location.search).get("operator") ?? "operator-1";
const session = new ConsoleSession(operatorId);

const workbench = new QcWorkbench(
  api,
  session,
  byId("qc-tasks"),
  byId("qc-detail"),
  byId("qc-notice"),
);
const entry = new OrderEntry(api, byId("order-entry"), byId("oe-notice"),
                             operatorId);
entry.render();
byId("operator-label").textContent = `operator: ${operatorId}`;

async function renderDashboard(): Promise<void> {
  const data = await loadDashboard(api);
  const pending = byId("dash-pending");
  clear(pending);
  for (const { center, count } of data.pendingByCenter) {
    pending.append(
      el("tr", {}, [el("td", {}, [center]), el("td", {}, [String(count)])]),
    );
  }
  byId("dash-total").textContent = String(data.pendingTotal);
  byId("dash-completed").textContent = String(data.completedToday);
  const tat = byId("dash-tat");
  clear(tat);
  for (const row of data.tatByCenter) {
    tat.append(
      el("tr", {}, [
        el("td", {}, [row.center]),
        el("td", {}, [String(row.visits)]),
        el("td", {}, [row.meanSeconds.toFixed(1)]),
      ]),
    );
  }
}

async function poll(): Promise<void> {
  session.lastPollAt = Date.now();
  try {
    await workbench.refresh();
    await renderDashboard();
    byId("conn-state").textContent = "connected";
  } catch (error) {
    byId("conn-state").textContent = `offline (${String(error)})`;
  }
}

void poll();
window.setInterval(() => {
  void poll();
}, session.pollIntervalMs);
