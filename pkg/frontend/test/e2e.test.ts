/**
 * Scripted console session against a real server (the secondary-loop check).
 *
 * Needs a live-mode process started with --manual-qc, e.g. via
 * scripts/run_e2e.sh, and ORBITFLOW_BASE_URL pointing at it.  The session
 * uses exactly the modules the browser UI runs: validation before submit,
 * the typed API client, the reject-target rule, and the dashboard loader,
 * whose counts are compared with the raw pending report at every poll.
 */

import { describe, expect, it } from "vitest";

import { ConsoleApi } from "../src/api.js";
import { loadDashboard } from "../src/dashboard.js";
import { rejectTargets } from "../src/planRules.js";
import { freshRequestId } from "../src/session.js";
import { toSpecPayload, validateOrderForm } from "../src/validation.js";

const BASE_URL = process.env.ORBITFLOW_BASE_URL ?? "";
const OPERATOR = "e2e-operator";

const maybe = BASE_URL ? describe : describe.skip;

async function pollUntil<T>(
  what: string,
  fn: () => Promise<T | null>,
  attempts = 80,
  delayMs = 250,
): Promise<T> {
  for (let i = 0; i < attempts; i += 1) {
    const value = await fn();
    if (value !== null) {
      return value;
    }
    await new Promise((resolve) => setTimeout(resolve, delayMs));
  }
  throw new Error(`timed out waiting for ${what}`);
}

maybe("console session against a manual-QC live system", () => {
  const api = new ConsoleApi(BASE_URL);

  async function dashboardMatchesPendingReport(): Promise<void> {
    const [dashboard, pending] = await Promise.all([
      loadDashboard(api),
      api.pendingReport(),
    ]);
    const raw = new Map(pending.rows.map((row) => [String(row[0]),
                                                   Number(row[1])]));
    for (const { center, count } of dashboard.pendingByCenter) {
      expect(count).toBe(raw.get(center));
    }
    expect(dashboard.pendingTotal).toBe(pending.total);
  }

  it("claims QC, rejects to DP, sees the order return, approves it",
     async () => {
    const form = {
      satellite: "IRS-P6",
      sensor: "LISS-3",
      product_type: "STANDARD",
      correction_level: "GEO",
      media: "DIGITAL",
      path: "101",
      row: "57",
      acquisition_date: "2026-01-03",
      customer: "C900",
      region: "EAST",
      amount: "410.00",
      quantity: "2",
    };
    expect(validateOrderForm(form)).toBeNull();
    const { spec, parameters } = toSpecPayload(form);
    const order = await api.submitOrder(spec, parameters,
                                        freshRequestId(OPERATOR));
    expect(order.status).toBe("OPEN");
    await dashboardMatchesPendingReport();

    // the automated centers run the order up to manual QC
    const firstTask = await pollUntil("the order to reach QC", async () => {
      const { tasks } = await api.listTasks("QC");
      return tasks.find((t) => t.work_order_id === order.id) ?? null;
    });
    await dashboardMatchesPendingReport();

    const claim = await api.claimTask(firstTask.task_id, OPERATOR);
    expect(claim.operator_id).toBe(OPERATOR);

    const claimed = await api.getOrder(order.id);
    const targets = rejectTargets(claimed);
    expect(targets).toContain("DP");
    expect(targets).not.toContain("QC");
    expect(targets).not.toContain("DISPATCH");

    const rejected = await api.completeTask(
      firstTask.task_id, OPERATOR, "REJECT", "DP",
      "radiometric banding", freshRequestId(OPERATOR),
    );
    expect(rejected.status).toBe("OPEN");
    expect(rejected.parameters.qc_note).toBe("radiometric banding");
    await dashboardMatchesPendingReport();

    // rework runs automatically and the order re-enters the QC pool
    const secondTask = await pollUntil("the rework to reach QC", async () => {
      const { tasks } = await api.listTasks("QC");
      const match = tasks.find((t) => t.work_order_id === order.id);
      return match && match.task_id !== firstTask.task_id ? match : null;
    });
    await dashboardMatchesPendingReport();

    await api.claimTask(secondTask.task_id, OPERATOR);
    const approved = await api.completeTask(
      secondTask.task_id, OPERATOR, "COMPLETE", undefined, undefined,
      freshRequestId(OPERATOR),
    );
    expect(approved.id).toBe(order.id);

    const final = await pollUntil("the order to complete", async () => {
      const current = await api.getOrder(order.id);
      return current.status === "COMPLETED" ? current : null;
    });
    const dpVisits = final.history.filter(
      (event) => event.type === "COMPLETED_STEP" && event.center === "DP",
    );
    expect(dpVisits.length).toBe(2); // the rework really ran
    expect(final.history.some((event) => event.type === "REJECTED")).toBe(true);
    await dashboardMatchesPendingReport();
  }, 60_000);
});
