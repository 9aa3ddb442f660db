import type { PlanStep, WorkOrder } from "./model.js";

/**
 * Rework targets a QC operator may choose: strictly earlier plan steps,
 * never QC itself and never DISPATCH.  The server enforces the same rule;
 * the console simply refuses to offer anything it would reject.
 */
export function rejectTargets(order: WorkOrder): string[] {
  const qcIndex = order.plan.steps.findIndex((s) => s.center === "QC");
  if (qcIndex < 0) {
    return [];
  }
  return order.plan.steps
    .slice(0, qcIndex)
    .map((s) => s.center)
    .filter((center) => center !== "QC" && center !== "DISPATCH");
}

export function currentCenter(order: WorkOrder): string | null {
  const step: PlanStep | undefined = order.plan.steps[order.plan.current];
  return step ? step.center : null;
}

/** Seconds of lease remaining, never negative. */
export function leaseRemaining(leaseUntil: number, now: number): number {
  return Math.max(0, leaseUntil - now);
}
