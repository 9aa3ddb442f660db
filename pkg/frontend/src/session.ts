import type { TaskClaim } from "./model.js";

/**
 * One operator's browser session: who they are, which tasks they hold, and
 * how fresh the last poll was.  Actions on tasks the session has not claimed
 * are disabled by the workbench.
 */
export class ConsoleSession {
  operatorId: string;
  pollIntervalMs: number;
  claims = new Map<string, TaskClaim>();
  lastPollAt = 0;

  constructor(operatorId: string, pollIntervalMs = 2000) {
    this.operatorId = operatorId;
    this.pollIntervalMs = pollIntervalMs;
  }

  remember(claim: TaskClaim): void {
    this.claims.set(claim.task_id, claim);
  }

  forget(taskId: string): void {
    this.claims.delete(taskId);
  }

  holds(taskId: string): boolean {
    return this.claims.has(taskId);
  }

  claimFor(taskId: string): TaskClaim | undefined {
    return this.claims.get(taskId);
  }
}

let requestCounter = 0;

/** Unique id for retry-safe POSTs. */
export function freshRequestId(operatorId: string): string {
  requestCounter += 1;
  return `${operatorId}-${Date.now()}-${requestCounter}`;
}
