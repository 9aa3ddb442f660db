import { ApiFailure, ConsoleApi } from "./api.js";
import { clear, el } from "./dom.js";
import type { ManualTask, WorkOrder } from "./model.js";
import { leaseRemaining, rejectTargets } from "./planRules.js";
import { ConsoleSession, freshRequestId } from "./session.js";

/**
 * The QC operator's half of the console: the unclaimed task pool, claiming,
 * the rendered work order, and the approve / reject-with-target form.
 */
export class QcWorkbench {
  private openOrder: WorkOrder | null = null;
  private openTaskId: string | null = null;

  constructor(
    private readonly api: ConsoleApi,
    private readonly session: ConsoleSession,
    private readonly listNode: HTMLElement,
    private readonly detailNode: HTMLElement,
    private readonly noticeNode: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    const { tasks } = await this.api.listTasks("QC");
    this.renderTaskList(tasks);
    if (this.openTaskId && !this.session.holds(this.openTaskId)) {
      this.closeDetail();
    }
    this.renderLeaseCountdown();
  }

  private notice(text: string, isError = false): void {
    this.noticeNode.textContent = text;
    this.noticeNode.className = isError ? "notice error" : "notice";
  }

  private renderTaskList(tasks: ManualTask[]): void {
    clear(this.listNode);
    if (!tasks.length) {
      this.listNode.append(el("p", { class: "empty" }, ["No QC tasks waiting."]));
      return;
    }
    for (const task of tasks) {
      const claimButton = el("button", {}, ["Claim"]);
      claimButton.addEventListener("click", () => {
        void this.claim(task);
      });
      this.listNode.append(
        el("div", { class: "task-row" }, [
          el("span", { class: "mono" }, [task.task_id]),
          el("span", { class: "mono" }, [task.work_order_id]),
          claimButton,
        ]),
      );
    }
  }

  private async claim(task: ManualTask): Promise<void> {
    try {
      const claim = await this.api.claimTask(task.task_id, this.session.operatorId);
      this.session.remember(claim);
      this.notice(`Claimed ${task.task_id}.`);
      await this.openTask(task.task_id, task.work_order_id);
    } catch (error) {
      if (error instanceof ApiFailure && error.status === 409) {
        this.notice("Another operator claimed that task first.", true);
      } else {
        this.notice(String(error), true);
      }
    }
  }

  private async openTask(taskId: string, orderId: string): Promise<void> {
    this.openTaskId = taskId;
    this.openOrder = await this.api.getOrder(orderId);
    this.renderDetail();
  }

  private closeDetail(): void {
    this.openTaskId = null;
    this.openOrder = null;
    clear(this.detailNode);
  }

  private renderLeaseCountdown(): void {
    const node = this.detailNode.querySelector(".lease");
    if (!node || !this.openTaskId) {
      return;
    }
    const claim = this.session.claimFor(this.openTaskId);
    if (!claim) {
      return;
    }
    void this.api.status().then((status) => {
      const left = leaseRemaining(claim.lease_until, status.live_now);
      node.textContent = `lease: ${Math.round(left)}s remaining`;
    });
  }

  private renderDetail(): void {
    clear(this.detailNode);
    const order = this.openOrder;
    const taskId = this.openTaskId;
    if (!order || !taskId) {
      return;
    }
    const steps = order.plan.steps.map((step) =>
      el("tr", {}, [
        el("td", {}, [String(step.index)]),
        el("td", {}, [step.center]),
        el("td", { class: `status-${step.status}` }, [step.status]),
      ]),
    );
    const params = Object.entries(order.parameters).map(([key, value]) =>
      el("tr", {}, [el("td", {}, [key]), el("td", {}, [value])]),
    );
    const targetSelect = el("select", { id: "reject-target" });
    for (const center of rejectTargets(order)) {
      targetSelect.append(el("option", { value: center }, [center]));
    }
    const noteInput = el("input", {
      id: "qc-note",
      placeholder: "reject note (stored as qc_note)",
    });
    const approve = el("button", { class: "approve" }, ["Approve"]);
    approve.addEventListener("click", () => {
      void this.submit(taskId, "COMPLETE", undefined, noteInput.value);
    });
    const reject = el("button", { class: "reject" }, ["Reject to target"]);
    reject.addEventListener("click", () => {
      void this.submit(taskId, "REJECT", targetSelect.value, noteInput.value);
    });
    this.detailNode.append(
      el("h3", {}, [`${order.id} (${order.status})`]),
      el("p", { class: "lease" }, [""]),
      el("table", {}, [el("tbody", {}, steps)]),
      el("h4", {}, ["Work-order contents"]),
      el("table", {}, [el("tbody", {}, params)]),
      el("div", { class: "actions" }, [approve, targetSelect, reject, noteInput]),
    );
  }

  private async submit(
    taskId: string,
    outcome: "COMPLETE" | "REJECT",
    target?: string,
    note?: string,
  ): Promise<void> {
    try {
      await this.api.completeTask(
        taskId,
        this.session.operatorId,
        outcome,
        target,
        note || undefined,
        freshRequestId(this.session.operatorId),
      );
      this.session.forget(taskId);
      this.notice(outcome === "COMPLETE"
        ? "Approved; order moves on."
        : `Rejected to ${target}; rework queued.`);
      this.closeDetail();
    } catch (error) {
      if (error instanceof ApiFailure && error.status === 410) {
        this.session.forget(taskId);
        this.notice("Claim lease expired; the task returned to the pool.", true);
        this.closeDetail();
      } else if (error instanceof ApiFailure && error.status === 409) {
        this.notice("Claim lost to another operator.", true);
      } else {
        this.notice(String(error), true);
      }
    }
    await this.refresh();
  }
}
