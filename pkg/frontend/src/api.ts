import type {
  ApiError,
  CompletedReport,
  ManualTask,
  OrderListing,
  PendingReport,
  ProductSpecInput,
  SystemStatus,
  TableReport,
  TaskClaim,
  WorkOrder,
} from "./model.js";

export class ApiFailure extends Error {
  readonly status: number;
  readonly body: ApiError | null;

  constructor(status: number, body: ApiError | null) {
    super(body ? `${status}: ${body.message}` : `HTTP ${status}`);
    this.status = status;
    this.body = body;
  }
}

/** Thin typed client over the documented HTTP endpoints. */
export class ConsoleApi {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    requestId?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
    }
    if (requestId) {
      headers["Request-Id"] = requestId;
    }
    const response = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    if (!response.ok) {
      let parsed: ApiError | null = null;
      try {
        parsed = JSON.parse(text) as ApiError;
      } catch {
        parsed = null;
      }
      throw new ApiFailure(response.status, parsed);
    }
    return JSON.parse(text) as T;
  }

  submitOrder(
    spec: ProductSpecInput,
    parameters: Record<string, string>,
    requestId?: string,
  ): Promise<WorkOrder> {
    return this.request<WorkOrder>(
      "POST", "/work-orders", { ...spec, parameters }, requestId,
    );
  }

  getOrder(id: string): Promise<WorkOrder> {
    return this.request<WorkOrder>("GET", `/work-orders/${id}`);
  }

  async getOrderXml(id: string): Promise<string> {
    const response = await fetch(`${this.baseUrl}/work-orders/${id}`, {
      headers: { Accept: "application/xml" },
    });
    if (!response.ok) {
      throw new ApiFailure(response.status, null);
    }
    return response.text();
  }

  listOrders(params: {
    status?: string;
    center?: string;
    page?: number;
    page_size?: number;
  } = {}): Promise<OrderListing> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) {
        query.set(key, String(value));
      }
    }
    const suffix = query.toString() ? `?${query}` : "";
    return this.request<OrderListing>("GET", `/work-orders${suffix}`);
  }

  listTasks(center: string): Promise<{ tasks: ManualTask[] }> {
    return this.request("GET", `/tasks?center=${encodeURIComponent(center)}`);
  }

  claimTask(taskId: string, operatorId: string): Promise<TaskClaim> {
    return this.request("POST", `/tasks/${taskId}/claim`, {
      operator_id: operatorId,
    });
  }

  completeTask(
    taskId: string,
    operatorId: string,
    outcome: "COMPLETE" | "REJECT",
    rejectTarget?: string,
    note?: string,
    requestId?: string,
  ): Promise<WorkOrder> {
    return this.request<WorkOrder>(
      "POST",
      `/tasks/${taskId}/complete`,
      {
        operator_id: operatorId,
        outcome,
        ...(rejectTarget ? { reject_target: rejectTarget } : {}),
        ...(note ? { note } : {}),
      },
      requestId,
    );
  }

  pendingReport(): Promise<PendingReport> {
    return this.request("GET", "/reports/pending");
  }

  tatReport(by: "center" | "product_type"): Promise<TableReport> {
    return this.request("GET", `/reports/tat?by=${by}`);
  }

  completedReport(from: number, to: number): Promise<CompletedReport> {
    return this.request("GET", `/reports/completed?from=${from}&to=${to}`);
  }

  status(): Promise<SystemStatus> {
    return this.request("GET", "/status");
  }
}
