// Shapes of the JSON the service layer serves; field names match the API.

export type OrderStatus = "OPEN" | "COMPLETED" | "CANCELLED";
export type StepStatus = "PENDING" | "IN_PROGRESS" | "COMPLETED" | "REWORK";

export interface ProductSpecInput {
  satellite: string;
  sensor: string;
  product_type: string;
  correction_level: string;
  media: string;
  path: number;
  row: number;
  acquisition_date: string; // ISO date
}

export interface PlanStep {
  index: number;
  center: string;
  status: StepStatus;
  entered: number | null;
  exited: number | null;
}

export interface WorkOrder {
  id: string;
  status: OrderStatus;
  created: number;
  spec: ProductSpecInput;
  plan: { current: number; steps: PlanStep[] };
  parameters: Record<string, string>;
  history: Array<{
    seq: number;
    type: string;
    center: string;
    at: number;
    note: string;
  }>;
}

export interface OrderListing {
  page: number;
  page_size: number;
  total: number;
  orders: Array<{
    id: string;
    status: OrderStatus;
    center: string | null;
    created: number;
  }>;
}

export interface ManualTask {
  task_id: string;
  work_order_id: string;
  center: string;
  created_at: number;
}

export interface TaskClaim {
  task_id: string;
  work_order_id: string;
  center: string;
  operator_id: string;
  claimed_at: number;
  lease_until: number;
}

export interface TableReport {
  columns: string[];
  rows: Array<Array<string | number>>;
}

export interface PendingReport extends TableReport {
  total: number;
}

export interface CompletedReport {
  from: number;
  to: number;
  orders: string[];
  count: number;
}

export interface SystemStatus {
  sim_now: number;
  live_now: number;
  orders: {
    created: number;
    open: number;
    completed: number;
    cancelled: number;
  };
  pending_events: number;
  manual_tasks: number;
}

export interface ApiError {
  code: string;
  message: string;
  detail: unknown;
}
