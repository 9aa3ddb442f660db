import type { ConsoleApi } from "./api.js";
import type { TableReport } from "./model.js";

export interface DashboardData {
  pendingByCenter: Array<{ center: string; count: number }>;
  pendingTotal: number;
  completedToday: number;
  tatByCenter: Array<{ center: string; visits: number; meanSeconds: number }>;
}

const DAY_SECONDS = 86_400;

/**
 * Everything the dashboard shows, straight from the API.  Counts are passed
 * through untouched: whatever /reports/pending says is what renders, so the
 * console can never drift from the server's numbers.
 */
export async function loadDashboard(api: ConsoleApi): Promise<DashboardData> {
  const pending = await api.pendingReport();
  const status = await api.status();
  const dayStart = Math.floor(status.sim_now / DAY_SECONDS) * DAY_SECONDS;
  const completed = await api.completedReport(dayStart, status.sim_now);
  let tat: TableReport = { columns: [], rows: [] };
  try {
    tat = await api.tatReport("center");
  } catch {
    // the warehouse may simply not have been loaded yet
  }
  return {
    pendingByCenter: pending.rows.map((row) => ({
      center: String(row[0]),
      count: Number(row[1]),
    })),
    pendingTotal: pending.total,
    completedToday: completed.count,
    tatByCenter: tat.rows.map((row) => ({
      center: String(row[0]),
      visits: Number(row[1]),
      meanSeconds: Number(row[2]),
    })),
  };
}
