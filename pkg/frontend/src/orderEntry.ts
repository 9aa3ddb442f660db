import { ApiFailure, ConsoleApi } from "./api.js";
import {
  CORRECTION_LEVELS,
  MEDIA,
  PRODUCT_TYPES,
  SENSOR_CATALOG,
} from "./catalog.js";
import { byId, clear, el } from "./dom.js";
import { freshRequestId } from "./session.js";
import { OrderFormState, toSpecPayload, validateOrderForm } from "./validation.js";

/** The URP clerk's intake form; validation mirrors the routing catalog. */
export class OrderEntry {
  constructor(
    private readonly api: ConsoleApi,
    private readonly root: HTMLElement,
    private readonly noticeNode: HTMLElement,
    private readonly operatorId: string,
  ) {}

  render(): void {
    clear(this.root);
    const satellite = el("select", { id: "oe-satellite" });
    for (const name of Object.keys(SENSOR_CATALOG)) {
      satellite.append(el("option", { value: name }, [name]));
    }
    const sensor = el("select", { id: "oe-sensor" });
    const fillSensors = () => {
      clear(sensor);
      for (const name of SENSOR_CATALOG[satellite.value] ?? []) {
        sensor.append(el("option", { value: name }, [name]));
      }
    };
    satellite.addEventListener("change", fillSensors);
    fillSensors();

    const select = (id: string, values: readonly string[]) => {
      const node = el("select", { id });
      for (const value of values) {
        node.append(el("option", { value }, [value]));
      }
      return node;
    };
    const text = (id: string, value: string, placeholder = "") =>
      el("input", { id, value, placeholder });

    const fields: Array<[string, HTMLElement]> = [
      ["Satellite", satellite],
      ["Sensor", sensor],
      ["Product type", select("oe-ptype", PRODUCT_TYPES)],
      ["Correction", select("oe-level", CORRECTION_LEVELS)],
      ["Media", select("oe-media", MEDIA)],
      ["Path", text("oe-path", "100")],
      ["Row", text("oe-row", "60")],
      ["Acquired", text("oe-acq", "2026-01-02", "YYYY-MM-DD")],
      ["Customer", text("oe-customer", "", "C001")],
      ["Region", text("oe-region", "", "NORTH")],
      ["Amount", text("oe-amount", "", "1234.56")],
      ["Quantity", text("oe-quantity", "1")],
    ];
    const grid = el("div", { class: "form-grid" });
    for (const [label, input] of fields) {
      grid.append(el("label", {}, [label]), input);
    }
    const submit = el("button", { class: "approve" }, ["Create work order"]);
    submit.addEventListener("click", () => {
      void this.submit();
    });
    this.root.append(grid, submit);
  }

  private formState(): OrderFormState {
    const value = (id: string) =>
      (byId<HTMLInputElement | HTMLSelectElement>(id)).value;
    return {
      satellite: value("oe-satellite"),
      sensor: value("oe-sensor"),
      product_type: value("oe-ptype"),
      correction_level: value("oe-level"),
      media: value("oe-media"),
      path: value("oe-path"),
      row: value("oe-row"),
      acquisition_date: value("oe-acq"),
      customer: value("oe-customer"),
      region: value("oe-region"),
      amount: value("oe-amount"),
      quantity: value("oe-quantity"),
    };
  }

  private async submit(): Promise<void> {
    const form = this.formState();
    const problem = validateOrderForm(form);
    if (problem) {
      this.noticeNode.textContent = problem;
      this.noticeNode.className = "notice error";
      return;
    }
    const { spec, parameters } = toSpecPayload(form);
    try {
      const order = await this.api.submitOrder(
        spec, parameters, freshRequestId(this.operatorId),
      );
      this.noticeNode.textContent =
        `Created ${order.id}: ` +
        order.plan.steps.map((s) => s.center).join(" → ");
      this.noticeNode.className = "notice";
    } catch (error) {
      this.noticeNode.textContent =
        error instanceof ApiFailure && error.body
          ? error.body.message
          : String(error);
      this.noticeNode.className = "notice error";
    }
  }
}
