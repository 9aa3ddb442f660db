import {
  CORRECTION_LEVELS,
  MEDIA,
  PRODUCT_TYPES,
  SENSOR_CATALOG,
} from "./catalog.js";
import type { ProductSpecInput } from "./model.js";

export interface OrderFormState {
  satellite: string;
  sensor: string;
  product_type: string;
  correction_level: string;
  media: string;
  path: string;
  row: string;
  acquisition_date: string;
  customer: string;
  region: string;
  amount: string;
  quantity: string;
}

const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;
const MONEY_RE = /^\d+\.\d{2}$/;

/** First problem with the form, or null when it can be submitted. */
export function validateOrderForm(form: OrderFormState): string | null {
  const sensors = SENSOR_CATALOG[form.satellite];
  if (!sensors) {
    return `Unknown satellite '${form.satellite}'.`;
  }
  if (!sensors.includes(form.sensor)) {
    return `Sensor '${form.sensor}' does not fly on ${form.satellite}.`;
  }
  if (!(PRODUCT_TYPES as readonly string[]).includes(form.product_type)) {
    return "Pick a product type.";
  }
  if (!(CORRECTION_LEVELS as readonly string[]).includes(form.correction_level)) {
    return "Pick a correction level.";
  }
  if (!(MEDIA as readonly string[]).includes(form.media)) {
    return "Pick an output media.";
  }
  for (const [label, text] of [["Path", form.path], ["Row", form.row]] as const) {
    const value = Number(text);
    if (!Number.isInteger(value) || value < 0) {
      return `${label} must be a non-negative integer.`;
    }
  }
  if (!DATE_RE.test(form.acquisition_date)) {
    return "Acquisition date must be YYYY-MM-DD.";
  }
  if (!form.customer.trim()) {
    return "Customer is required.";
  }
  if (!form.region.trim()) {
    return "Region is required.";
  }
  if (!MONEY_RE.test(form.amount)) {
    return "Amount must look like 1234.56.";
  }
  const quantity = Number(form.quantity);
  if (!Number.isInteger(quantity) || quantity < 1) {
    return "Quantity must be a positive integer.";
  }
  return null;
}

export function toSpecPayload(form: OrderFormState): {
  spec: ProductSpecInput;
  parameters: Record<string, string>;
} {
  return {
    spec: {
      satellite: form.satellite,
      sensor: form.sensor,
      product_type: form.product_type,
      correction_level: form.correction_level,
      media: form.media,
      path: Number(form.path),
      row: Number(form.row),
      acquisition_date: form.acquisition_date,
    },
    parameters: {
      customer: form.customer.trim(),
      region: form.region.trim(),
      amount: form.amount,
      quantity: form.quantity,
    },
  };
}
