import { describe, expect, it } from "vitest";

import { SENSOR_CATALOG } from "../src/catalog.js";
import {
  OrderFormState,
  toSpecPayload,
  validateOrderForm,
} from "../src/validation.js";

const GOOD: OrderFormState = {
  satellite: "IRS-P6",
  sensor: "AWIFS",
  product_type: "STANDARD",
  correction_level: "GEO",
  media: "DIGITAL",
  path: "100",
  row: "60",
  acquisition_date: "2026-01-02",
  customer: "C001",
  region: "NORTH",
  amount: "220.00",
  quantity: "1",
};

describe("validateOrderForm", () => {
  it("accepts a well-formed order", () => {
    expect(validateOrderForm(GOOD)).toBeNull();
  });

  it("mirrors the catalog for every satellite/sensor pair", () => {
    for (const [satellite, sensors] of Object.entries(SENSOR_CATALOG)) {
      for (const sensor of sensors) {
        expect(validateOrderForm({ ...GOOD, satellite, sensor })).toBeNull();
      }
    }
  });

  it("rejects a sensor flying on another satellite", () => {
    const problem = validateOrderForm({ ...GOOD, sensor: "PAN" });
    expect(problem).toMatch(/does not fly/);
  });

  it("rejects an unknown satellite", () => {
    expect(validateOrderForm({ ...GOOD, satellite: "SPUTNIK" }))
      .toMatch(/Unknown satellite/);
  });

  it("rejects malformed numbers and dates", () => {
    expect(validateOrderForm({ ...GOOD, path: "-3" })).toMatch(/Path/);
    expect(validateOrderForm({ ...GOOD, row: "1.5" })).toMatch(/Row/);
    expect(validateOrderForm({ ...GOOD, acquisition_date: "Jan 2" }))
      .toMatch(/YYYY-MM-DD/);
    expect(validateOrderForm({ ...GOOD, amount: "12.345" }))
      .toMatch(/1234\.56/);
    expect(validateOrderForm({ ...GOOD, quantity: "0" })).toMatch(/Quantity/);
  });

  it("requires customer and region", () => {
    expect(validateOrderForm({ ...GOOD, customer: "  " })).toMatch(/Customer/);
    expect(validateOrderForm({ ...GOOD, region: "" })).toMatch(/Region/);
  });
});

describe("toSpecPayload", () => {
  it("splits spec fields from parameters and coerces numbers", () => {
    const { spec, parameters } = toSpecPayload(GOOD);
    expect(spec.path).toBe(100);
    expect(spec.row).toBe(60);
    expect(spec.satellite).toBe("IRS-P6");
    expect(parameters).toEqual({
      customer: "C001",
      region: "NORTH",
      amount: "220.00",
      quantity: "1",
    });
  });
});
