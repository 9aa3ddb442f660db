// Client-side mirror of the shipped routing catalog, used to validate the
// order-entry form before it ever reaches the API.  The server remains the
// authority; this only catches typos early.

export const SENSOR_CATALOG: Record<string, string[]> = {
  "IRS-1A": ["LISS-1", "LISS-2"],
  "IRS-P5": ["PAN-FORE", "PAN-AFT"],
  "IRS-P6": ["AWIFS", "LISS-3", "LISS-4"],
  "CARTOSAT-2": ["PAN"],
};

export const PRODUCT_TYPES = ["STANDARD", "PRECISION", "VALUE_ADDED"] as const;
export const CORRECTION_LEVELS = ["RAW", "RADIOMETRIC", "GEO", "ORTHO"] as const;
export const MEDIA = ["DIGITAL", "FILM", "PHOTO"] as const;
export const CENTERS = [
  "URP", "DP", "VAL", "FILM", "PHOTO", "QC", "DISPATCH",
] as const;
