import { describe, expect, it } from "vitest";

import { filterClasses } from "../src/filter.js";

const CLASSES = ["sparrow", "swallow", "crow", "Crane", "finch"];

describe("filterClasses", () => {
  it("keeps everything for an empty query", () => {
    expect(filterClasses(CLASSES, "")).toEqual(CLASSES);
    expect(filterClasses(CLASSES, "   ")).toEqual(CLASSES);
  });

  it("filters by prefix", () => {
    expect(filterClasses(CLASSES, "s")).toEqual(["sparrow", "swallow"]);
    expect(filterClasses(CLASSES, "sp")).toEqual(["sparrow"]);
  });

  it("is case-insensitive", () => {
    expect(filterClasses(CLASSES, "CR")).toEqual(["crow", "Crane"]);
  });

  it("returns empty for a non-matching prefix", () => {
    expect(filterClasses(CLASSES, "zebra")).toEqual([]);
  });

  it("does not mutate the input", () => {
    const copy = CLASSES.slice();
    filterClasses(CLASSES, "s");
    expect(CLASSES).toEqual(copy);
  });
});
