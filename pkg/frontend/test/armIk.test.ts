import { describe, expect, it } from "vitest";

import { HUMAN_ARM, dragToJoints, planarFk } from "../src/armIk.js";

describe("dragToJoints", () => {
  it("round-trips reachable targets through the planar FK", () => {
    for (const [x, z] of [[0.2, 0.45], [0.4, 0.2], [0.1, 0.55], [0.35, -0.1]]) {
      const q = dragToJoints(HUMAN_ARM, x, z);
      const p = planarFk(HUMAN_ARM, q[0], q[3]);
      expect(p.x).toBeCloseTo(x, 6);
      expect(p.z).toBeCloseTo(z, 6);
      expect(q[1]).toBe(0);
      expect(q[2]).toBe(0);
    }
  });

  it("clamps unreachable targets onto the boundary along the ray", () => {
    const q = dragToJoints(HUMAN_ARM, 2.0, 2.0);
    const p = planarFk(HUMAN_ARM, q[0], q[3]);
    const r = Math.hypot(p.x, p.z);
    expect(r).toBeLessThanOrEqual(HUMAN_ARM.upper + HUMAN_ARM.fore + 1e-9);
    expect(p.x / p.z).toBeCloseTo(1.0, 5); // direction preserved
  });

  it("respects the elbow range", () => {
    for (const [x, z] of [[0.01, 0.05], [0.0, 0.58], [0.5, 0.0]]) {
      const q = dragToJoints(HUMAN_ARM, x, z);
      expect(q[3]).toBeGreaterThanOrEqual(0);
      expect(q[3]).toBeLessThanOrEqual(HUMAN_ARM.elbowMax);
    }
  });
});
