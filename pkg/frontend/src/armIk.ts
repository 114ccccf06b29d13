// Sagittal 2-link mapping from an end-effector drag to human arm joints.
// This generates the pilot's arm *pose* (as the exoskeleton would measure
// it); the human-to-robot retargeting runs on the server.
//
// Convention matches the server: the arm hangs along +z at zero, shoulder
// flexion q0 rotates it toward +x, elbow q3 in [0, elbowMax] bends further
// toward +x.  Target coordinates are (x forward, z up) relative to the
// shoulder.

export interface PlanarArm {
  upper: number;   // m
  fore: number;    // m
  elbowMax: number; // rad
  shoulderMax: number; // rad
}

export const HUMAN_ARM: PlanarArm = {
  upper: 0.30,
  fore: 0.28,
  elbowMax: 2.6,
  shoulderMax: 2.8,
};

export function planarFk(arm: PlanarArm, q0: number, q3: number): { x: number; z: number } {
  return {
    x: arm.upper * Math.sin(q0) + arm.fore * Math.sin(q0 + q3),
    z: arm.upper * Math.cos(q0) + arm.fore * Math.cos(q0 + q3),
  };
}

/**
 * Joint angles reaching (x, z); targets outside the annulus are clamped to
 * the nearest reachable point along the ray.  Returns [q0, q1, q2, q3]
 * with the unused out-of-plane joints zero.
 */
export function dragToJoints(arm: PlanarArm, x: number, z: number): number[] {
  const rMax = arm.upper + arm.fore;
  const rMin = Math.max(
    1e-6,
    Math.sqrt(
      arm.upper * arm.upper +
        arm.fore * arm.fore +
        2 * arm.upper * arm.fore * Math.cos(arm.elbowMax),
    ),
  );
  let r = Math.hypot(x, z);
  if (r < 1e-9) {
    return [0, 0, 0, arm.elbowMax];
  }
  const clampedR = Math.min(rMax - 1e-9, Math.max(rMin, r));
  const scale = clampedR / r;
  const tx = x * scale;
  const tz = z * scale;
  r = clampedR;

  const cosElbow = (r * r - arm.upper * arm.upper - arm.fore * arm.fore) /
    (2 * arm.upper * arm.fore);
  const q3 = Math.acos(Math.max(-1, Math.min(1, cosElbow)));
  const phi = Math.atan2(tx, tz); // angle from +z toward +x
  const q0 = phi - Math.atan2(
    arm.fore * Math.sin(q3),
    arm.upper + arm.fore * Math.cos(q3),
  );
  const q0c = Math.max(-arm.shoulderMax, Math.min(arm.shoulderMax, q0));
  const q3c = Math.max(0, Math.min(arm.elbowMax, q3));
  return [q0c, 0, 0, q3c];
}
