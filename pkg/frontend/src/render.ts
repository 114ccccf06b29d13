// Side-view scene and haptic gauges, drawn from streamed telemetry only.

import { StateMessage, TelemetryFrame } from "./protocol.js";

const WHEEL_R = 0.05;
const BODY_H = 0.37;
const SHOULDER = { x: 0.0, z: 0.45 };
const ARM = { upper: 0.25, fore: 0.25 };
const BOX_W = 0.4;
const BOX_H = 0.45;

export interface SceneOptions {
  pxPerMeter: number;
}

function armPoints(q0: number, q3: number): { ex: number; ez: number; hx: number; hz: number } {
  const ex = ARM.upper * Math.sin(q0);
  const ez = ARM.upper * Math.cos(q0);
  return {
    ex,
    ez,
    hx: ex + ARM.fore * Math.sin(q0 + q3),
    hz: ez + ARM.fore * Math.cos(q0 + q3),
  };
}

export class SceneRenderer {
  private ctx: CanvasRenderingContext2D;
  private opts: SceneOptions;

  constructor(private canvas: HTMLCanvasElement, opts: Partial<SceneOptions> = {}) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    this.ctx = ctx;
    this.opts = { pxPerMeter: 220, ...opts };
  }

  draw(state: StateMessage | null): void {
    const { ctx, canvas } = this;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    if (!state) {
      ctx.fillStyle = "#888";
      ctx.font = "14px sans-serif";
      ctx.fillText("waiting for state...", 16, 24);
      return;
    }
    const f = state.frame;
    const s = this.opts.pxPerMeter;
    const groundY = canvas.height - 60;
    // camera follows the robot
    const camX = f.x_w;
    const toX = (wx: number) => canvas.width * 0.38 + (wx - camX) * s;
    const toY = (wz: number) => groundY - wz * s;

    // ground
    ctx.strokeStyle = "#555";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(0, groundY);
    ctx.lineTo(canvas.width, groundY);
    ctx.stroke();
    ctx.strokeStyle = "#3a3a3a";
    ctx.lineWidth = 1;
    for (let m = Math.ceil(camX - 3); m < camX + 4; m++) {
      ctx.beginPath();
      ctx.moveTo(toX(m), groundY);
      ctx.lineTo(toX(m), groundY + 8);
      ctx.stroke();
    }

    // box
    if (Number.isFinite(f.box_x)) {
      ctx.fillStyle = f.box_contact ? "#8a6d3b" : "#6d5a33";
      ctx.fillRect(
        toX(f.box_x - BOX_W / 2), toY(BOX_H), BOX_W * s, BOX_H * s,
      );
    }

    // moving target
    if (Number.isFinite(f.target_x)) {
      ctx.fillStyle = "#4cc9f0";
      ctx.beginPath();
      ctx.arc(toX(f.target_x), toY(0.45), 7, 0, Math.PI * 2);
      ctx.fill();
    }

    // robot: wheel, pitched body, arms
    const wheelX = toX(f.x_w);
    const wheelY = toY(WHEEL_R);
    ctx.strokeStyle = "#ddd";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.arc(wheelX, wheelY, WHEEL_R * s, 0, Math.PI * 2);
    ctx.stroke();
    const sth = Math.sin(f.theta_r);
    const cth = Math.cos(f.theta_r);
    const bodyTip = { x: f.x_w + BODY_H * sth, z: WHEEL_R + BODY_H * cth };
    ctx.strokeStyle = f.linear_regime_violated ? "#e63946" : "#f1faee";
    ctx.lineWidth = 5;
    ctx.beginPath();
    ctx.moveTo(wheelX, wheelY);
    ctx.lineTo(toX(bodyTip.x), toY(bodyTip.z));
    ctx.stroke();

    const drawArm = (q0: number, q3: number, color: string) => {
      const p = armPoints(q0, q3);
      const rot = (px: number, pz: number) => ({
        x: f.x_w + cth * (SHOULDER.x + px) + sth * (SHOULDER.z + pz),
        z: WHEEL_R - sth * (SHOULDER.x + px) + cth * (SHOULDER.z + pz),
      });
      const sh = rot(0, 0);
      const el = rot(p.ex, p.ez);
      const ha = rot(p.hx, p.hz);
      ctx.strokeStyle = color;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(toX(sh.x), toY(sh.z));
      ctx.lineTo(toX(el.x), toY(el.z));
      ctx.lineTo(toX(ha.x), toY(ha.z));
      ctx.stroke();
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(toX(ha.x), toY(ha.z), 4, 0, Math.PI * 2);
      ctx.fill();
    };
    drawArm(f.l_q0, f.l_q3, "#a8dadc");
    drawArm(f.r_q0, f.r_q3, "#e9c46a");

    // human avatar inset (lean + CoP)
    this.drawHumanInset(f);
  }

  private drawHumanInset(f: TelemetryFrame): void {
    const { ctx } = this;
    const x0 = 70;
    const y0 = 120;
    const h = 80;
    ctx.save();
    ctx.strokeStyle = "#777";
    ctx.strokeRect(x0 - 55, y0 - h - 14, 110, h + 34);
    ctx.fillStyle = "#999";
    ctx.font = "10px sans-serif";
    ctx.fillText("pilot", x0 - 50, y0 - h - 2);
    ctx.strokeStyle = f.balanced ? "#80ed99" : "#e63946";
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x0 + h * Math.sin(f.theta_h), y0 - h * Math.cos(f.theta_h));
    ctx.stroke();
    // feet and CoP marker (support polygon -0.05..0.15 m scaled)
    ctx.strokeStyle = "#777";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x0 - 15, y0 + 6);
    ctx.lineTo(x0 + 35, y0 + 6);
    ctx.stroke();
    ctx.fillStyle = "#f4a261";
    ctx.beginPath();
    ctx.arc(x0 + f.cop * 230, y0 + 6, 3.5, 0, Math.PI * 2);
    ctx.fill();
    ctx.restore();
  }
}

/** Signed horizontal bar gauge; the visual stand-in for torso haptics. */
export class GaugeRenderer {
  constructor(private canvas: HTMLCanvasElement, private fullScale: number) {}

  draw(value: number, label: string): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const w = this.canvas.width;
    const h = this.canvas.height;
    ctx.clearRect(0, 0, w, h);
    const mid = w / 2;
    ctx.strokeStyle = "#666";
    ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
    ctx.beginPath();
    ctx.moveTo(mid, 0);
    ctx.lineTo(mid, h);
    ctx.stroke();
    const frac = Math.max(-1, Math.min(1, value / this.fullScale));
    ctx.fillStyle = frac >= 0 ? "#80ed99" : "#e76f51";
    if (frac >= 0) {
      ctx.fillRect(mid, 4, frac * (mid - 4), h - 8);
    } else {
      ctx.fillRect(mid + frac * (mid - 4), 4, -frac * (mid - 4), h - 8);
    }
    ctx.fillStyle = "#ddd";
    ctx.font = "11px sans-serif";
    ctx.fillText(`${label}: ${value.toFixed(1)} N`, 6, h - 6);
  }
}
