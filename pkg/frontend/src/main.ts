// Console wiring: inputs -> command draft, stream -> scene, at display
// refresh.  Server URL via ?url=ws://host:port (defaults to this origin).

import { LEAN_LIMIT, TeleopClient } from "./client.js";
import { HUMAN_ARM, dragToJoints } from "./armIk.js";
import { GaugeRenderer, SceneRenderer } from "./render.js";

const SEND_HZ = 50;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serverUrl(): string {
  const q = new URLSearchParams(window.location.search).get("url");
  if (q) return q;
  return `ws://${window.location.host}`;
}

function main(): void {
  const scene = new SceneRenderer(el<HTMLCanvasElement>("scene"));
  const hapticGauge = new GaugeRenderer(el<HTMLCanvasElement>("gauge-hmi"), 150);
  const contactGauge = new GaugeRenderer(el<HTMLCanvasElement>("gauge-ext"), 150);
  const leanSlider = el<HTMLInputElement>("lean");
  const leanReadout = el<HTMLSpanElement>("lean-value");
  const springCenter = el<HTMLInputElement>("spring-center");
  const springToggle = el<HTMLInputElement>("toggle-spring");
  const hapticsToggle = el<HTMLInputElement>("toggle-haptics");
  const statusBadge = el<HTMLSpanElement>("status");
  const roleBadge = el<HTMLSpanElement>("role");
  const fpsBadge = el<HTMLSpanElement>("fps");
  const rttBadge = el<HTMLSpanElement>("rtt");
  const rateBadge = el<HTMLSpanElement>("rate");
  const flagsBadge = el<HTMLSpanElement>("flags");
  const banner = el<HTMLDivElement>("banner");
  const armPad = el<HTMLCanvasElement>("armpad");
  const sliders = ["q0", "q3"].map((id) => el<HTMLInputElement>(`arm-${id}`));

  const client = new TeleopClient(serverUrl(), {
    onStatus(status) {
      statusBadge.textContent = status;
      statusBadge.className = `badge ${status}`;
      banner.style.display = status === "open" ? "none" : "block";
      banner.textContent = status === "open" ? "" : `connection ${status} - reconnecting`;
      setControlsEnabled(status === "open" && client.role === "pilot");
      if (status === "closed") {
        setTimeout(() => client.connect("pilot"), 1000);
      }
    },
    onWelcome(msg) {
      roleBadge.textContent = msg.role;
      roleBadge.className = `badge ${msg.role}`;
      setControlsEnabled(msg.role === "pilot");
    },
    onError(code, detail) {
      console.warn("server error:", code, detail);
    },
  });

  function setControlsEnabled(on: boolean): void {
    leanSlider.disabled = !on;
    springToggle.disabled = !on;
    hapticsToggle.disabled = !on;
    for (const s of sliders) s.disabled = !on;
  }

  // lean input: slider (optionally auto-centering) and keyboard
  leanSlider.min = String(-LEAN_LIMIT);
  leanSlider.max = String(LEAN_LIMIT);
  leanSlider.step = "0.005";
  leanSlider.addEventListener("input", () => {
    client.sampler.update({ lean: Number(leanSlider.value) });
    leanReadout.textContent = Number(leanSlider.value).toFixed(3);
  });
  leanSlider.addEventListener("change", () => {
    if (springCenter.checked) {
      leanSlider.value = "0";
      client.sampler.update({ lean: 0 });
      leanReadout.textContent = "0.000";
    }
  });
  window.addEventListener("keydown", (ev) => {
    if (client.role !== "pilot") return;
    const step = 0.02;
    let lean = client.sampler.current().lean;
    if (ev.key === "ArrowUp" || ev.key === "w") lean += step;
    else if (ev.key === "ArrowDown" || ev.key === "s") lean -= step;
    else if (ev.key === " ") lean = 0;
    else return;
    client.sampler.update({ lean });
    leanSlider.value = String(client.sampler.current().lean);
    leanReadout.textContent = client.sampler.current().lean.toFixed(3);
  });

  springToggle.addEventListener("change", () => {
    const t = client.sampler.current().toggles;
    client.sampler.update({ toggles: { ...t, spring: springToggle.checked } });
  });
  hapticsToggle.addEventListener("change", () => {
    const t = client.sampler.current().toggles;
    client.sampler.update({ toggles: { ...t, haptics: hapticsToggle.checked } });
  });

  // arm input: sagittal end-effector drag (both arms mirrored), plus
  // joint sliders in the advanced panel
  const padCtx = armPad.getContext("2d");
  function drawPad(x: number, z: number): void {
    if (!padCtx) return;
    padCtx.clearRect(0, 0, armPad.width, armPad.height);
    padCtx.strokeStyle = "#666";
    padCtx.strokeRect(0.5, 0.5, armPad.width - 1, armPad.height - 1);
    padCtx.fillStyle = "#999";
    padCtx.font = "10px sans-serif";
    padCtx.fillText("hand target (drag)", 6, 12);
    const px = armPad.width / 2 + x * 140;
    const py = armPad.height * 0.85 - z * 140;
    padCtx.fillStyle = "#e9c46a";
    padCtx.beginPath();
    padCtx.arc(px, py, 6, 0, Math.PI * 2);
    padCtx.fill();
  }
  let target = { x: 0.0, z: 0.58 };
  drawPad(target.x, target.z);
  function applyArmTarget(): void {
    const q = dragToJoints(HUMAN_ARM, target.x, target.z);
    client.sampler.update({ arms: { l: [...q], r: [...q] } });
    sliders[0].value = String(q[0]);
    sliders[1].value = String(q[3]);
    drawPad(target.x, target.z);
  }
  let dragging = false;
  armPad.addEventListener("pointerdown", (ev) => {
    dragging = true;
    armPad.setPointerCapture(ev.pointerId);
  });
  armPad.addEventListener("pointerup", () => (dragging = false));
  armPad.addEventListener("pointermove", (ev) => {
    if (!dragging || client.role !== "pilot") return;
    const rect = armPad.getBoundingClientRect();
    target = {
      x: (ev.clientX - rect.left - armPad.width / 2) / 140,
      z: (armPad.height * 0.85 - (ev.clientY - rect.top)) / 140,
    };
    applyArmTarget();
  });
  for (const s of sliders) {
    s.addEventListener("input", () => {
      const q0 = Number(sliders[0].value);
      const q3 = Number(sliders[1].value);
      client.sampler.update({ arms: { l: [q0, 0, 0, q3], r: [q0, 0, 0, q3] } });
    });
  }

  // fixed-rate command loop with heartbeat
  setInterval(() => client.tick(), 1000 / SEND_HZ);
  setInterval(() => client.ping(), 1000);

  // render at display refresh with an fps estimate
  let frames = 0;
  let fpsT0 = performance.now();
  function render(): void {
    scene.draw(client.lastState);
    const f = client.lastState?.frame;
    hapticGauge.draw(f ? f.f_hmi : 0, "F_HMI");
    contactGauge.draw(f ? f.f_ext_scaled : 0, "scaled contact");
    if (f) {
      rateBadge.textContent = `${client.lastState?.achieved_rate ?? 0} steps/s`;
      const flags = [
        f.saturated ? "saturated" : "",
        f.cop_clamped ? "cop-clamped" : "",
        f.singular ? "singular" : "",
        f.linear_regime_violated ? "linear-regime" : "",
      ].filter(Boolean);
      flagsBadge.textContent = flags.length ? flags.join(" ") : "nominal";
      flagsBadge.className = `badge ${flags.length ? "warn" : "ok"}`;
    }
    rttBadge.textContent = client.rttMs === null ? "-" : `${client.rttMs.toFixed(0)} ms`;
    frames += 1;
    const now = performance.now();
    if (now - fpsT0 >= 1000) {
      fpsBadge.textContent = `${((frames * 1000) / (now - fpsT0)).toFixed(0)} fps`;
      frames = 0;
      fpsT0 = now;
    }
    requestAnimationFrame(render);
  }
  requestAnimationFrame(render);
  client.connect("pilot");
}

main();
