"""Fixed-step closed-loop engine coupling pilot, robot, arms and box.

Step order: sample the divergent components, derive the bilateral forces
(feedforward from the pilot CoP, haptic feedback from tracking error plus
the scaled contact estimate of the previous step, virtual spring on both
sides), run the LQR wheel effort, retarget the arms and issue PD torques,
resolve hand-box contact into constant-over-the-step forces, then
integrate everything with RK4 through the selected kernel.  The contact
estimator consumes the motor torques the PD issued this step and its
output reaches the haptic law one step later, as on hardware.

Everything is pure float arithmetic off a fixed schedule: identical
inputs give bit-identical telemetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .._kernels import select_kernel
from ..arms import (
    ArmGeometry,
    ArmJoints,
    ArmRetargeter,
    JointLimits,
    arm_fk,
    pd_command,
    pd_torque,
)
from ..contact import ForceEstimator, GEAR_MAP, MotorTorques, contact_jacobian
from ..params import (
    AipState,
    CartPoleState,
    HumanParams,
    RobotParams,
    SupportPolygon,
)
from ..retarget import (
    RetargetConfig,
    apply_spring,
    feedforward_force,
    haptic_feedback,
    similarity_residual,
    synthesize_lqr,
    wheel_effort,
)
from ..rom import dcm_within_support, human_dcm, robot_dcm
from .pilot import PilotInput, ScriptedPilot
from .scenario import PilotScript, ScenarioConfig
from .world import (
    BoxState,
    telemetry_array,
    SimulationDiverged,
    TelemetryFrame,
    WorldState,
    initial_world,
)

ARM_INERTIA = 0.02  # kg*m^2 per joint, simulated double-integrator arms
ARM_KP = 20.0
ARM_KD = 0.5

_STATE_NAMES = (
    ["human.theta", "human.theta_dot", "robot.x_w", "robot.x_w_dot",
     "robot.theta", "robot.theta_dot"]
    + [f"arm_l.q{i}" for i in range(4)] + [f"arm_l.qd{i}" for i in range(4)]
    + [f"arm_r.q{i}" for i in range(4)] + [f"arm_r.qd{i}" for i in range(4)]
)


@dataclass
class ScenarioResult:
    frames: list
    world: WorldState
    report: dict
    diverged: str | None = None


class SimEngine:
    def __init__(
        self,
        human: HumanParams,
        robot: RobotParams,
        polygon: SupportPolygon,
        retarget: RetargetConfig,
        scenario: ScenarioConfig,
        arm_geom: ArmGeometry | None = None,
        kernel: str | None = None,
    ):
        self.human = human
        self.robot = robot
        self.polygon = polygon
        self.scenario = scenario
        self.retarget_cfg = retarget
        self.arm_geom = arm_geom or ArmGeometry()
        self.gain = synthesize_lqr(robot, retarget)
        self.retargeter = ArmRetargeter(
            human_geom=self.arm_geom, limits=JointLimits(), mode=scenario.arm_mode
        )
        self.estimator = ForceEstimator(self.arm_geom, k_fb=retarget.k_fb)
        self.kernel = select_kernel(kernel)
        self._step_index = 0

    # -- geometry ---------------------------------------------------------

    def _hand_world(self, world: WorldState, side: str) -> tuple[float, float, np.ndarray]:
        """(x, x_dot, torso_pos) of one hand in the world frame."""
        q = world.arm_q_r if side == "right" else world.arm_q_l
        qd = world.arm_qd_r if side == "right" else world.arm_qd_l
        joints = ArmJoints(q=q, side=side)
        _, hand, _ = arm_fk(joints, self.arm_geom)
        J = contact_jacobian(joints, self.arm_geom)
        th = world.robot.theta
        s, c = math.sin(th), math.cos(th)
        x = world.robot.x_w + c * hand[0] + s * hand[2]
        vel_arm = J @ qd
        x_dot = (
            world.robot.x_w_dot
            + world.robot.theta_dot * (-s * hand[0] + c * hand[2])
            + c * vel_arm[0]
            + s * vel_arm[2]
        )
        return x, x_dot, hand

    def target_x(self, t: float) -> float:
        tgt = self.scenario.target
        if tgt is None:
            return math.nan
        return tgt.x0 + tgt.speed * t

    # -- stepping ---------------------------------------------------------

    def initial_world(self) -> WorldState:
        box = None
        if self.scenario.box is not None:
            b = self.scenario.box
            box = BoxState(
                mass=b.mass, position=b.x0, mu_static=b.mu_static,
                mu_kinetic=b.mu_kinetic, width=b.width,
            )
        self._step_index = 0
        return initial_world(box)

    def step(self, world: WorldState, pilot: PilotInput) -> tuple[WorldState, TelemetryFrame]:
        cfg = self.scenario
        dt = cfg.dt
        spring_on = pilot.spring_enabled if pilot.spring_enabled is not None else cfg.spring_enabled
        haptics_on = pilot.haptics_enabled if pilot.haptics_enabled is not None else cfg.haptics_enabled
        rcfg = replace(self.retarget_cfg, spring_enabled=spring_on)

        xi_h = human_dcm(world.human, self.human)
        xi_r = robot_dcm(world.robot, self.robot)
        cop = pilot.command.cop
        com_disp = pilot.command.com_disp

        # bilateral channel; the contact term uses the scaled estimate of
        # the previous step, the value the pilot display actually carries
        f_used = world.estimate.f_ext_scaled
        f_r = feedforward_force(cop, self.human, self.robot)
        f_hmi = haptic_feedback(world.robot, world.human, f_used, self.human, self.robot)
        f_r, f_hmi, f_s = apply_spring(f_r, f_hmi, com_disp, rcfg, self.human, self.robot)
        if not haptics_on:
            f_hmi = 0.0
        residual = similarity_residual(
            world.robot, world.human, cop, f_r, f_hmi, f_used, self.human, self.robot
        )

        wheel = wheel_effort(
            self.gain, xi_h, xi_r, f_r, world.robot, rcfg.effort_saturation
        )

        # arm retargeting and PD torques at the step start
        des_l, flags_l = self.retargeter.retarget(pilot.arm_left)
        des_r, flags_r = self.retargeter.retarget(pilot.arm_right)
        cmd_l = pd_command(des_l, kp=ARM_KP, kd=ARM_KD)
        cmd_r = pd_command(des_r, kp=ARM_KP, kd=ARM_KD)
        tau_pd_l = pd_torque(cmd_l, world.arm_q_l, world.arm_qd_l)
        tau_pd_r = pd_torque(cmd_r, world.arm_q_r, world.arm_qd_r)

        # hand-box contact, held constant over the step
        f_hand = {"left": 0.0, "right": 0.0}
        hand_x_r = math.nan
        box = world.box
        if box is not None:
            for side in ("right", "left"):
                x, x_dot, _ = self._hand_world(world, side)
                if side == "right":
                    hand_x_r = x
                pen = x - box.face
                if pen > 0.0:
                    f = cfg.contact_stiffness * pen + cfg.contact_damping * (x_dot - box.velocity)
                    f_hand[side] = max(0.0, f)
        else:
            hand_x_r, _, _ = self._hand_world(world, "right")
        f_box = f_hand["left"] + f_hand["right"]
        f_ext = -f_box  # reaction on the robot body

        # joint torques induced by the contact, in the torso frame
        th = world.robot.theta
        s, c = math.sin(th), math.cos(th)
        tau_ext_l = np.zeros(4)
        tau_ext_r = np.zeros(4)
        if f_box > 0.0:
            for side, tau_out in (("left", tau_ext_l), ("right", tau_ext_r)):
                f = f_hand[side]
                if f > 0.0:
                    J = contact_jacobian(
                        ArmJoints(
                            q=world.arm_q_l if side == "left" else world.arm_q_r,
                            side=side,
                        ),
                        self.arm_geom,
                    )
                    f_torso = np.array([-f * c, 0.0, -f * s])
                    tau_out[:] = J.T @ f_torso

        # box friction decision (constant acceleration over the step)
        new_box = box
        if box is not None:
            thresh = box.mu_static * box.mass * self.robot.g
            if box.velocity == 0.0 and f_box <= thresh:
                a_box = 0.0
            else:
                sgn = math.copysign(1.0, box.velocity) if box.velocity != 0.0 else 1.0
                a_box = (f_box - box.mu_kinetic * box.mass * self.robot.g * sgn) / box.mass
            v_new = box.velocity + a_box * dt
            x_new = box.position + box.velocity * dt + 0.5 * a_box * dt * dt
            if box.velocity != 0.0 and v_new * box.velocity < 0.0 and f_box <= thresh:
                v_new = 0.0
            new_box = replace(
                box, position=x_new, velocity=v_new, in_contact=f_box > 0.0
            )

        # integrate the smooth states
        tau_ankle = -pilot.command.ankle_torque(self.human)  # restoring sense
        y = (
            world.human.theta, world.human.theta_dot,
            world.robot.x_w, world.robot.x_w_dot,
            world.robot.theta, world.robot.theta_dot,
            *world.arm_q_l, *world.arm_qd_l,
            *world.arm_q_r, *world.arm_qd_r,
        )
        q_des = (*cmd_l.q_des, *cmd_r.q_des)
        tau_ext = (*tau_ext_l, *tau_ext_r)
        y2 = self.kernel.rk4_step(
            y, dt,
            self.human.m_body, self.human.h_tilde,
            self.robot.m_base, self.robot.m_body, self.robot.h_com, self.robot.g,
            tau_ankle, f_hmi, wheel.effort, f_ext,
            ARM_INERTIA, ARM_KP, ARM_KD, q_des, tau_ext,
        )
        self._step_index += 1
        t_new = self._step_index * dt
        for name, value in zip(_STATE_NAMES, y2):
            if not math.isfinite(value):
                raise SimulationDiverged(name, t_new)

        # measured motor torques: the load the PD held against, mapped to
        # motor space; the left drivetrain is sign-mirrored
        tau_m_r = MotorTorques(-tau_pd_r / GEAR_MAP, "right")
        tau_m_l = MotorTorques(tau_pd_l / GEAR_MAP, "left")
        estimate = self.estimator.update(
            tau_m_r, tau_m_l,
            ArmJoints(q=np.asarray(y2[14:18]), side="right"),
            ArmJoints(q=np.asarray(y2[6:10]), side="left"),
        )

        new_world = WorldState(
            t=t_new,
            human=AipState(y2[0], y2[1]),
            robot=CartPoleState(y2[2], y2[3], y2[4], y2[5]),
            box=new_box,
            arm_q_l=np.asarray(y2[6:10]),
            arm_qd_l=np.asarray(y2[10:14]),
            arm_q_r=np.asarray(y2[14:18]),
            arm_qd_r=np.asarray(y2[18:22]),
            estimate=estimate,
        )

        frame = TelemetryFrame(
            t=t_new,
            theta_h=new_world.human.theta,
            theta_dot_h=new_world.human.theta_dot,
            xi_h=xi_h,
            cop=cop,
            com_disp=com_disp,
            x_w=new_world.robot.x_w,
            x_w_dot=new_world.robot.x_w_dot,
            theta_r=new_world.robot.theta,
            theta_dot_r=new_world.robot.theta_dot,
            xi_r=xi_r,
            box_x=new_box.position if new_box else math.nan,
            box_v=new_box.velocity if new_box else math.nan,
            box_contact=bool(new_box.in_contact) if new_box else False,
            hand_x=hand_x_r,
            target_x=self.target_x(t_new),
            f_r=f_r,
            f_hmi=f_hmi,
            f_s=f_s,
            f_ext=f_ext,
            f_ext_hat=estimate.f_ext_hat,
            f_ext_scaled=estimate.f_ext_scaled,
            wheel_effort=wheel.effort,
            wheel_torque=wheel.effort_torque,
            residual=residual,
            saturated=wheel.saturated,
            cop_clamped=pilot.cop_clamped,
            arm_clamped=flags_l["clamped"] or flags_r["clamped"],
            singular=flags_l["singular"] or flags_r["singular"],
            linear_regime_violated=(
                not new_world.robot.linear_regime or abs(new_world.human.theta) >= math.pi / 2
            ),
            estimator_held=estimate.held,
            balanced=dcm_within_support(new_world.human, self.human, self.polygon),
            l_q0=new_world.arm_q_l[0], l_q1=new_world.arm_q_l[1],
            l_q2=new_world.arm_q_l[2], l_q3=new_world.arm_q_l[3],
            r_q0=new_world.arm_q_r[0], r_q1=new_world.arm_q_r[1],
            r_q2=new_world.arm_q_r[2], r_q3=new_world.arm_q_r[3],
        )
        return new_world, frame


def run_scenario(
    human: HumanParams,
    robot: RobotParams,
    polygon: SupportPolygon,
    retarget: RetargetConfig,
    scenario: ScenarioConfig,
    script: PilotScript | None = None,
    kernel: str | None = None,
) -> ScenarioResult:
    """Run a scenario headless and compute its report."""
    engine = SimEngine(human, robot, polygon, retarget, scenario, kernel=kernel)
    if script is None:
        script = PilotScript.load(scenario.script) if scenario.script else PilotScript.zero()
    pilot = ScriptedPilot(script, human, polygon, scenario.pilot)
    world = engine.initial_world()
    frames: list[TelemetryFrame] = []
    f_hmi = 0.0
    hand_x = math.nan
    diverged = None
    for _ in range(scenario.steps):
        pin = pilot.command(
            world.t, world.human, world.robot, f_hmi,
            hand_x=hand_x, target_x=engine.target_x(world.t),
        )
        try:
            world, frame = engine.step(world, pin)
        except SimulationDiverged as exc:
            diverged = exc.field_name
            break
        frames.append(frame)
        f_hmi = frame.f_hmi
        hand_x = frame.hand_x
    report = build_report(scenario, frames, diverged)
    return ScenarioResult(frames=frames, world=world, report=report, diverged=diverged)


def build_report(scenario: ScenarioConfig, frames: list, diverged: str | None) -> dict:
    """Scenario metrics; schema documented in docs/telemetry.md."""
    report: dict = {
        "report_version": 1,
        "kind": scenario.kind,
        "duration": scenario.duration,
        "steps": len(frames),
        "diverged": diverged,
    }
    if not frames:
        return report
    t = telemetry_array(frames, "t")
    report["flags"] = {
        "saturated": bool(any(f.saturated for f in frames)),
        "cop_clamped": bool(any(f.cop_clamped for f in frames)),
        "linear_regime_violated": bool(any(f.linear_regime_violated for f in frames)),
        "singular": bool(any(f.singular for f in frames)),
    }
    report["max_abs_residual"] = float(np.abs(telemetry_array(frames, "residual")).max())
    report["max_lean_h"] = float(np.abs(telemetry_array(frames, "theta_h")).max())
    report["max_f_r"] = float(np.abs(telemetry_array(frames, "f_r")).max())
    report["robot_displacement"] = float(frames[-1].x_w)

    if scenario.kind == "box_push" and scenario.box is not None:
        v = telemetry_array(frames, "box_v")
        f_hmi = telemetry_array(frames, "f_hmi")
        moving = v > 1e-9
        report["moved"] = bool(moving.any())
        accel = np.diff(v, prepend=v[0]) / scenario.dt
        report["peak_box_accel"] = float(np.abs(accel).max())
        report["accel_within_bound"] = bool(
            np.abs(accel).max() <= scenario.accel_bound
        )
        report["max_abs_f_ext"] = float(np.abs(telemetry_array(frames, "f_ext")).max())
        if moving.any():
            t_break = float(t[moving][0])
            report["t_break"] = t_break
            window = moving & (t >= t_break)
            report["mean_velocity"] = float(v[window].mean())
            steady = moving & (t >= t_break + 2.0)
            if steady.any():
                report["steady_f_hmi"] = float(f_hmi[steady].mean())
                report["steady_velocity"] = float(v[steady].mean())
            report["box_travel"] = float(frames[-1].box_x - frames[0].box_x)
    elif scenario.kind == "hand_off" and scenario.target is not None:
        hand = telemetry_array(frames, "hand_x")
        target = telemetry_array(frames, "target_x")
        d = np.abs(hand - target)
        report["min_distance"] = float(d.min())
        inside = d < 0.05
        need = int(round(0.2 / scenario.dt))
        run = best = 0
        start = None
        best_start = None
        for i, ok in enumerate(inside):
            run = run + 1 if ok else 0
            if run == 1:
                start = i
            if run > best:
                best, best_start = run, start
        caught = best >= need
        report["caught"] = bool(caught)
        report["within_reach_time"] = float(best * scenario.dt)
        if caught:
            w = slice(best_start, best_start + best)
            hand_v = np.gradient(hand[w], scenario.dt)
            report["catch_time"] = float(t[best_start])
            report["relative_speed_at_catch"] = float(
                np.abs(hand_v - scenario.target.speed).mean()
            )
    elif scenario.kind == "free_balance":
        report["max_abs_x"] = float(np.abs(telemetry_array(frames, "x_w")).max())
        report["max_abs_theta_r"] = float(np.abs(telemetry_array(frames, "theta_r")).max())
        report["nominal"] = bool(
            not report["flags"]["linear_regime_violated"] and diverged is None
        )
    return report
