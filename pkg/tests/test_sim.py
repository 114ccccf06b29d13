"""Closed-loop engine tests: step contracts, contact, determinism."""

import math
from dataclasses import replace

import numpy as np
import pytest

from telesim.arms import ArmJoints
from telesim.params import AipState, CartPoleState, HumanCommand, ParameterError
from telesim.retarget import RetargetConfig
from telesim.sim import (
    BoxState,
    PilotInput,
    PilotScript,
    ScenarioConfig,
    SimEngine,
    SimulationDiverged,
    load_scenario,
    run_scenario,
    scenario_from_dict,
)
from telesim.sim.engine import build_report
from telesim.sim.scenario import BoxConfig, PilotConfig
from telesim.sim.world import TELEMETRY_FIELDS, WorldState, initial_world, telemetry_array


def make_engine(profile, scenario=None, **kw):
    human, robot, poly = profile
    scenario = scenario or ScenarioConfig(kind="free_balance", duration=1.0)
    return SimEngine(human, robot, poly, RetargetConfig(), scenario, **kw)


def zero_input():
    return PilotInput(
        command=HumanCommand(cop=0.0, com_disp=0.0),
        arm_left=ArmJoints(q=np.zeros(4), side="left"),
        arm_right=ArmJoints(q=np.zeros(4), side="right"),
    )


class TestStep:
    def test_equilibrium_is_exact_fixed_point(self, default_profile):
        engine = make_engine(default_profile, ScenarioConfig(kind="free_balance", duration=10.0))
        world = engine.initial_world()
        for _ in range(int(10.0 / 0.002)):
            world, frame = engine.step(world, zero_input())
        assert world.human == AipState(0.0, 0.0)
        assert world.robot == CartPoleState(0.0, 0.0, 0.0, 0.0)
        assert np.all(world.arm_q_l == 0.0) and np.all(world.arm_q_r == 0.0)
        assert frame.f_hmi == 0.0 and frame.wheel_effort == 0.0

    def test_time_advances_by_exact_steps(self, default_profile):
        engine = make_engine(default_profile)
        world = engine.initial_world()
        for i in range(5):
            world, _ = engine.step(world, zero_input())
            assert world.t == (i + 1) * 0.002

    def test_step_lean_tracking(self, default_profile):
        # scripted step of 0.05 rad at t=1: robot DCM converges onto the
        # human DCM within 3 s of the step, nobody falls
        human, robot, poly = default_profile
        sc = ScenarioConfig(kind="free_balance", duration=5.0)
        script = PilotScript(
            np.array([0.0, 1.0, 1.002, 5.0]),
            {"theta_h": np.array([0.0, 0.0, 0.05, 0.05])},
        )
        res = run_scenario(human, robot, poly, RetargetConfig(), sc, script=script)
        assert res.diverged is None
        t = telemetry_array(res.frames, "t")
        err = np.abs(
            telemetry_array(res.frames, "xi_r") - telemetry_array(res.frames, "xi_h")
        )
        assert err[t >= 4.0].max() < 0.005
        assert not any(f.linear_regime_violated for f in res.frames)

    def test_divergence_names_field(self, default_profile):
        human, robot, poly = default_profile
        sc = scenario_from_dict(
            {
                "kind": "box_push",
                "duration": 1.0,
                "box": {"mass": 1.0, "x0": 0.2, "mu_static": 0.1, "mu_kinetic": 0.05},
                "contact_stiffness": 1e14,
                "contact_damping": 0.0,
            }
        )
        script = PilotScript(
            np.array([0.0, 0.2]),
            {"theta_h": np.array([0.0, 0.0]), "r_q0": np.array([1.5, 1.5]),
             "l_q0": np.array([1.5, 1.5])},
        )
        res = run_scenario(human, robot, poly, RetargetConfig(), sc, script=script)
        assert res.diverged is not None
        assert res.report["diverged"] == res.diverged
        assert len(res.frames) < sc.steps  # partial telemetry kept


class TestContact:
    @pytest.fixture
    def contact_engine(self, default_profile):
        sc = scenario_from_dict(
            {
                "kind": "box_push",
                "duration": 5.0,
                "box": {"mass": 8.5, "x0": 0.55, "mu_static": 0.35, "mu_kinetic": 0.30},
            }
        )
        return make_engine(default_profile, sc)

    def _reach_input(self):
        q = np.array([1.5, 0.0, 0.0, 0.3])
        return PilotInput(
            command=HumanCommand(cop=0.02, com_disp=0.0),
            arm_left=ArmJoints(q=q, side="left"),
            arm_right=ArmJoints(q=q, side="right"),
        )

    def test_separated_hands_no_force(self, default_profile):
        sc = scenario_from_dict(
            {"kind": "box_push", "duration": 1.0, "box": {"mass": 8.5, "x0": 5.0}}
        )
        engine = make_engine(default_profile, sc)
        world = engine.initial_world()
        world, frame = engine.step(world, self._reach_input())
        assert frame.f_ext == 0.0 and not frame.box_contact
        assert world.box.position == 5.0 and world.box.velocity == 0.0

    def test_third_law_and_momentum(self, contact_engine):
        engine = contact_engine
        world = engine.initial_world()
        pin = self._reach_input()
        for _ in range(int(4.0 / 0.002)):
            prev_v = world.box.velocity
            world, frame = engine.step(world, pin)
            # unilateral push
            assert frame.f_ext <= 0.0
            if not frame.box_contact:
                assert frame.f_ext == 0.0
            dv = world.box.velocity - prev_v
            if prev_v == 0.0 and world.box.velocity == 0.0:
                continue  # static: no momentum change by construction
            g = engine.robot.g
            b = world.box
            sgn = math.copysign(1.0, prev_v) if prev_v != 0.0 else 1.0
            if world.box.velocity != 0.0:
                expect = (-frame.f_ext - b.mu_kinetic * b.mass * g * sgn) / b.mass * 0.002
                assert dv == pytest.approx(expect, abs=1e-12)

    def test_stiction_holds_exactly(self, default_profile):
        # below the breakaway threshold the box velocity stays literally 0.0
        human, robot, poly = default_profile
        sc = replace(load_scenario("blocked_push"), duration=4.0)
        res = run_scenario(human, robot, poly, RetargetConfig(), sc)
        assert res.diverged is None
        assert any(f.box_contact for f in res.frames)
        assert all(f.box_v == 0.0 for f in res.frames)
        assert all(f.box_x == res.frames[0].box_x for f in res.frames)

    def test_breakaway_threshold_arithmetic(self):
        # 8.5 kg at mu_s=0.35: threshold 29.18 N; 25 N holds, 35 N does not
        box = BoxState(mass=8.5, position=1.0, mu_static=0.35, mu_kinetic=0.30)
        thresh = box.mu_static * box.mass * 9.81
        assert thresh == pytest.approx(29.18, abs=0.01)
        assert 25.0 < thresh < 35.0
        # kinetic acceleration once moving: (35 - mu_k m g)/m = 1.177
        a = (35.0 - box.mu_kinetic * box.mass * 9.81) / box.mass
        assert a == pytest.approx(1.18, abs=0.01)

    def test_residual_logged_below_1e8(self, contact_engine):
        engine = contact_engine
        world = engine.initial_world()
        pin = self._reach_input()
        for _ in range(1000):
            world, frame = engine.step(world, pin)
            assert abs(frame.residual) < 1e-8


class TestDeterminism:
    def test_bit_identical_reruns(self, default_profile):
        human, robot, poly = default_profile
        sc = load_scenario("box_push_8p5")
        sc = replace(sc, duration=3.0)
        a = run_scenario(human, robot, poly, RetargetConfig(), sc)
        b = run_scenario(human, robot, poly, RetargetConfig(), sc)
        rows_a = [f.row() for f in a.frames]
        rows_b = [f.row() for f in b.frames]
        assert rows_a == rows_b

    def test_spring_toggle_changes_outcome(self, default_profile):
        human, robot, poly = default_profile
        sc = replace(load_scenario("box_push_8p5"), duration=3.0)
        a = run_scenario(human, robot, poly, RetargetConfig(), sc)
        b = run_scenario(
            human, robot, poly, RetargetConfig(), replace(sc, spring_enabled=False)
        )
        assert [f.row() for f in a.frames] != [f.row() for f in b.frames]
        # residual closes on both sides of the toggle
        assert np.abs(telemetry_array(b.frames, "residual")).max() < 1e-8


class TestScenarioConfig:
    def test_rejects_bad_kind(self):
        with pytest.raises(ParameterError):
            ScenarioConfig(kind="fly", duration=1.0)

    def test_rejects_bad_dt(self):
        with pytest.raises(ParameterError):
            ScenarioConfig(kind="free_balance", duration=1.0, dt=0.05)

    def test_script_requires_increasing_time(self):
        with pytest.raises(ParameterError):
            PilotScript(np.array([0.0, 0.0]), {"theta_h": np.zeros(2)})

    def test_shipped_scenarios_load(self):
        for name in ("free_balance", "box_push_8p5", "hand_off", "blocked_push"):
            sc = load_scenario(name)
            assert sc.steps > 0

    def test_missing_scenario_raises(self):
        with pytest.raises(FileNotFoundError):
            load_scenario("no_such_scenario")


class TestTelemetry:
    def test_row_matches_field_order(self, default_profile):
        engine = make_engine(default_profile)
        world = engine.initial_world()
        _, frame = engine.step(world, zero_input())
        row = frame.row().split(",")
        assert len(row) == len(TELEMETRY_FIELDS)
        d = frame.as_dict()
        assert list(d.keys()) == TELEMETRY_FIELDS

    def test_csv_round_trip(self, tmp_path, default_profile):
        from telesim.sim import write_telemetry_csv, telemetry_header

        engine = make_engine(default_profile)
        world = engine.initial_world()
        frames = []
        for _ in range(10):
            world, fr = engine.step(world, zero_input())
            frames.append(fr)
        out = tmp_path / "t.csv"
        write_telemetry_csv(frames, out)
        lines = out.read_text().splitlines()
        assert lines[0] == telemetry_header()
        assert len(lines) == 11
