"""CLI contract tests: exit codes, outputs, comparison modes."""

import json
from pathlib import Path

import pytest

from telesim import cli
from telesim.config import load_config
from telesim.sim import load_scenario


def run_cli(args):
    return cli.main(args)


class TestRun:
    def test_free_balance_nominal(self, tmp_path):
        out = tmp_path / "fb.csv"
        code = run_cli(["run", "--scenario", "free_balance", "--duration", "2",
                        "--out", str(out)])
        assert code == 0
        report = json.loads(out.with_suffix(".report.json").read_text())
        assert report["nominal"] and report["max_abs_x"] == 0.0
        header = out.read_text().splitlines()[0]
        assert header.startswith("t,theta_h,")

    def test_missing_script_exits_1(self, tmp_path, capsys):
        code = run_cli(["run", "--scenario", "free_balance",
                        "--script", "/does/not/exist.csv",
                        "--out", str(tmp_path / "x.csv")])
        assert code == 1
        assert "/does/not/exist.csv" in capsys.readouterr().err

    def test_missing_scenario_exits_1(self, tmp_path):
        code = run_cli(["run", "--scenario", "no_such", "--out", str(tmp_path / "x.csv")])
        assert code == 1

    def test_diverging_run_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({
            "kind": "box_push", "duration": 1.0,
            "box": {"mass": 1.0, "x0": 0.2, "mu_static": 0.1, "mu_kinetic": 0.05},
            "contact_stiffness": 1e14, "contact_damping": 0.0,
            "script": "push_8p5",
        }))
        code = run_cli(["run", "--scenario", str(bad), "--out", str(tmp_path / "d.csv")])
        assert code == 2
        # partial telemetry still written
        assert len((tmp_path / "d.csv").read_text().splitlines()) > 1

    def test_gnuplot_flag_emits_script(self, tmp_path):
        out = tmp_path / "fb.csv"
        code = run_cli(["run", "--scenario", "free_balance", "--duration", "1",
                        "--out", str(out), "--gnuplot"])
        assert code == 0
        assert "plot" in out.with_suffix(".gp").read_text()


class TestCompare:
    def test_spring_mode_shows_necessity(self, tmp_path):
        out = tmp_path / "spring.json"
        code = run_cli(["compare", "--mode", "spring", "--out", str(out)])
        assert code == 0
        table = json.loads(out.read_text())
        assert table["a"]["spring_enabled"] and not table["b"]["spring_enabled"]
        assert table["a"]["moved"] and not table["b"]["moved"]
        assert table["a"]["max_f_r"] > table["b"]["max_f_r"]
        assert table["a"]["max_lean"] > table["b"]["max_lean"]

    def test_identical_toggles_identical_metrics(self, tmp_path):
        cfg = load_config(None)
        sc = load_scenario("box_push_8p5")
        from dataclasses import replace

        table = cli.compare_spring(cfg, replace(sc, duration=3.0), None,
                                   enabled=(True, True))
        a, b = table["a"], table["b"]
        assert a == b

    def test_mapping_mode(self, tmp_path):
        out = tmp_path / "map.json"
        code = run_cli(["compare", "--mode", "mapping", "--out", str(out)])
        assert code == 0
        table = json.loads(out.read_text())
        assert table["legacy"]["x_des_final"] == pytest.approx(9.81, rel=0.01)
        assert abs(table["dcm"]["robot_displacement"]) < 1.0


class TestReplayCli:
    def test_replay_check(self, tmp_path):
        # record a deterministic scripted session through the recorder
        from telesim.service import SessionRecorder
        from telesim.service.session import resolve_command
        from telesim.sim.engine import SimEngine
        from dataclasses import replace

        cfg = load_config(None)
        sc = replace(load_scenario("free_balance"), duration=0.5)
        engine = SimEngine(cfg.human, cfg.robot, cfg.support_polygon, cfg.retarget, sc)
        rec = SessionRecorder(tmp_path / "s.jsonl", cfg, sc, engine.kernel.KERNEL_NAME)
        world = engine.initial_world()
        f_hmi = 0.0
        rec.log_command(0.0, {"seq": 1, "lean": 0.02})
        for _ in range(sc.steps):
            pin = resolve_command({"seq": 1, "lean": 0.02}, cfg.human,
                                  cfg.support_polygon, sc.pilot, world.human, f_hmi)
            world, frame = engine.step(world, pin)
            f_hmi = frame.f_hmi
            rec.log_frame(frame.row())
        rec.close()
        out = tmp_path / "replayed.csv"
        code = run_cli(["replay", str(tmp_path / "s.jsonl"), "--out", str(out),
                        "--check"])
        assert code == 0
        assert len(out.read_text().splitlines()) == sc.steps + 1

    def test_replay_missing_file(self, tmp_path):
        assert run_cli(["replay", str(tmp_path / "nope.jsonl")]) == 1
