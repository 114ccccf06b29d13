"""End-to-end console checks against a live server.

Exercises the pieces of the console contract that are observable headless:
static assets served, a lean command visibly moving the robot within two
state frames, and observer isolation.  Skipped when the console build is
absent; the rest of the suite does not depend on it.
"""

import json
import time
import urllib.request
from pathlib import Path

import pytest
from websockets.sync.client import connect

from test_service import ServerThread, hello, make_server, next_of_type

DIST = Path(__file__).resolve().parent.parent / "frontend" / "dist"

pytestmark = pytest.mark.skipif(
    not (DIST / "index.html").exists(), reason="console not built"
)


def test_static_assets_served(tmp_path):
    with make_server(tmp_path, static_dir=str(DIST)) as srv:
        html = urllib.request.urlopen(
            f"http://127.0.0.1:{srv.port}/", timeout=5
        ).read().decode()
        assert "telesim pilot console" in html
        js = urllib.request.urlopen(
            f"http://127.0.0.1:{srv.port}/main.js", timeout=5
        ).read().decode()
        assert "TeleopClient" in js
        with pytest.raises(urllib.error.HTTPError):
            urllib.request.urlopen(
                f"http://127.0.0.1:{srv.port}/../secret", timeout=5
            )


def test_lean_command_acts_within_two_state_frames(tmp_path):
    with make_server(tmp_path, static_dir=str(DIST)) as srv:
        with connect(srv.url) as pilot:
            assert hello(pilot)["role"] == "pilot"
            baseline = next_of_type(pilot, "state")
            assert baseline["frame"]["x_w_dot"] == 0.0
            pilot.send(json.dumps({"type": "command", "seq": 1, "lean": 0.3}))
            moved = False
            for _ in range(3):  # command lands at a tick boundary
                st = next_of_type(pilot, "state")
                if abs(st["frame"]["x_w_dot"]) > 1e-6 or abs(st["frame"]["wheel_effort"]) > 1e-6:
                    moved = True
                    break
            assert moved


def test_observer_stream_without_mutation(tmp_path):
    with make_server(tmp_path, static_dir=str(DIST)) as srv:
        with connect(srv.url) as pilot, connect(srv.url) as obs:
            hello(pilot, "pilot")
            assert hello(obs, "observer")["role"] == "observer"
            obs.send(json.dumps({"type": "command", "seq": 9, "lean": 0.3}))
            assert next_of_type(obs, "error")["code"] == "observer_readonly"
            time.sleep(0.2)
            assert next_of_type(obs, "state")["frame"]["x_w"] == 0.0
