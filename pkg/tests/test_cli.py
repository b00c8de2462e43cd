import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from fieldscout import io as fio
from fieldscout.camera import fov_for_footprint
from fieldscout.cli import main
from fieldscout.imaging import RgbImage
from fieldscout.synthetic import nested_regions_image, cliff_scene


@pytest.fixture()
def nested_png(tmp_path):
    img, (mid, small) = nested_regions_image()
    path = tmp_path / "nested.png"
    fio.save_rgb_png(img, path)
    return path, small


class TestAnalyze:
    def test_writes_step_style_artifacts(self, tmp_path, nested_png, capsys):
        path, small = nested_png
        out = tmp_path / "out"
        assert main(["analyze", str(path), "--out", str(out)]) == 0
        for name in (
            "mosaic_h.png", "seg_i.png", "uncommon_i.png",
            "interest_raw.png", "interest_blur.png", "points.json", "report.json", "manifest.json",
        ):
            assert (out / name).exists(), name
        points = fio.load_json(out / "points.json")["points"]
        assert points[0]["rank"] == 1
        assert abs(points[0]["x"] - small.cx) <= 10
        assert abs(points[0]["y"] - small.cy) <= 10
        assert "rank 1" in capsys.readouterr().out

    def test_top_flag_bounds_point_count(self, tmp_path, nested_png):
        path, _ = nested_png
        out = tmp_path / "out"
        assert main(["analyze", str(path), "--top", "1", "--out", str(out)]) == 0
        assert len(fio.load_json(out / "points.json")["points"]) <= 1

    def test_levels_below_two_is_usage_error(self, tmp_path, nested_png):
        path, _ = nested_png
        with pytest.raises(SystemExit) as exc:
            main(["analyze", str(path), "--levels", "1"])
        assert exc.value.code == 1

    def test_missing_input_is_runtime_error(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "nope.png"), "--out", str(tmp_path / "o")]) == 2
        assert "nope.png" in capsys.readouterr().err

    def test_reanalysis_is_bit_reproducible(self, tmp_path, nested_png):
        path, _ = nested_png
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["analyze", str(path), "--out", str(a)]) == 0
        assert main(["analyze", str(path), "--out", str(b)]) == 0
        ma = fio.load_json(a / "manifest.json")["files"]
        mb = fio.load_json(b / "manifest.json")["files"]
        assert ma == mb

    def test_ppm_input_accepted(self, tmp_path):
        img, _ = nested_regions_image()
        ppm = tmp_path / "img.ppm"
        fio.save_ppm(RgbImage(img), ppm)
        assert main(["analyze", str(ppm), "--out", str(tmp_path / "o")]) == 0


class TestSessionCommand:
    def write_config(self, tmp_path, scene_stem="demo", **overrides) -> Path:
        scene = cliff_scene(np.random.default_rng(5))
        descriptor = scene.save(tmp_path, stem=scene_stem)
        cfg = {
            "scene": descriptor.name,
            "distances": [60.0, 10.0],
            "base_fov": fov_for_footprint(60.0, scene.physical_width / 4),
            "mode": "autonomous",
        }
        cfg.update(overrides)
        path = tmp_path / "config.json"
        fio.dump_json(cfg, path)
        return path

    def test_demo_session_runs_and_archives(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "run"
        assert main(["session", str(cfg), "--out", str(out)]) == 0
        assert (out / "step000" / "manifest.json").exists()
        assert (out / "step001" / "manifest.json").exists()
        assert (out / "session.json").exists()
        text = capsys.readouterr().out
        assert "session done" in text and "60.0m" in text

    def test_missing_scene_names_the_path(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        data = fio.load_json(cfg)
        data["scene"] = "gone.json"
        fio.dump_json(data, cfg)
        assert main(["session", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "gone.json" in capsys.readouterr().err

    def test_interactive_mode_points_to_serve(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        assert main(["session", str(cfg), "--mode", "interactive"]) == 1
        assert "serve" in capsys.readouterr().err

    def test_missing_config_is_runtime_error(self, tmp_path, capsys):
        assert main(["session", str(tmp_path / "none.json")]) == 2


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_for_health(port: int, timeout: float = 20.0) -> dict:
    import httpx

    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            r = httpx.get(f"http://127.0.0.1:{port}/api/health", timeout=1.0)
            if r.status_code == 200:
                return r.json()
        except httpx.TransportError:
            time.sleep(0.2)
    raise TimeoutError("service never became healthy")


class TestServeCommand:
    def spawn(self, tmp_path, port, scene_dir=None):
        scene_dir = scene_dir or tmp_path / "scenes"
        scene_dir.mkdir(exist_ok=True)
        return subprocess.Popen(
            [
                sys.executable, "-m", "fieldscout.cli", "serve",
                "--port", str(port), "--scene-dir", str(scene_dir),
                "--archive-dir", str(tmp_path / "archives"),
            ],
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
        )

    def test_serve_lifecycle_and_empty_scene_list(self, tmp_path):
        port = free_port()
        proc = self.spawn(tmp_path, port)
        try:
            assert wait_for_health(port)["status"] == "ok"
            import httpx

            assert httpx.get(f"http://127.0.0.1:{port}/api/scenes", timeout=2.0).json() == []
        finally:
            proc.terminate()
            proc.wait(timeout=10)

    def test_second_serve_on_same_port_exits_2(self, tmp_path):
        port = free_port()
        first = self.spawn(tmp_path, port)
        try:
            wait_for_health(port)
            second = self.spawn(tmp_path, port)
            assert second.wait(timeout=30) == 2
            assert b"cannot bind" in second.stderr.read()
        finally:
            first.terminate()
            first.wait(timeout=10)

    def test_missing_scene_dir_exits_2(self, tmp_path, capsys):
        assert main(["serve", "--scene-dir", str(tmp_path / "missing"), "--port", str(free_port())]) == 2
