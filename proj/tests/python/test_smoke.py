"""Smoke tests for the nearfar extension module and the CLI binary."""

import json
import math
import os
import subprocess
import sys

import pytest

import nearfar as nf


def test_box_conversions_round_trip():
    box = nf.CornerBox(0.0, 0.0, 4.0, 2.0)
    state = nf.corner_to_state(box)
    assert (state.x, state.y, state.s, state.r) == (2.0, 1.0, 8.0, 2.0)
    back = nf.state_to_corner(state)
    assert back == box


def test_iou():
    a = nf.CornerBox(0, 0, 2, 2)
    b = nf.CornerBox(1, 0, 3, 2)
    assert math.isclose(nf.iou(a, b), 1.0 / 3.0, rel_tol=1e-12)
    assert nf.iou(a, a) == 1.0


def test_kalman_predict_example():
    state = nf.kalman_init(nf.StateBox(10, 10, 100, 2))
    mean = state.mean
    mean[4] = 1.0
    mean[5] = -1.0
    mean[6] = 5.0
    state.mean = mean
    pred = nf.kalman_predict(state)
    assert (pred.box.x, pred.box.y, pred.box.s, pred.box.r) == (11.0, 9.0, 105.0, 2.0)


def test_assignment_is_optimal_not_greedy():
    pairs = nf.solve_assignment([[0.5, 0.4], [0.45, 0.05]])
    assert pairs == [(0, 1), (1, 0)]


def test_sampling_hand_examples():
    assert nf.normalized_weights([1.0, 3.0]) == [0.25, 0.75]
    s = nf.clipped_probabilities([1.0, 1.0, 8.0], m=2)
    assert s == [pytest.approx(0.2), pytest.approx(0.2), 1.0]
    assert nf.relative_variance([1.0, 1.0, 2.0], m=2) == pytest.approx(0.75, abs=1e-12)
    assert nf.relative_variance([1.0, 1.0, 2.0], m=3) == pytest.approx(0.9, abs=1e-12)


def test_efficiency_curve_full_sample():
    losses = [0.1 * i for i in range(1, 101)]
    curve = nf.efficiency_curve(losses, [0.5, 1.0])
    assert curve[-1].r == 1.0
    assert curve[0].r <= curve[-1].r


def test_end_to_end_zero_noise_labeling():
    spec = nf.default_scene_spec(frame_count=31, object_count=4, seed=11)
    gt = nf.generate_scene(spec)
    config = nf.make_config(
        {
            "detect.sigma_reg": 0.0,
            "detect.beta": 0.0,
            "scene.keyframe_interval": 10,
            "seed": 11,
        }
    )
    labels = nf.label_sequence("seq0", gt, config)
    report = nf.eval_ap(labels, nf.gt_to_records("seq0", gt), iou_threshold=0.5)
    assert report.map == 1.0
    assert report.fp == 0


def test_config_rejects_unknown_keys():
    with pytest.raises(Exception):
        nf.make_config({"definitely.not.a.key": 1})


def test_cli_binary_pipeline(tmp_path):
    cli = os.environ.get("NEARFAR_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("NEARFAR_CLI not set")

    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scene.frames": 21, "scene.objects": 3, "scene.keyframe_interval": 5}))

    def run(*args):
        return subprocess.run([cli, *args], capture_output=True, text=True)

    assert run("simulate", "--config", str(cfg), "--seed", "42", "--out", str(tmp_path / "scenes")).returncode == 0
    assert run(
        "label", "--config", str(cfg), "--seed", "42",
        "--gt", str(tmp_path / "scenes"), "--out", str(tmp_path / "labels.jsonl"), "--quiet",
    ).returncode == 0

    result = run(
        "eval", "--pred", str(tmp_path / "labels.jsonl"), "--gt", str(tmp_path / "scenes"), "--iou", "0.5"
    )
    assert result.returncode == 0
    assert "mAP" in result.stdout


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
