import math
import os
from pathlib import Path

import numpy as np
import pytest

import amigo_lab as al


def test_formulas():
    assert al.reward_threshold(12, 10) == pytest.approx(0.7)
    assert al.reward_threshold(3, 10) == pytest.approx(-0.3)
    assert al.reward_threshold(0, 10) == pytest.approx(-0.3)
    assert al.reward_linexp(20, 10) == pytest.approx(math.exp(-1))
    assert al.reward_gaussian(0, 10) == -1.0
    assert al.reward_gaussian(15, 10) == pytest.approx(0.5)
    assert al.extrinsic_reward(1, 100) == pytest.approx(0.991)


def test_env_steps_and_encodes():
    env = al.Env("TwoRoom-8", seed=3)
    assert (env.width, env.height) == (8, 8)
    obs = env.observation()
    assert obs.shape == (5, 8, 8)
    goal = env.observation(goal=(2, 3))
    assert goal.shape == (6, 8, 8)
    assert goal[5].sum() == 1 and goal[5, 3, 2] == 1
    reward, done, reached = env.step(0)
    assert env.step_count == 1 and not done and reward == 0.0
    assert len(env.render().splitlines()) == 8
    with pytest.raises(ValueError):
        env.step(9)


def test_bad_names_raise():
    with pytest.raises(al.EnvError):
        al.Env("NoSuchWorld-3")
    with pytest.raises(al.ConfigError):
        al.load_config(Path(os.environ["AMIGO_SOURCE_DIR"]) / "configs" / "two_room_desk.json", ["train.bogus=1"])


def test_tiny_run_round_trip(tmp_path):
    cfg = al.load_config(Path(os.environ["AMIGO_SOURCE_DIR"]) / "configs" / "two_room_desk.json")
    cfg["name"] = "smoke"
    cfg["output_dir"] = str(tmp_path)
    cfg["env"] = "TwoRoom-6"
    cfg["train"].update(total_steps=600, num_workers=2, student_batch=2, unroll_length=10,
                        teacher_batch=10, metrics_interval=200)
    res = al.train(cfg, 1)
    assert res["steps"] == 600
    assert res["goals_proposed"] == res["goals_resolved"] + res["goals_pending"]

    runs = al.find_runs(tmp_path)
    assert [(r.experiment, r.seed) for r in runs] == [("smoke", 1)]
    recs = runs[0].metrics()
    assert [r["step"] for r in recs] == [200, 400, 600]
    assert all(r["schema"] == al.METRICS_SCHEMA for r in recs)

    ckpt = al.read_checkpoint(Path(res["dir"]) / "student.ckpt")
    assert ckpt["policy.weight"].shape == (6, 64)
    assert all(np.isfinite(v).all() for v in ckpt.values())

    ev = al.evaluate(res["dir"], "TwoRoom-6", episodes=3, seed=5)
    assert ev["episodes"] == 3
    assert 0.0 <= ev["mean_return"] <= 1.0


def test_metrics_schema_mismatch(tmp_path):
    bad = tmp_path / "metrics.jsonl"
    bad.write_text('{"schema": 999, "step": 1}\n')
    with pytest.raises(ValueError):
        al.read_metrics(bad)
