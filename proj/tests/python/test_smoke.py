import json
import math

import pytest

import memesim


def small(**overrides):
    return memesim.config("baseline", dims="6x6", steps=12, seed=3, **overrides)


def test_presets_cover_every_ablation():
    names = {p["name"] for p in memesim.presets()}
    assert names == {
        "baseline",
        "no_evolution",
        "no_variation",
        "no_mutation",
        "no_skip",
        "no_selection_hom",
        "no_selection_het",
        "simplified",
    }
    simplified = next(p for p in memesim.presets() if p["name"] == "simplified")
    assert simplified["message_shape"] == (1, 30)


def test_config_round_trip_and_errors():
    c = small()
    assert c.dims == (6, 6)
    again = memesim.Config.from_text(c.to_text())
    assert again.dynamics_hash() == c.dynamics_hash()
    assert c.effective_promote_prob == pytest.approx(0.1)
    with pytest.raises(memesim.ConfigError):
        c.set("no_such_key", "1")
    with pytest.raises(memesim.ConfigError):
        memesim.config("no_such_preset")


def test_run_writes_outputs_and_replays(tmp_path):
    summary = memesim.run(small(), str(tmp_path), workers=2)
    assert summary["steps"] == 12
    for name in ("stats.csv", "registry.jsonl", "raster.pgm", "events.csv", "messages.log", "summary.json"):
        assert (tmp_path / name).exists()
    assert json.loads((tmp_path / "summary.json").read_text()) == summary

    replayed = memesim.replay(str(tmp_path / "messages.log"))
    assert replayed["dims"] == (6, 6)
    assert len(replayed["stats"]) == 12
    assert replayed["max_population"] == summary["max_population"]
    header, *lines = (tmp_path / "stats.csv").read_text().splitlines()
    assert header == "step,max_pop,n_above_40,n_above_8,coverage,distinct"
    assert [int(l.split(",")[1]) for l in lines] == [r["max_pop"] for r in replayed["stats"]]


def test_simulation_stepping_matches_run():
    c = small()
    sim = memesim.Simulation(c, workers=1)
    for _ in range(c.steps):
        record = sim.step()
        assert len(record["keys"]) == 36
    assert sim.current_step == 12
    stats = sim.stats()
    assert max(s["max_pop"] for s in stats) == memesim.run(c)["max_population"]
    for row in stats:
        assert 1 <= row["distinct"] <= 36


def test_checkpoint_resume_is_exact(tmp_path):
    c = small(checkpoint_every=6)
    full = memesim.run(c, str(tmp_path / "full"))
    resumed = memesim.resume(
        str(tmp_path / "full" / "checkpoint_6.bin"),
        expected_hash=c.dynamics_hash(),
        out_dir=str(tmp_path / "resumed"),
    )
    # Replication counts cover only the steps executed by each call.
    assert resumed.pop("replication_events") < full.pop("replication_events")
    assert resumed == full
    with pytest.raises(memesim.CheckpointError):
        memesim.resume(str(tmp_path / "full" / "checkpoint_6.bin"), expected_hash=c.dynamics_hash() ^ 1)


def test_sweep_rows_and_csv(tmp_path):
    base = memesim.sweep_base_config()
    base.dims = (5, 5)
    base.steps = 3
    base.set("task_max_steps", "5")
    rows = memesim.sweep(base, [0.0, 1.0], [0.5], [1], str(tmp_path))
    assert [(r["gamma_s"], r["gamma_f"], r["seed"]) for r in rows] == [(0.0, 0.5, 1), (1.0, 0.5, 1)]
    assert memesim.read_sweep_csv((tmp_path / "sweep.csv").read_text()) == rows


def test_adaptive_softmax_moves_toward_target():
    z = [12.0] + [0.0] * 99
    before = memesim.entropy(memesim.softmax(z))
    after = memesim.entropy(memesim.adaptive_softmax(z))
    assert abs(after - 0.6) < abs(before - 0.6)
    assert math.isclose(sum(memesim.adaptive_softmax(z)), 1.0, rel_tol=1e-12)
