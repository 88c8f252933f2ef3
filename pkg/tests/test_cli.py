"""Operator surface: subcommands, exit codes, artifact files, config loading."""

from __future__ import annotations

import json
import socket
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from latinv.cli import main
from latinv.config import (
    RunConfig,
    atomic_write_json,
    format_cell,
    format_csv,
    load_csv,
    load_report,
    load_run_config,
)
from latinv.errors import ConfigError, InputError
from latinv.oracles import make_testbed_oracle


def write_json(path: Path, payload: dict) -> str:
    path.write_text(json.dumps(payload))
    return str(path)


def small_run_config(tmp_path: Path, out: str = "out", **trainer) -> str:
    settings = dict(max_rounds=25, hidden_dims=[16, 16], rollout_steps=3, extraction_samples=4)
    settings.update(trainer)
    payload = {
        "trainer": settings,
        "oracle": {"kind": "testbed"},
        "labels": [0],
        "out_dir": str(tmp_path / out),
        "metrics": {"accuracy_samples": 100, "ranking_samples": 200},
    }
    return write_json(tmp_path / f"{out}-config.json", payload)


def free_tcp_port() -> int:
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


# -- gradcheck ---------------------------------------------------------------


def test_gradcheck_passes_and_prints_the_worst_error(capsys) -> None:
    assert main(["gradcheck", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert "max relative error" in out
    assert "PASS" in out


def test_gradcheck_detects_an_injected_gradient_bug(capsys) -> None:
    assert main(["gradcheck", "--trials", "5", "--corrupt-layer", "0"]) == 1
    assert "FAIL" in capsys.readouterr().out


# -- attack ------------------------------------------------------------------


def test_attack_writes_report_rewards_and_eval(tmp_path, capsys) -> None:
    config = small_run_config(tmp_path)
    assert main(["attack", "--config", config]) == 0
    base = tmp_path / "out" / "0"
    report = json.loads((base / "report.json").read_text())
    assert report["status"] == "completed"
    assert report["label"] == 0
    assert len(report["episodes"]) == 25
    assert report["eval"]["samples_used"] == {"distributional_accuracy": 100, "ranking": 200}
    eval_sheet = json.loads((base / "eval.json").read_text())
    assert set(eval_sheet) == {"distributional_accuracy", "top1", "top5", "histogram", "samples_used"}
    lines = (base / "rewards.csv").read_text().splitlines()
    assert lines[0] == "episode,R_mu,R_sigma,r_next,r_a,r_mu,r_sigma,r_c,alpha,noise,queries"
    assert len(lines) == 26
    assert "queries" in capsys.readouterr().out


def test_attack_with_zero_rounds_completes_with_empty_artifacts(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=0)
    assert main(["attack", "--config", config]) == 0
    report = json.loads((tmp_path / "out" / "0" / "report.json").read_text())
    assert report["episodes"] == []
    assert report["best"] is None
    assert report["final"] is None
    assert report["eval"] is None
    assert report["queries"] == {"training": 0, "extraction": 0, "total": 0}
    rewards = (tmp_path / "out" / "0" / "rewards.csv").read_text()
    assert rewards == "episode,R_mu,R_sigma,r_next,r_a,r_mu,r_sigma,r_c,alpha,noise,queries\n"


def test_attack_reruns_are_byte_identical(tmp_path) -> None:
    config_a = small_run_config(tmp_path, out="a")
    config_b = small_run_config(tmp_path, out="b")
    assert main(["attack", "--config", config_a]) == 0
    assert main(["attack", "--config", config_b]) == 0
    for name in ("report.json", "rewards.csv", "eval.json"):
        a = (tmp_path / "a" / "0" / name).read_bytes()
        b = (tmp_path / "b" / "0" / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_attack_through_child_process_oracle_matches_builtin(tmp_path) -> None:
    config = small_run_config(tmp_path, out="local", max_rounds=15)
    assert main(["attack", "--config", config]) == 0
    endpoint = f"cmd:{sys.executable} -m latinv oracle-serve"
    remote_out = tmp_path / "remote"
    assert main(["attack", "--config", config, "--oracle", endpoint, "--out", str(remote_out)]) == 0
    local = (tmp_path / "local" / "0" / "report.json").read_bytes()
    remote = (remote_out / "0" / "report.json").read_bytes()
    assert local == remote


def test_attack_label_flag_targets_multiple_labels(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=5)
    assert main(["attack", "--config", config, "--label", "1,3"]) == 0
    assert (tmp_path / "out" / "1" / "report.json").exists()
    assert (tmp_path / "out" / "3" / "report.json").exists()
    assert not (tmp_path / "out" / "0").exists()


def test_attack_label_out_of_range_exits_four(tmp_path, capsys) -> None:
    config = small_run_config(tmp_path, max_rounds=5)
    assert main(["attack", "--config", config, "--label", "9"]) == 4
    assert "mismatch" in capsys.readouterr().err


def test_attack_unreachable_oracle_exits_three(tmp_path, capsys) -> None:
    config = small_run_config(tmp_path, max_rounds=5)
    endpoint = f"tcp:127.0.0.1:{free_tcp_port()}"
    assert main(["attack", "--config", config, "--oracle", endpoint]) == 3
    assert "oracle error" in capsys.readouterr().err


# -- config validation through the CLI ---------------------------------------


def test_unknown_config_field_exits_two_and_names_it(tmp_path, capsys) -> None:
    config = write_json(tmp_path / "bad.json", {"trainer": {"max_round": 5}})
    assert main(["attack", "--config", config]) == 2
    err = capsys.readouterr().err
    assert "max_round" in err


def test_invalid_json_exits_two_with_location(tmp_path, capsys) -> None:
    path = tmp_path / "broken.json"
    path.write_text('{"trainer": {,}}')
    assert main(["attack", "--config", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_inconsistent_trainer_settings_exit_two(tmp_path) -> None:
    config = write_json(
        tmp_path / "c.json",
        {"trainer": {"batch_size": 64, "warmup_min_buffer": 8}},
    )
    assert main(["attack", "--config", config]) == 2


def test_bad_oracle_flag_exits_two(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=5)
    assert main(["attack", "--config", config, "--oracle", "carrier-pigeon"]) == 2


# -- eval --------------------------------------------------------------------


def test_eval_point_mass_at_prototype_scores_perfectly(tmp_path, capsys) -> None:
    protos = make_testbed_oracle().spec.prototypes
    dist = write_json(
        tmp_path / "dist.json",
        {"mu": list(protos[2]), "sigma": [0.001] * 8},
    )
    config = small_run_config(tmp_path)
    assert main(["eval", dist, "--config", config, "--label", "2"]) == 0
    sheet = json.loads(capsys.readouterr().out)
    assert sheet["distributional_accuracy"] == 1.0
    assert sheet["top1"] == 1.0
    assert sheet["top5"] == 1.0


def test_eval_writes_eval_json_when_out_is_given(tmp_path) -> None:
    dist = write_json(tmp_path / "dist.json", {"mu": [0.0] * 8, "sigma": [1.0] * 8})
    out = tmp_path / "evalout"
    assert main(["eval", dist, "--out", str(out)]) == 0
    sheet = json.loads((out / "eval.json").read_text())
    assert 0.0 <= sheet["distributional_accuracy"] <= 1.0
    assert sheet["top5"] == 1.0


def test_eval_malformed_distribution_exits_two(tmp_path) -> None:
    dist = write_json(tmp_path / "dist.json", {"mu": [0.0] * 8})
    assert main(["eval", dist]) == 2


def test_eval_dimension_mismatch_exits_four(tmp_path) -> None:
    dist = write_json(tmp_path / "dist.json", {"mu": [0.0] * 4, "sigma": [1.0] * 4})
    assert main(["eval", dist]) == 4


# -- bench-agents ------------------------------------------------------------


def test_bench_agents_compares_both_modes_over_shared_seeds(tmp_path, capsys) -> None:
    config = small_run_config(tmp_path, max_rounds=6, rollout_steps=2, seed=4)
    assert main(["bench-agents", "--config", config, "--runs", "2"]) == 0
    header, rows = load_csv(str(tmp_path / "out" / "bench.csv"))
    assert header == ["mode", "seed", "label", "accuracy", "mean_R_mu", "mean_R_sigma"]
    assert [(r[0], r[1]) for r in rows] == [
        ("maddpg", 4.0), ("maddpg", 5.0), ("independent", 4.0), ("independent", 5.0),
    ]
    for tag in ("maddpg-s4-l0", "maddpg-s5-l0", "independent-s4-l0", "independent-s5-l0"):
        assert (tmp_path / "out" / f"{tag}-rewards.csv").exists()
    out = capsys.readouterr().out
    assert "maddpg: mean accuracy" in out
    assert "independent: mean accuracy" in out


# -- sweep-dims --------------------------------------------------------------


def test_sweep_dims_runs_each_dimension_on_a_matching_testbed(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=5)
    assert main(["sweep-dims", "--config", config, "--dims", "2,3"]) == 0
    header, rows = load_csv(str(tmp_path / "out" / "sweep.csv"))
    assert header == ["dimension", "seed", "accuracy"]
    assert [r[0] for r in rows] == [2.0, 3.0]
    for dim in (2, 3):
        report = json.loads((tmp_path / "out" / f"dim-{dim}" / "0" / "report.json").read_text())
        assert report["config"]["latent_dim"] == dim
        assert report["oracle"]["latent_dim"] == dim


def test_sweep_dims_rejects_non_testbed_oracles(tmp_path) -> None:
    payload = {
        "trainer": {"max_rounds": 5},
        "oracle": {"kind": "external", "endpoint": "tcp:127.0.0.1:9"},
        "out_dir": str(tmp_path / "out"),
    }
    config = write_json(tmp_path / "c.json", payload)
    assert main(["sweep-dims", "--config", config, "--dims", "4"]) == 2


# -- oracle-serve ------------------------------------------------------------


def test_oracle_serve_answers_over_stdio() -> None:
    proc = subprocess.run(
        [sys.executable, "-m", "latinv", "oracle-serve"],
        input='{"id":0,"op":"meta"}\n{"id":1,"op":"query","codes":[[0,0,0,0,0,0,0,0]]}\n',
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0
    lines = proc.stdout.strip().split("\n")
    assert json.loads(lines[0]) == {"id": 0, "latent_dim": 8, "num_classes": 5}
    probs = json.loads(lines[1])["probs"][0]
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)


def test_oracle_serve_refuses_external_endpoints(tmp_path) -> None:
    assert main(["oracle-serve", "--oracle", "tcp:127.0.0.1:9"]) == 2


# -- artifact formats --------------------------------------------------------


def test_report_round_trips_through_the_loader(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=8)
    assert main(["attack", "--config", config]) == 0
    path = tmp_path / "out" / "0" / "report.json"
    report = load_report(str(path))
    assert report.label == 0
    assert report.status == "completed"
    assert len(report.episodes) == 8
    assert report.queries["total"] == report.queries["training"] + report.queries["extraction"]


def test_rewards_csv_episodes_and_queries_are_monotone(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=10)
    assert main(["attack", "--config", config]) == 0
    header, rows = load_csv(str(tmp_path / "out" / "0" / "rewards.csv"))
    episodes = [r[header.index("episode")] for r in rows]
    queries = [r[header.index("queries")] for r in rows]
    assert episodes == [float(i) for i in range(10)]
    assert queries == [4.0 * (i + 1) for i in range(10)]


def test_atomic_writes_leave_no_temp_files(tmp_path) -> None:
    config = small_run_config(tmp_path, max_rounds=3)
    assert main(["attack", "--config", config]) == 0
    leftovers = list((tmp_path / "out").rglob("*.tmp"))
    assert leftovers == []


def test_csv_cells_format_exactly_and_reject_oddities() -> None:
    assert format_cell(3) == "3"
    assert format_cell(0.30000000000000004) == "0.30000000000000004"
    assert format_cell("maddpg") == "maddpg"
    with pytest.raises(InputError):
        format_cell(True)
    with pytest.raises(InputError):
        format_cell("a,b")
    text = format_csv(["a", "b"], [[1, 2.5]])
    assert text == "a,b\n1,2.5\n"
    with pytest.raises(InputError):
        format_csv(["a"], [[1, 2]])


def test_run_config_loader_covers_all_sections(tmp_path) -> None:
    payload = {
        "trainer": {"max_rounds": 7, "seed": 3},
        "oracle": {"kind": "testbed", "latent_dim": 4, "num_classes": 3},
        "labels": 2,
        "out_dir": "somewhere",
        "metrics": {"accuracy_samples": 50},
    }
    config = load_run_config(write_json(tmp_path / "c.json", payload))
    assert config.trainer.max_rounds == 7
    assert config.trainer.seed == 3
    assert config.labels == (2,)
    assert config.out_dir == "somewhere"
    assert config.metrics.accuracy_samples == 50
    assert config.metrics.ranking_samples == 10_000


def test_run_config_rejects_duplicate_labels_and_bad_oracle_kind() -> None:
    with pytest.raises(ConfigError):
        RunConfig(labels=(1, 1))
    with pytest.raises(ConfigError):
        RunConfig(oracle={"kind": "mystery"})
    with pytest.raises(ConfigError):
        RunConfig(oracle={"kind": "testbed", "endpoint": "tcp:x:1"})


def test_atomic_write_json_rejects_non_finite_values(tmp_path) -> None:
    with pytest.raises(ValueError):
        atomic_write_json(str(tmp_path / "x.json"), {"v": float("nan")})
    assert not (tmp_path / "x.json").exists()
