import json
import os
from pathlib import Path

import numpy as np
import pytest

from adjhrl import cli, embed, harness, plotting

DATA = Path(__file__).parent / "data"


def test_line_chart_golden_bytes():
    summaries = [
        {"label": "hrac", "x": [0, 100, 200, 300], "mean": [0.0, 1.5, 3.2, 4.0],
         "sem": [0.0, 0.3, 0.4, 0.2]},
        {"label": "noadj", "x": [0, 100, 200, 300], "mean": [0.0, 0.5, 0.9, 1.1],
         "sem": [0.0, 0.2, 0.3, 0.3]},
    ]
    svg = plotting.line_chart(summaries, title="keychest comparative",
                              x_label="episode", y_label="mean episode reward")
    assert svg == (DATA / "golden_curve.svg").read_text()


def test_line_chart_zero_sem_omits_band():
    flat = [{"label": "a", "x": [0, 1], "mean": [1.0, 1.0], "sem": [0.0, 0.0]}]
    svg = plotting.line_chart(flat)
    assert "<polygon" not in svg
    assert "<polyline" in svg
    banded = [{"label": "a", "x": [0, 1], "mean": [1.0, 1.0], "sem": [0.1, 0.1]}]
    assert "<polygon" in plotting.line_chart(banded)


def test_line_chart_legend_entries():
    two = [{"label": "first", "x": [0, 1], "mean": [0, 1], "sem": [0, 0]},
           {"label": "second", "x": [0, 1], "mean": [1, 0], "sem": [0, 0]}]
    svg = plotting.line_chart(two)
    assert svg.count('class="legend"') == 2
    assert ">first<" in svg and ">second<" in svg


def test_line_chart_escapes_markup():
    svg = plotting.line_chart([{"label": "a<b&c", "x": [0, 1],
                                "mean": [0, 1], "sem": [0, 0]}])
    assert "a&lt;b&amp;c" in svg


def test_line_chart_requires_input():
    with pytest.raises(ValueError):
        plotting.line_chart([])


def test_grid_heatmap_walls_and_marks(maze_env):
    lay = maze_env.layout
    values = np.where(lay.walls, np.nan, 1.0)
    svg = plotting.grid_heatmap(values, lay.walls, title="t",
                                marks={(1, 1): "s"})
    assert svg.count("<rect") == lay.width * lay.height
    assert svg.count('fill="#222222"') == int(lay.walls.sum())
    assert ">s<" in svg


# ---------------------------------------------------------------------------
# command-line interface

def test_cli_print_config(capsys):
    assert cli.main(["train", "--print-config"]) == 0
    out = capsys.readouterr().out
    parsed = harness.config_from_text(out)
    assert parsed == harness.RunConfig()


def test_cli_train_flag_overrides(capsys):
    cli.main(["train", "--print-config", "--env", "maze", "--noise", "0.1",
              "--variant", "noadj"])
    out = capsys.readouterr().out
    cfg = harness.config_from_text(out)
    assert cfg.env == "maze" and cfg.noise == 0.1 and cfg.variant == "noadj"


def test_cli_oracle_check_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["oracle-check", "--fixtures", "3", "--k", "2,3",
                     "--seed", "1", "--max-states", "12", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["ok"] is True
    assert report["fixtures"] == 3
    assert report["surrogate_failures"] == 0
    assert report["value_failures"] == 0
    assert report["surrogate_checks"] > 0
    capsys.readouterr()


@pytest.mark.filterwarnings("ignore:replay buffer")
def test_cli_train_eval_and_embed_eval(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(
        "env = maze\nnoise = 0.0\nsigma = 3.0\ntotal_episodes = 2\n"
        "warmup_steps = 300\npretrain_epochs = 1\nonline_epochs = 1\n"
        "online_freq_steps = 10000\nbatches_per_epoch = 2\neval_every = 1\n"
        "eval_episodes = 1\nbatch_size = 8\nreplay_size = 200\n")
    outdir = tmp_path / "run"
    assert cli.main(["train", "--config", str(cfg_path), "--seed", "0",
                     "--outdir", str(outdir)]) == 0
    capsys.readouterr()

    assert cli.main(["eval", "--checkpoint", str(outdir / "checkpoints"),
                     "--episodes", "2"]) == 0
    out = capsys.readouterr().out
    assert "mean episode reward" in out and "success rate" in out

    svg_path = tmp_path / "heat.svg"
    assert cli.main(["embed-eval", "--checkpoint",
                     str(outdir / "checkpoints" / "adjacency"),
                     "--env", "maze", "--out", str(svg_path)]) == 0
    out = capsys.readouterr().out
    assert "accuracy vs oracle" in out
    assert svg_path.exists() and svg_path.read_text().startswith("<svg")


@pytest.mark.filterwarnings("ignore:replay buffer")
def test_cli_aggregate_and_plot(tmp_path, capsys):
    cfg = harness.RunConfig(env="maze", variant="hrac", noise=0.0, sigma=3.0,
                            total_episodes=2, warmup_steps=200,
                            pretrain_epochs=1, online_epochs=1,
                            online_freq_steps=10000, batches_per_epoch=2,
                            eval_every=1, eval_episodes=1, batch_size=8,
                            replay_size=200)
    files = []
    for seed in (0, 1):
        out = tmp_path / f"s{seed}"
        harness.run(cfg, seed=seed, outdir=str(out))
        files.append(str(out / "eval.csv"))
    summary = tmp_path / "summary.json"
    assert cli.main(["aggregate", *files, "--out", str(summary),
                     "--label", "maze"]) == 0
    loaded = harness.load_summary(str(summary))
    assert loaded["n_runs"] == 2 and loaded["label"] == "maze"

    chart = tmp_path / "chart.svg"
    assert cli.main(["plot", str(summary), "--out", str(chart),
                     "--title", "maze"]) == 0
    assert chart.read_text().startswith("<svg")
    capsys.readouterr()
