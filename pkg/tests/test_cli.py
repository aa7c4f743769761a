import subprocess

import numpy as np
import pytest

from fisheyelab.cli import main
from fisheyelab.dataset import load_manifest
from fisheyelab.evaluate import parse_table, read_report_lines
from fisheyelab.images import load_image, make_sample_sources
from fisheyelab.train import read_train_report

MICRO_CONFIG = (
    "# toy-scale settings\n"
    "input_size = 32\n"
    "enc_channels = 4,8,8,8,8\n"
    "flow_channels = 4,8,8,8\n"
    "batch_size = 4\n"
    "learning_rate = 1e-3\n"
)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """synth -> pretrain -> finetune, all through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    make_sample_sources(root / "src", 37, size=32, seed=200)
    cfg = root / "micro.cfg"
    cfg.write_text(MICRO_CONFIG)

    ds = root / "ds"
    assert main([
        "synth", "--src", str(root / "src"), "--counts", "10,18,9",
        "--size", "32", "--seed", "7", "--out", str(ds),
    ]) == 0

    stage1 = root / "stage1"
    assert main([
        "pretrain", "--data", str(ds), "--config", str(cfg),
        "--steps", "2", "--seed", "3", "--out", str(stage1),
    ]) == 0

    stage2 = root / "stage2"
    assert main([
        "finetune", "--data", str(ds), "--config", str(cfg),
        "--ckpt", str(stage1 / "pretrained.ckpt"),
        "--steps", "2", "--seed", "3", "--out", str(stage2),
    ]) == 0

    return {
        "root": root,
        "cfg": cfg,
        "ds": ds,
        "pretrained": stage1 / "pretrained.ckpt",
        "finetuned": stage2 / "finetuned.ckpt",
    }


class TestSynth:
    def test_record_count_and_splits(self, pipeline, capsys):
        manifest = load_manifest(pipeline["ds"])
        assert len(manifest.records) == 37
        assert len(manifest.split_records("pretrain")) == 10
        assert len(manifest.split_records("finetune")) == 18
        assert len(manifest.split_records("test")) == 9
        assert manifest.degrees_in_split("finetune") == list(range(1, 10))

    def test_bad_counts_exit_2(self, pipeline, capsys):
        assert main([
            "synth", "--src", str(pipeline["root"] / "src"),
            "--counts", "1,2", "--out", str(pipeline["root"] / "nope"),
        ]) == 2
        assert "counts" in capsys.readouterr().err

    def test_missing_out_exit_2(self, pipeline, capsys):
        assert main([
            "synth", "--src", str(pipeline["root"] / "src"), "--counts", "1,1,1",
        ]) == 2


class TestTrainCommands:
    def test_pretrain_artifacts(self, pipeline):
        assert pipeline["pretrained"].is_file()
        report = read_train_report(pipeline["pretrained"].parent / "pretrain_report.txt")
        assert report.stage == "pretrained"
        assert len(report.records) == 2
        assert all(r.degree_label == 5 for r in report.records)

    def test_finetune_artifacts(self, pipeline):
        assert pipeline["finetuned"].is_file()
        report = read_train_report(pipeline["finetuned"].parent / "finetune_report.txt")
        assert report.stage == "finetuned"
        assert len(report.records) == 2

    def test_finetune_from_fresh_model_exit_1(self, pipeline, tmp_path, capsys):
        # building a checkpoint that never went through pretraining
        import torch

        from fisheyelab.checkpoint import save_checkpoint
        from fisheyelab.config import model_config_from, parse_config_file
        from fisheyelab.model import RectifierNet

        torch.manual_seed(0)
        model = RectifierNet(model_config_from(parse_config_file(pipeline["cfg"])))
        raw = save_checkpoint(model, tmp_path / "raw.ckpt")
        assert main([
            "finetune", "--data", str(pipeline["ds"]), "--config", str(pipeline["cfg"]),
            "--ckpt", str(raw), "--steps", "1", "--out", str(tmp_path / "out"),
        ]) == 1
        assert "pretrained" in capsys.readouterr().err


class TestEval:
    def test_table_and_lines_agree(self, pipeline, tmp_path, capsys):
        out = tmp_path / "report"
        assert main([
            "eval", "--ckpt", str(pipeline["finetuned"]),
            "--data", str(pipeline["ds"]), "--out", str(out),
        ]) == 0
        table_text = capsys.readouterr().out
        by_degree, avgs = parse_table(table_text)
        assert sorted(by_degree) == list(range(1, 10))

        lines_by_degree, lines_avgs = read_report_lines(out / "eval_lines.txt")
        assert lines_by_degree == by_degree
        assert lines_avgs == avgs

    def test_missing_checkpoint_exit_2(self, pipeline, capsys):
        assert main([
            "eval", "--ckpt", str(pipeline["root"] / "ghost.ckpt"),
            "--data", str(pipeline["ds"]),
        ]) == 2


class TestRectify:
    def test_writes_image(self, pipeline, tmp_path, capsys):
        manifest = load_manifest(pipeline["ds"])
        record = manifest.split_records("test")[0]
        out = tmp_path / "rect.png"
        assert main([
            "rectify", "--ckpt", str(pipeline["finetuned"]),
            "--image", str(manifest.root / record.fisheye_path),
            "--degree", str(record.degree_label), "--out", str(out),
        ]) == 0
        assert load_image(out).shape == (32, 32, 3)

    def test_degree_equals_one_hot_blend(self, pipeline, tmp_path):
        manifest = load_manifest(pipeline["ds"])
        record = manifest.split_records("test")[0]
        image = str(manifest.root / record.fisheye_path)
        a, b = tmp_path / "by_degree.png", tmp_path / "by_blend.png"
        assert main([
            "rectify", "--ckpt", str(pipeline["finetuned"]), "--image", image,
            "--degree", "5", "--out", str(a),
        ]) == 0
        assert main([
            "rectify", "--ckpt", str(pipeline["finetuned"]), "--image", image,
            "--blend", "0,0,0,0,1,0,0,0,0", "--out", str(b),
        ]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_degree_and_blend_conflict_exit_2(self, pipeline, tmp_path, capsys):
        assert main([
            "rectify", "--ckpt", str(pipeline["finetuned"]), "--image", "x.png",
            "--degree", "5", "--blend", "1,0,0,0,0,0,0,0,0",
            "--out", str(tmp_path / "never.png"),
        ]) == 2

    def test_missing_image_exit_1(self, pipeline, tmp_path, capsys):
        assert main([
            "rectify", "--ckpt", str(pipeline["finetuned"]),
            "--image", str(tmp_path / "ghost.png"),
            "--degree", "5", "--out", str(tmp_path / "never.png"),
        ]) == 1


class TestExportQueries:
    def test_exports_nine_slots(self, pipeline, tmp_path, capsys):
        out = tmp_path / "queries"
        assert main([
            "export-queries", "--ckpt", str(pipeline["finetuned"]), "--out", str(out),
        ]) == 0
        arrays = sorted(out.glob("query_*.npy"))
        assert len(arrays) == 9
        assert np.load(arrays[0]).shape == (3, 32, 32)


class TestParserBasics:
    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_console_script_help(self):
        proc = subprocess.run(["fisheyelab", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "synth" in proc.stdout and "serve" in proc.stdout
