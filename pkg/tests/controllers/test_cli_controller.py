"""
Tests for the command-line surface.

Each command runs end to end on a tiny synthetic configuration; pytest-mock
stands in for the HTTP server and for injected failures.
"""
import json

import pytest

from src.controllers.cli_controller import (
    CHECKPOINT_FILE,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    build_parser,
    main,
)
from src.core import config
from src.exceptions.training import DivergenceError

TINY_SETTINGS = """\
NUM_CLASSES=3
IMAGE_SIZE=24
SAMPLES_PER_CLASS=4
STEM_CHANNELS=4
BLOCK_CHANNELS=[6, 8]
EPOCHS=1
BATCH_SIZE=4
LR_INIT=1e-3
LR_FLOOR=1e-5
TRAIN_RATIO=0.5
"""


@pytest.fixture(autouse=True)
def quiet_logging(mocker):
    return mocker.patch("src.controllers.cli_controller.configure_logging")


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.env"
    path.write_text(TINY_SETTINGS)
    return path


@pytest.fixture
def run_cli(config_file, tmp_path):
    out = tmp_path / "out"

    def run(command: str, *extra: str) -> int:
        return main([command, "--config", str(config_file), "--out", str(out), *extra])

    run.out = out
    return run


@pytest.fixture
def trained(run_cli):
    assert run_cli("train") == EXIT_OK
    return run_cli.out / CHECKPOINT_FILE


@pytest.mark.integration
class TestCommands:
    def test_train(self, capsys, run_cli, trained):
        output = capsys.readouterr().out

        assert trained.exists()
        assert "Res+IRB+SF+SSA:" in output
        assert "wall clock:" in output
        kinds = [json.loads(line)["kind"] for line in (run_cli.out / "metrics.jsonl").read_text().splitlines()]
        assert kinds == ["epoch", "run", "summary"]

    def test_train_twice_gives_identical_metrics(self, run_cli, trained):
        first = (run_cli.out / "metrics.jsonl").read_bytes()
        assert run_cli("train") == EXIT_OK
        assert (run_cli.out / "metrics.jsonl").read_bytes() == first

    def test_eval(self, run_cli, trained, capsys):
        capsys.readouterr()
        assert run_cli("eval", "--checkpoint", str(trained)) == EXIT_OK
        output = capsys.readouterr().out
        assert output.startswith("accuracy:")
        assert "on 6 samples" in output

    def test_visualize(self, run_cli, trained):
        assert run_cli("visualize", "--checkpoint", str(trained), "--index", "2") == EXIT_OK
        sidecar = json.loads((run_cli.out / "heatmaps" / "heatmaps.json").read_text())
        assert len(sidecar["maps"]) == 5

    def test_visualize_index_out_of_range(self, run_cli, trained):
        assert run_cli("visualize", "--checkpoint", str(trained), "--index", "6") == EXIT_USAGE

    def test_eval_class_mismatch(self, run_cli, config_file, trained, tmp_path):
        config_file.write_text(TINY_SETTINGS.replace("NUM_CLASSES=3", "NUM_CLASSES=2"))
        assert run_cli("eval", "--checkpoint", str(trained)) == EXIT_USAGE

    def test_ablate(self, run_cli, capsys):
        assert run_cli("ablate") == EXIT_OK
        output = capsys.readouterr().out
        for label in ("Res ", "Res+attention", "Res+LMS", "Res+CACPR", "Res+IRB ", "Res+IRB+SF ", "Res+IRB+SF+SSA"):
            assert label in output

    def test_gen_data(self, run_cli):
        assert run_cli("gen-data") == EXIT_OK
        assert len((run_cli.out / "manifest.jsonl").read_text().splitlines()) == 12
        assert len(list((run_cli.out / "images").rglob("*.png"))) == 12

    def test_serve(self, run_cli, trained, mocker, monkeypatch):
        monkeypatch.setattr(config.settings, "CHECKPOINT_PATH", None)
        server = mocker.patch("uvicorn.run")

        assert run_cli("serve", "--checkpoint", str(trained), "--port", "9000") == EXIT_OK

        assert server.call_args.kwargs["port"] == 9000
        assert config.settings.CHECKPOINT_PATH == trained


@pytest.mark.unit
class TestExitCodes:
    def test_unknown_variant(self, run_cli, capsys):
        assert run_cli("train", "--variant", "res_everything") == EXIT_USAGE
        assert "unknown ablation variant" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.env")]) == EXIT_USAGE

    def test_invalid_value(self, run_cli):
        assert run_cli("train", "--ratio", "1.5") == EXIT_USAGE

    def test_unknown_flag(self, run_cli):
        with pytest.raises(SystemExit) as info:
            run_cli("train", "--bogus")
        assert info.value.code == EXIT_USAGE

    def test_missing_checkpoint_is_runtime_failure(self, run_cli, tmp_path, capsys):
        assert run_cli("eval", "--checkpoint", str(tmp_path / "absent.irb")) == EXIT_RUNTIME
        assert capsys.readouterr().err.startswith("error:")

    def test_divergence_is_runtime_failure(self, run_cli, mocker):
        mocker.patch(
            "src.controllers.cli_controller.ProtocolService.run_protocol",
            side_effect=DivergenceError(0, 1, ["striped-0000"]),
        )
        assert run_cli("train") == EXIT_RUNTIME

    def test_gen_data_needs_synthetic_source(self, run_cli, tmp_path):
        assert run_cli("gen-data", "--data", str(tmp_path)) == EXIT_USAGE

    def test_parser_lists_every_command(self):
        subparsers = build_parser()._subparsers._group_actions[0]
        assert set(subparsers.choices) == {"train", "eval", "ablate", "visualize", "gen-data", "serve"}
