import json

import pytest
from asyncclick.testing import CliRunner
from pydantic import ValidationError

import cli.__main__ as cli_module
from app.constants import ExperimentKind
from app.constants.status import Status
from app.experiments import ExperimentConfig
from app.lib.exception import QTEException
from cli.__main__ import EXIT_CONFIG, EXIT_FAILURE, EXIT_NUMERICAL, EXIT_OK, cli, exit_code_for

pytestmark = pytest.mark.anyio


def write_document(tmp_path, document):
    path = tmp_path / "run.json"
    path.write_text(document if isinstance(document, str) else json.dumps(document), encoding="utf-8")
    return str(path)


async def test_list_prints_manifest():
    result = await CliRunner().invoke(cli, ["list"])
    assert result.exit_code == EXIT_OK
    names = [entry["name"] for entry in json.loads(result.stdout)]
    assert names == [kind.value for kind in ExperimentKind]
    assert all(entry["figure"] for entry in json.loads(result.stdout))


async def test_invalid_json_exits_with_config_code(tmp_path):
    path = write_document(tmp_path, "{broken")
    result = await CliRunner().invoke(cli, ["run", path, "--out", str(tmp_path / "out")])
    assert result.exit_code == EXIT_CONFIG


async def test_unknown_field_exits_with_config_code(tmp_path):
    path = write_document(tmp_path, {"experiment": "runtime_table", "warp_factor": 9})
    result = await CliRunner().invoke(cli, ["run", path, "--out", str(tmp_path / "out")])
    assert result.exit_code == EXIT_CONFIG


async def test_run_writes_tables_and_summary(tmp_path):
    path = write_document(tmp_path, {"experiment": "runtime_table", "ds": [24, 120], "replicas": 1})
    out = tmp_path / "out"
    result = await CliRunner().invoke(cli, ["run", path, "--out", str(out), "--seed", "7"])
    assert result.exit_code == EXIT_OK
    assert (out / "replica_00" / "runtime.csv").is_file()
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["seed"] == 7
    assert summary["experiment"] == "runtime_table"


async def test_repeat_creates_replica_directories(tmp_path):
    path = write_document(tmp_path, {"experiment": "runtime_table", "ds": [24]})
    out = tmp_path / "out"
    result = await CliRunner().invoke(cli, ["run", path, "--out", str(out), "--repeat", "2"])
    assert result.exit_code == EXIT_OK
    assert sorted(p.name for p in out.iterdir() if p.is_dir()) == ["replica_00", "replica_01"]


async def test_numerical_abort_exit_code(tmp_path, monkeypatch):
    def diverging(config, replica):
        raise QTEException(Status.NUMERICAL_ABORT, "non-finite parameter derivative")

    monkeypatch.setattr(cli_module, "run_replica", diverging)
    path = write_document(tmp_path, {"experiment": "runtime_table", "replicas": 1})
    result = await CliRunner().invoke(cli, ["run", path, "--out", str(tmp_path / "out")])
    assert result.exit_code == EXIT_NUMERICAL


def test_exit_codes():
    assert exit_code_for(QTEException(Status.CONFIG_ERROR, "bad")) == EXIT_CONFIG
    assert exit_code_for(QTEException(Status.SINGULAR_SYSTEM, "singular")) == EXIT_NUMERICAL
    assert exit_code_for(QTEException(Status.SIZE_LIMIT, "too big")) == EXIT_FAILURE
    assert exit_code_for(RuntimeError("boom")) == EXIT_FAILURE
    with pytest.raises(ValidationError) as exc:
        ExperimentConfig.model_validate({"experiment": "runtime_table", "bogus": 1})
    assert exit_code_for(exc.value) == EXIT_CONFIG
