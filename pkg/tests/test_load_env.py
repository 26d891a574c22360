import os

import pytest

from errors import ConfigError
from load_env import env_int, env_path, load_env_file


def test_loads_values_without_overriding(tmp_path, monkeypatch):
    env_file = tmp_path / ".env"
    env_file.write_text(
        "# run defaults\nLAMBDA_FCS_JOBS=4\nLAMBDA_FCS_LOG_DIR='/tmp/lambda logs'\nEXISTING=new\nnot a pair\n",
        encoding="utf-8",
    )
    # empty values count as unset and are restored after the test
    monkeypatch.setenv("LAMBDA_FCS_JOBS", "")
    monkeypatch.setenv("LAMBDA_FCS_LOG_DIR", "")
    monkeypatch.setenv("EXISTING", "old")

    loaded = load_env_file(str(env_file))

    assert loaded == {"LAMBDA_FCS_JOBS": "4", "LAMBDA_FCS_LOG_DIR": "/tmp/lambda logs"}
    assert env_int("LAMBDA_FCS_JOBS") == 4
    assert str(env_path("LAMBDA_FCS_LOG_DIR", tmp_path)) == "/tmp/lambda logs"
    assert env_path("LAMBDA_FCS_UNSET_DIR", tmp_path) == tmp_path
    assert os.environ["EXISTING"] == "old"


def test_missing_file_is_fine(tmp_path):
    assert load_env_file(str(tmp_path / "absent.env")) == {}


@pytest.mark.parametrize("raw, match", [("four", "integer"), ("0", ">= 1")])
def test_env_int_errors(monkeypatch, raw, match):
    monkeypatch.setenv("LAMBDA_FCS_JOBS", raw)
    with pytest.raises(ConfigError, match=match):
        env_int("LAMBDA_FCS_JOBS")


def test_env_int_default(monkeypatch):
    monkeypatch.delenv("LAMBDA_FCS_JOBS", raising=False)
    assert env_int("LAMBDA_FCS_JOBS") is None
    assert env_int("LAMBDA_FCS_JOBS", 2) == 2
