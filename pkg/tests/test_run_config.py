import json

import pytest

from errors import ConfigError
from settings import RunConfig, flatten_config, load_config_file


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults():
    config = RunConfig.resolve()
    assert config.reachability.dt == 0.1
    assert config.reachability.horizon == config.criticality.ttc_max == 6.0
    assert config.loss.gamma == 2.0
    assert config.provenance["reachability.horizon"] == "default (ttc_max)"
    assert config.provenance["loss.alpha"] == "default"


def test_flag_beats_file_beats_default(tmp_path):
    path = write(tmp_path, "run.yaml", "reachability:\n  dt: 0.05\n  a_max: 1.5\ngamma: 1.0\n")
    config = RunConfig.resolve(path, {"a_max": 0.5, "dt": None})
    assert config.reachability.dt == 0.05
    assert config.reachability.a_max == 0.5
    assert config.loss.gamma == 1.0
    assert config.criticality.d_max == 40.0
    assert config.provenance["reachability.dt"] == f"file:{path}"
    assert config.provenance["reachability.a_max"] == "flag"
    assert config.provenance["criticality.d_max"] == "default"


def test_horizon_follows_ttc_max(tmp_path):
    path = write(tmp_path, "run.json", json.dumps({"ttc_max": 4.0}))
    assert RunConfig.resolve(path).reachability.horizon == 4.0
    assert RunConfig.resolve(path, {"horizon": 3.0}).reachability.horizon == 3.0


def test_edges_from_yaml(tmp_path):
    path = write(tmp_path, "run.yml", "evaluation:\n  ttc_edges: [0, 1, 2]\n")
    assert RunConfig.resolve(path).evaluation.ttc_edges == (0.0, 1.0, 2.0)


@pytest.mark.parametrize(
    "overrides",
    [
        {"gamma": -1.0},
        {"gamma": 1.0, "kappa": 1.5},
        {"dt": 0.5, "horizon": 0.2},
        {"d_crit": 60.0},
        {"ttc_edges": (1.0, 0.0)},
        {"mode": "both"},
    ],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig.resolve(overrides=overrides)


def test_unknown_keys():
    with pytest.raises(ConfigError, match="unknown"):
        flatten_config({"speed": 3})
    with pytest.raises(ConfigError, match="loss.beta"):
        flatten_config({"loss": {"beta": 3}})


def test_flat_and_sectioned_keys_agree():
    assert flatten_config({"dt": 0.2}) == flatten_config({"reachability": {"dt": 0.2}})


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.yaml")
    with pytest.raises(ConfigError):
        load_config_file(write(tmp_path, "list.yaml", "- 1\n- 2\n"))
    with pytest.raises(ConfigError):
        load_config_file(write(tmp_path, "broken.json", "{"))
    assert load_config_file(write(tmp_path, "empty.yaml", "")) == {}


def test_config_file_with_invalid_utf8(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_bytes(b"dt: \xff\n")
    with pytest.raises(ConfigError, match="UTF-8"):
        load_config_file(path)


def test_snapshot_and_explain(tmp_path):
    config = RunConfig.resolve(overrides={"alpha": 0.5})
    snapshot = config.to_dict()
    json.dumps(snapshot)
    assert set(snapshot) == {"reachability", "criticality", "loss", "evaluation"}
    assert snapshot["criticality"]["mode"] == "composed"

    lines = config.explain()
    assert "loss.alpha = 0.5  (flag)" in lines
    assert len(lines) == 20
