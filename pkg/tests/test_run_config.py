import numpy as np
import pytest

from errors import ConfigError, InvalidParams
from run_config import (
    PRESETS,
    SweepAxis,
    apply_override,
    get_preset,
    load_run_config,
    parse_scalar,
    preset_summary,
)

DEFAULTS = {
    "system": {"gamma": 0.9, "omega_c": 0.56, "omega_p": 0.5},
    "sweep": {"delta_p": {"min": -3.0, "max": 3.0, "count": 301}},
}


def write_toml(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


class TestPresets:
    @pytest.mark.parametrize("alias, name", [("na", "Na23"), ("Na23", "Na23"), (" CS ", "Cs133"), ("cs133", "Cs133")])
    def test_aliases(self, alias, name):
        assert get_preset(alias).name == name

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            get_preset("rb87")

    def test_preset_fills_system_and_medium(self):
        config = load_run_config(defaults=DEFAULTS, preset="na")
        assert config.atom_preset == "Na23"
        assert config.system.omega_p == 0.2
        assert config.medium.calN == 1.78e8
        assert config.medium.omega_p_rabi == config.system.omega_p

    def test_summary_flattens(self):
        summary = preset_summary("cs")
        assert summary["name"] == "Cs133"
        assert summary["gamma13_si"] == PRESETS["cs"].medium["gamma13_si"]


class TestSweepAxis:
    def test_linear_and_log(self):
        assert np.allclose(SweepAxis("delta_p", -1.0, 1.0, 3).values(), [-1, 0, 1])
        assert np.allclose(SweepAxis("xi", 1.0, 100.0, 3, "log").values(), [1, 10, 100])

    @pytest.mark.parametrize(
        "kwargs, match",
        [
            ({"variable": "colour", "start": 0.0, "stop": 1.0, "count": 3}, "not a"),
            ({"variable": "equal_gaps", "start": 0.0, "stop": 1.0, "count": 3}, "cannot be swept"),
            ({"variable": "delta_p", "start": 0.0, "stop": 1.0, "count": 1}, "count"),
            ({"variable": "delta_p", "start": 0.0, "stop": 1.0, "count": 2.5}, "count"),
            ({"variable": "delta_p", "start": 0.0, "stop": 1.0, "count": 3, "scale": "cubic"}, "scale"),
            ({"variable": "omega_p", "start": 0.0, "stop": 1.0, "count": 3, "scale": "log"}, "positive"),
        ],
    )
    def test_invalid(self, kwargs, match):
        with pytest.raises(ConfigError, match=match):
            SweepAxis(**kwargs)

    def test_table_keys(self):
        with pytest.raises(ConfigError, match="missing key"):
            SweepAxis.from_table("delta_p", {"min": 0, "max": 1})
        with pytest.raises(ConfigError, match="unknown keys"):
            SweepAxis.from_table("delta_p", {"min": 0, "max": 1, "count": 3, "step": 0.1})


class TestGrid:
    def test_row_major_order(self):
        config = load_run_config(
            defaults={
                "sweep": {
                    "delta_p": {"min": 0.0, "max": 1.0, "count": 2},
                    "omega_p": {"min": 0.1, "max": 0.3, "count": 3},
                }
            }
        )
        grid = config.grid()
        assert len(grid) == 6
        assert grid[0] == {"delta_p": 0.0, "omega_p": pytest.approx(0.1)}
        assert grid[1]["delta_p"] == 0.0 and grid[1]["omega_p"] == pytest.approx(0.2)
        assert grid[3]["delta_p"] == 1.0

    def test_no_sweep_is_single_cell(self):
        assert load_run_config().grid() == [{}]

    def test_xi_axis_scales_control(self):
        config = load_run_config(defaults={"system": {"omega_p": 0.5}})
        system, medium = config.cell_params({"xi": 3.0})
        assert system.omega_c == pytest.approx(1.5)
        assert medium is None

    def test_medium_sweep_needs_medium(self):
        config = load_run_config()
        with pytest.raises(InvalidParams, match="medium"):
            config.cell_params({"n_density": 1e12})

    def test_medium_sweep(self):
        config = load_run_config(preset="cs")
        _, medium = config.cell_params({"n_density": 2e12})
        assert medium.n_density == 2e12
        assert medium.lambda_p == config.medium.lambda_p

    def test_invalid_cell(self):
        config = load_run_config()
        with pytest.raises(InvalidParams):
            config.cell_params({"gamma": -1.0})


class TestLayering:
    def test_precedence(self, tmp_path):
        path = write_toml(
            tmp_path,
            """
preset = "cs"
jobs = 3

[system]
omega_c = 0.7

[sweep.omega_p]
min = 0.1
max = 1.0
count = 10

[output]
format = "json"
""",
        )
        config = load_run_config(
            defaults=DEFAULTS, config_path=path, overrides=["omega_c=0.9", "sweep.omega_p.count=4"], jobs=5
        )
        assert config.atom_preset == "Cs133"
        assert config.system.gamma == 1.0
        assert config.system.omega_c == 0.9
        assert [axis.variable for axis in config.sweeps] == ["omega_p"]
        assert config.sweeps[0].count == 4
        assert config.output.format == "json"
        assert config.jobs == 5

    def test_flag_beats_preset(self, tmp_path):
        path = write_toml(tmp_path, 'preset = "cs"\n')
        config = load_run_config(config_path=path, preset="na")
        assert config.atom_preset == "Na23"

    def test_env_jobs_only_replaces_default(self, tmp_path):
        assert load_run_config(env_jobs=4).jobs == 4
        path = write_toml(tmp_path, "jobs = 2\n")
        assert load_run_config(config_path=path, env_jobs=4).jobs == 2
        assert load_run_config(env_jobs=4, jobs=1).jobs == 1

    def test_out_and_format_flags(self, tmp_path):
        config = load_run_config(out=tmp_path / "x.json", fmt="json")
        assert config.output.path == tmp_path / "x.json"
        assert config.output.format == "json"

    def test_to_dict(self):
        data = load_run_config(defaults=DEFAULTS, preset="na").to_dict()
        assert data["atom_preset"] == "Na23"
        assert data["sweep"][0]["variable"] == "delta_p"
        assert data["medium"]["lambda_p"] == 589e-7
        assert data["output"]["path"] is None


class TestOverrides:
    @pytest.mark.parametrize(
        "text, value",
        [("0.5", 0.5), ("3", 3), ("true", True), ('"log"', "log"), ("log", "log"), ("1e-3", 1e-3)],
    )
    def test_parse_scalar(self, text, value):
        assert parse_scalar(text) == value

    def test_nested_keys(self):
        layers = {"system": {}, "medium": {}, "sweep": {}, "oracle": {}, "output": {}}
        apply_override(layers, "system.delta_c=0.2")
        apply_override(layers, "oracle.n_max=32")
        apply_override(layers, "sweep.xi.scale=log")
        apply_override(layers, "n_density=1e12")
        apply_override(layers, "jobs=2")
        assert layers["system"] == {"delta_c": 0.2}
        assert layers["oracle"] == {"n_max": 32}
        assert layers["sweep"] == {"xi": {"scale": "log"}}
        assert layers["medium"] == {"n_density": 1e12}
        assert layers["jobs"] == 2

    @pytest.mark.parametrize(
        "assignment, match",
        [
            ("omega_c", "key=value"),
            ("=3", "empty key"),
            ("colour=red", "unknown key"),
            ("laser.power=3", "unknown section"),
            ("sweep.delta_p=3", "sweep keys"),
            ("system.a.b=1", "too deep"),
        ],
    )
    def test_bad_overrides(self, assignment, match):
        with pytest.raises(ConfigError, match=match):
            load_run_config(overrides=[assignment])

    def test_invalid_values_become_config_errors(self):
        with pytest.raises(ConfigError, match="system"):
            load_run_config(overrides=["gamma=-1"])
        with pytest.raises(ConfigError, match="jobs"):
            load_run_config(overrides=["jobs=0"])
        with pytest.raises(ConfigError, match="format"):
            load_run_config(fmt="xml")

    @pytest.mark.parametrize("assignment", ["calA=abc", "system.equal_gaps=yes"])
    def test_non_numeric_system_values(self, assignment):
        with pytest.raises(ConfigError, match=r"\[system\]"):
            load_run_config(overrides=[assignment])


class TestTomlErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(config_path=tmp_path / "missing.toml")

    def test_parse_error(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot parse"):
            load_run_config(config_path=write_toml(tmp_path, "[system\n"))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown keys or sections"):
            load_run_config(config_path=write_toml(tmp_path, "[laser]\npower = 3\n"))

    def test_unknown_field(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[system\]"):
            load_run_config(config_path=write_toml(tmp_path, "[system]\ncolour = 3\n"))

    def test_bad_medium(self, tmp_path):
        with pytest.raises(ConfigError, match=r"\[medium\]"):
            load_run_config(config_path=write_toml(tmp_path, "[medium]\nn_density = 1e12\n"))
