import copy

import pytest

from src.config_validator import ConfigValidator, validate_config
from src.data_constants import DEFAULTS


def make_config(**overrides):
    config = {
        "command": "analyze",
        "input": "curve.json",
        "numerics": {
            "t_range": [-1.0, 1.0],
            "tol": DEFAULTS["tol"],
            "degree": DEFAULTS["degree"],
            "max_degree": DEFAULTS["max_degree"],
            "div_eps": DEFAULTS["div_eps"],
            "zero_rel_tol": DEFAULTS["zero_rel_tol"],
            "root_rel_tol": DEFAULTS["root_rel_tol"],
        },
        "scan": {
            "samples": 512,
            "grid": DEFAULTS["grid"],
            "workers": 2,
            "merge_fraction": DEFAULTS["merge_fraction"],
            "degenerate_fraction": DEFAULTS["degenerate_fraction"],
            "feature": None,
            "stratum": None,
        },
        "output": {"dir": "out", "format": "csv", "style": "detailed"},
        "debug": False,
    }
    for path, value in overrides.items():
        section, _, key = path.partition("__")
        if key:
            config[section][key] = value
        else:
            config[section] = value
    return config


def test_defaults_are_valid():
    is_valid, errors, warnings = validate_config(make_config())
    assert is_valid
    assert errors == []
    assert warnings == []


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"command": "plot"}, "command"),
        ({"input": ""}, "input"),
        ({"numerics__tol": -1.0}, "numerics.tol"),
        ({"numerics__div_eps": "small"}, "numerics.div_eps"),
        ({"numerics__degree": 0}, "numerics.degree"),
        ({"numerics__degree": 30}, "max_degree"),
        ({"numerics__degree": 4.5}, "numerics.degree"),
        ({"numerics__t_range": [1.0, -1.0]}, "lo < hi"),
        ({"numerics__t_range": [0.0]}, "numerics.t_range"),
        ({"scan__samples": 8}, "scan.samples"),
        ({"scan__grid": 4}, "scan.grid"),
        ({"scan__workers": 0}, "scan.workers"),
        ({"scan__merge_fraction": 1.5}, "scan.merge_fraction"),
        ({"scan__feature": "inflection"}, "scan.feature"),
        ({"scan__stratum": "Q"}, "scan.stratum"),
        ({"output__format": "png"}, "output.format"),
        ({"output__style": "fancy"}, "output.style"),
        ({"output__dir": "  "}, "output.dir"),
        ({"debug": "yes"}, "debug"),
    ],
)
def test_invalid_values_are_errors(overrides, fragment):
    is_valid, errors, _ = validate_config(make_config(**overrides))
    assert not is_valid
    assert any(fragment in e for e in errors)


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"scan__grid": 2048}, "scan.grid"),
        ({"scan__samples": 2_000_000}, "scan.samples"),
        ({"numerics__degree": 4}, "numerics.degree"),
        ({"output__format": None}, "output.format"),
        ({"debug": None}, "debug"),
    ],
)
def test_questionable_values_are_warnings(overrides, fragment):
    is_valid, errors, warnings = validate_config(make_config(**overrides))
    assert is_valid, errors
    assert any(fragment in w for w in warnings)


def test_validator_state_resets_between_runs():
    validator = ConfigValidator()
    assert not validator.validate(make_config(command="plot"))[0]
    is_valid, errors, _ = validator.validate(make_config())
    assert is_valid
    assert errors == []


def test_returned_lists_are_copies():
    validator = ConfigValidator()
    _, errors, _ = validator.validate(make_config(command="plot"))
    errors.clear()
    assert validator.errors


def test_missing_sections_use_empty_dicts():
    config = copy.deepcopy(make_config())
    for section in ("numerics", "scan", "output"):
        del config[section]
    is_valid, _, warnings = validate_config(config)
    assert is_valid
    assert any("output.format" in w for w in warnings)
