from pathlib import Path

import pytest

from treasury_kelly.errors import ConfigError
from treasury_kelly.flywheel import load_config, loads_config

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

GOOD = """\
name: t
horizon: 2
company:
  shares_outstanding: 4
  tokens_held: 1
  token_price: 1
  share_price: 1
investors:
  - {shares_held: 1, cash: 1}
credit:
  haircut: 0.5
  exposure_limit: 10
issuance:
  mode: shares
  per_step: 1
"""


def problems(text):
    with pytest.raises(ConfigError) as info:
        loads_config(text)
    return info.value.problems


def test_minimal_config():
    cfg = loads_config(GOOD)
    assert cfg.horizon == 2
    assert cfg.issuance == (1.0, 1.0)
    assert cfg.haircuts == (0.5,)
    assert cfg.mnav_model == "constant"


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")))
def test_shipped_scenarios_load(path):
    assert load_config(path).horizon > 0


def test_unknown_key_reports_its_line():
    text = GOOD.replace("  token_price: 1\n", "  token_price: 1\n  colour: red\n")
    (msg,) = problems(text)
    assert "company.colour" in msg and "line 7" in msg


def test_bad_value_reports_its_line():
    (msg,) = problems(GOOD.replace("haircut: 0.5", "haircut: 1.5"))
    assert "credit.haircut" in msg and "line 11" in msg


def test_all_problems_reported_together():
    text = GOOD.replace("haircut: 0.5", "haircut: -1").replace("mode: shares", "mode: barter")
    assert len(problems(text)) == 2


def test_missing_section():
    text = GOOD.split("credit:")[0] + "issuance:\n  per_step: 1\n"
    assert any("credit" in p and "missing" in p for p in problems(text))


def test_amounts_must_match_horizon():
    text = GOOD.replace("per_step: 1", "amounts: [1, 2, 3]")
    assert any("expected 2 entries" in p for p in problems(text))


def test_per_step_and_amounts_are_exclusive():
    text = GOOD.replace("per_step: 1", "per_step: 1\n  amounts: [1, 1]")
    assert any("exactly one" in p for p in problems(text))


def test_path_model_needs_a_path():
    text = GOOD + "mnav_model:\n  kind: path\n"
    assert any("mnav_model.path" in p for p in problems(text))


def test_shock_outside_horizon():
    text = GOOD + "shocks:\n  - {step: 5, kind: haircut_raise, magnitude: 0.1}\n"
    assert any("shocks.0.step" in p for p in problems(text))


def test_bad_shock_magnitude():
    text = GOOD + "shocks:\n  - {step: 1, kind: token_price_drop, magnitude: 1.5}\n"
    assert any("magnitude" in p for p in problems(text))


def test_opening_debt_over_limit():
    text = GOOD.replace("{shares_held: 1, cash: 1}", "{shares_held: 1, debt: 50}")
    assert any("exceeds the limit" in p for p in problems(text))


def test_zero_nav_rejected():
    assert any("nav" in p for p in problems(GOOD.replace("tokens_held: 1", "tokens_held: 0")))


def test_invalid_yaml():
    (msg,) = problems("horizon: [1, 2\n")
    assert "not valid YAML" in msg and "line" in msg


def test_not_a_mapping():
    assert problems("- 1\n- 2\n")


def test_bool_is_not_a_number():
    assert any("finite number" in p for p in problems(GOOD.replace("haircut: 0.5", "haircut: true")))


def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config(tmp_path / "missing.yaml")
    assert "cannot read" in str(info.value)


def test_config_error_is_a_value_error():
    assert issubclass(ConfigError, ValueError)
