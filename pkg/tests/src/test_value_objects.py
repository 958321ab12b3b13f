import numpy as np
import pytest

from src.entities.value_objects.controller_gains import ControllerGains
from src.entities.value_objects.tick_status import TickStatus


def test_default_gains():
    gains = ControllerGains.defaults()
    assert gains.k_eps == 0.5
    assert gains.eta == 1.0
    assert gains.beta == 1.0
    assert gains.lambda_arm == 0.01
    assert gains.lambda_base == 0.01
    assert gains.max_linear_speed == 1.0
    assert np.degrees(gains.rho_i) == pytest.approx(50.0)
    assert np.degrees(gains.rho_s) == pytest.approx(2.0)
    assert gains.slack_bound.shape == (6,)
    assert (gains.v_max, gains.w_max) == (1.0, 1.0)


def test_gains_scalar_slack_bound_is_broadcast():
    assert ControllerGains(slack_bound=3.0).slack_bound == pytest.approx(np.full(6, 3.0))
    with pytest.raises(ValueError):
        ControllerGains(slack_bound=[1.0, 2.0])


@pytest.mark.parametrize(
    "kwargs",
    [
        {"rho_s": 1.0, "rho_i": 0.5},
        {"rho_s": 0.5, "rho_i": 0.5},
        {"rho_s": -0.1},
        {"eta": 0.0},
        {"beta": -1.0},
        {"k_eps": -0.5},
        {"lambda_arm": 0.0},
        {"lambda_base": 0.0},
        {"max_linear_speed": 0.0},
        {"slack_bound": [1.0, 1.0, 1.0, 1.0, 1.0, 0.0]},
        {"base_vel_limits": (1.0, 0.0)},
    ],
)
def test_gains_validation(kwargs):
    with pytest.raises(ValueError):
        ControllerGains(**kwargs)


def test_gains_overrides():
    gains = ControllerGains.defaults()
    assert gains.with_overrides(k_eps=None) is gains
    changed = gains.with_overrides(k_eps=1.0, beta=None)
    assert changed.k_eps == 1.0 and changed.beta == gains.beta
    with pytest.raises(ValueError):
        gains.with_overrides(gamma=1.0)
    with pytest.raises(ValueError):
        gains.with_overrides(rho_s=gains.rho_i)


def test_gains_to_dict_in_degrees():
    data = ControllerGains.defaults().to_dict()
    assert data["rho_i_deg"] == pytest.approx(50.0)
    assert data["slack_bound"] == [10.0] * 6
    assert "rho_s=2.0deg" in repr(ControllerGains.defaults())


def test_tick_status_values():
    assert [s.value for s in TickStatus] == ["Running", "Success", "Failure"]
    assert str(TickStatus.SUCCESS) == "Success"
    assert TickStatus("Failure") is TickStatus.FAILURE
