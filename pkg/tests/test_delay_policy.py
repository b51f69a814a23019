from __future__ import annotations

import math

import pytest

from conftest import corridor, corridor_flows
from privflow.errors import Oversaturated
from privflow.timing.delay import PF_FLOOR, evaluate_delay, movement_delay, progression_factor
from privflow.timing.models import BandSolution, SignalPlan, TimingSettings
from privflow.timing.policy import OVERSATURATED_ESTIMATE, cap_estimated_flows, signal_policy
from privflow.timing.webster import critical_ratio, flow_ratios, webster_cycle

GEOM = corridor()
PLAN = SignalPlan(cycle_s=60.0, greens_s={"I1": {"main": 30.0, "cross": 18.0}})
OUT, IN, CROSS = GEOM.movements


def _band(b: float, b_bar: float = 0.0) -> BandSolution:
    return BandSolution(b=b, b_bar=b_bar, zeta=[0.0], zeta_bar=[0.0])


def test_uniform_delay_without_progression() -> None:
    assert movement_delay(OUT, PLAN, 0.25) == pytest.approx(10.0)


def test_progression_shortens_through_delay() -> None:
    assert movement_delay(OUT, PLAN, 0.25, _band(0.25)) == pytest.approx(5.0)
    assert movement_delay(CROSS, PLAN, 0.25, _band(0.25)) == movement_delay(CROSS, PLAN, 0.25)


def test_progression_factor_bounds() -> None:
    assert progression_factor(OUT, 0.5, _band(0.5)) == PF_FLOOR
    assert progression_factor(IN, 0.5, _band(0.5, 0.1)) == pytest.approx(0.8)
    assert progression_factor(OUT, 0.5, None) == 1.0


def test_saturation_is_capped() -> None:
    expected = 0.5 * 60.0 * 0.25 / (1.0 - 0.98 * 0.5)
    assert movement_delay(OUT, PLAN, 10.0) == pytest.approx(expected)


def test_delay_grows_with_flow() -> None:
    delays = [movement_delay(OUT, PLAN, q) for q in (0.0, 0.1, 0.2, 0.3, 0.4)]
    assert all(b > a for a, b in zip(delays, delays[1:]))


def test_network_delay_is_flow_weighted() -> None:
    q = {"I1_out": 0.3, "I1_in": 0.1, "I1_cross": 0.0}
    expected = (0.3 * movement_delay(OUT, PLAN, 0.3) + 0.1 * movement_delay(IN, PLAN, 0.1)) / 0.4
    assert evaluate_delay(PLAN, q, GEOM) == pytest.approx(expected)


def test_network_delay_without_traffic_averages_movements() -> None:
    expected = math.fsum(movement_delay(m, PLAN, 0.0) for m in GEOM.movements) / 3
    assert evaluate_delay(PLAN, {}, GEOM) == pytest.approx(expected)


def test_policy_on_a_two_intersection_corridor() -> None:
    geom = corridor(2)
    outcome = signal_policy(corridor_flows(geom, 0.35, 0.15), geom)
    plan = outcome.plan
    assert plan.cycle_s == pytest.approx((1.5 * 12.0 + 5.0) / 0.5)
    assert len(plan.offsets_s) == 2 and plan.offsets_s[0] == 0.0
    for name in ("I1", "I2"):
        assert sum(plan.greens_s[name].values()) == pytest.approx(plan.cycle_s - 12.0)
    assert outcome.band.feasible
    assert outcome.flags == []


def test_policy_better_informed_plan_has_less_delay() -> None:
    geom = corridor(2)
    truth = corridor_flows(geom, 0.4, 0.1)
    informed = signal_policy(truth, geom)
    stale = signal_policy(corridor_flows(geom, 0.1, 0.4), geom)
    assert evaluate_delay(informed.plan, truth, geom, informed.band) < evaluate_delay(stale.plan, truth, geom, stale.band)


def test_oversaturated_estimate_is_scaled_not_fatal() -> None:
    geom = corridor(2)
    q = corridor_flows(geom, 0.7, 0.4)
    capped, changed = cap_estimated_flows(q, geom, 0.95)
    assert changed
    for name in ("I1", "I2"):
        assert critical_ratio(flow_ratios(capped, geom)[name]) == pytest.approx(0.95)
    outcome = signal_policy(q, geom, TimingSettings(y_cap=0.95))
    assert OVERSATURATED_ESTIMATE in outcome.flags
    assert outcome.plan.cycle_s == pytest.approx(180.0)


def test_webster_alone_rejects_saturated_flows() -> None:
    geom = corridor()
    with pytest.raises(Oversaturated):
        webster_cycle(corridor_flows(geom, 0.7, 0.4), geom)
