from dataclasses import replace

import numpy as np
import pytest

from baselines.signals import (PLANS, ActuatedController, FixedTimeController, Phase, PhaseGroup, SignalState,
                               atl_step, detector_actuations, fttl_state_at, make_controller)
from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec
from simulation.world import spawn_scenario

DT = 0.1
NS_ONLY = (True, False, True, False)
NONE = (False, False, False, False)


def green_durations(plan, detections_at, seconds):
    """Lengths of the completed greens of an actuated plan driven for `seconds`."""
    state = SignalState()
    durations = []
    for step in range(1, int(round(seconds / DT)) + 1):
        previous = state
        state = atl_step(state, plan, detections_at(step * DT), DT)
        if previous.phase is Phase.GREEN and state.phase is Phase.YELLOW:
            durations.append(previous.phase_elapsed + DT)
    return durations


@pytest.mark.parametrize('t, group, phase', [
    (0.0, PhaseGroup.NS, Phase.GREEN),
    (24.9, PhaseGroup.NS, Phase.GREEN),
    (25.0, PhaseGroup.NS, Phase.YELLOW),
    (29.9, PhaseGroup.NS, Phase.YELLOW),
    (30.0, PhaseGroup.EW, Phase.GREEN),
    (54.9, PhaseGroup.EW, Phase.GREEN),
    (55.0, PhaseGroup.EW, Phase.YELLOW),
    (60.0, PhaseGroup.NS, Phase.GREEN),
])
def test_fttl1_schedule(t, group, phase):
    state = fttl_state_at(PLANS['fttl1'], t)
    assert (state.active_group, state.phase) == (group, phase)


@pytest.mark.parametrize('name', ['fttl1', 'fttl2', 'fttlopt'])
def test_fixed_time_schedule_is_periodic(name):
    plan = PLANS[name]
    for step in range(0, 1200, 7):
        t = step * DT
        first, second = fttl_state_at(plan, t), fttl_state_at(plan, t + 3 * plan.period)
        assert (first.active_group, first.phase) == (second.active_group, second.phase)
        assert first.phase_elapsed == pytest.approx(second.phase_elapsed, abs=1e-6)


def test_negative_time_is_rejected():
    with pytest.raises(ValueError):
        fttl_state_at(PLANS['fttl1'], -1.0)


def test_plans():
    assert PLANS['fttl1'].period == 60.0
    assert PLANS['fttl2'].period == 80.0
    assert PLANS['fttlopt'].period == 34.0
    assert (PLANS['atl1'].min_duration, PLANS['atl1'].max_duration) == (10.0, 40.0)
    assert (PLANS['atl2'].min_duration, PLANS['atl2'].max_duration) == (15.0, 50.0)
    assert isinstance(make_controller('fttl2'), FixedTimeController)
    assert isinstance(make_controller('atl2'), ActuatedController)


def test_actuated_green_maxes_out_under_continuous_demand():
    durations = green_durations(PLANS['atl1'], lambda t: (True,) * 4, 100.0)
    assert durations[0] == pytest.approx(40.0)


def test_actuated_green_gaps_out_after_demand_stops():
    durations = green_durations(PLANS['atl1'], lambda t: NS_ONLY if t <= 10.0 + 1e-9 else NONE, 20.0)
    assert durations[0] == pytest.approx(13.0)


def test_actuated_green_holds_minimum_without_demand():
    durations = green_durations(PLANS['atl1'], lambda t: NONE, 60.0)
    assert durations[:3] == pytest.approx([10.0, 10.0, 10.0])


def test_yellow_then_other_group():
    plan = PLANS['atl1']
    state = SignalState(PhaseGroup.NS, Phase.YELLOW, 0.0)
    for _ in range(49):
        state = atl_step(state, plan, NONE, DT)
        assert state.phase is Phase.YELLOW
    state = atl_step(state, plan, NONE, DT)
    assert (state.active_group, state.phase, state.phase_elapsed) == (PhaseGroup.EW, Phase.GREEN, 0.0)


@pytest.mark.parametrize('name', ['atl1', 'atl2'])
def test_actuated_durations_stay_in_bounds(name):
    plan = PLANS[name]
    rng = np.random.default_rng(5)
    demand = rng.random(36000) < 0.15
    approaches = rng.integers(4, size=36000)

    def detections(t):
        index = int(round(t / DT)) - 1
        hits = [False] * 4
        if demand[index]:
            hits[approaches[index]] = True
        return hits

    durations = green_durations(plan, detections, 3600.0)
    assert durations
    for duration in durations:
        assert plan.min_duration - 1e-6 <= duration <= plan.max_duration + 1e-6


def test_atl_step_needs_an_actuated_plan():
    with pytest.raises(ValueError):
        atl_step(SignalState(), PLANS['fttl1'], NONE, DT)


def test_exactly_one_group_is_not_red():
    for t in np.arange(0.0, 120.0, 0.5):
        state = fttl_state_at(PLANS['fttl2'], float(t))
        open_approaches = {approach for approach in Approach if state.phase_for(approach) is not Phase.RED}
        assert open_approaches == set(state.active_group.approaches)


def test_detector_sees_vehicle_over_the_loop():
    world = spawn_scenario(ScenarioSpec(((Approach.E, Intention.LEFT, 0.0),)))
    vehicle = world.vehicles[0]
    assert detector_actuations(world) == (False, False, False, False)
    over = replace(world, vehicles=(replace(vehicle, s=71.0),))
    assert detector_actuations(over) == (False, True, False, False)
    past = replace(world, vehicles=(replace(vehicle, s=75.0),))
    assert detector_actuations(past) == (False, False, False, False)


def test_actuated_controller_starts_ns_green():
    controller = ActuatedController(PLANS['atl1'])
    world = spawn_scenario(ScenarioSpec())
    state = controller.update(world)
    assert (state.active_group, state.phase) == (PhaseGroup.NS, Phase.GREEN)
    state = controller.update(replace(world, time_step_index=1))
    assert state.phase_elapsed == pytest.approx(DT)
