"""Two-group traffic lights: N/S and E/W alternate, N/S green first, yellow between green and red."""
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

from simulation.geometry import Approach, route_path
from simulation.world import WorldState

logger = logging.getLogger(__name__)

GAP_THRESHOLD = 3.0
DETECTOR_DISTANCE = 30.0
# float slack when comparing accumulated phase time against a duration
TIME_TOLERANCE = 1e-9


class Phase(enum.Enum):
    GREEN = 'Green'
    YELLOW = 'Yellow'
    RED = 'Red'


class PhaseGroup(enum.IntEnum):
    NS = 0
    EW = 1

    @property
    def approaches(self) -> Tuple[Approach, Approach]:
        return (Approach.N, Approach.S) if self is PhaseGroup.NS else (Approach.E, Approach.W)

    def other(self) -> 'PhaseGroup':
        return PhaseGroup.EW if self is PhaseGroup.NS else PhaseGroup.NS


def group_of(approach: Approach) -> PhaseGroup:
    return PhaseGroup.NS if Approach(approach) in (Approach.N, Approach.S) else PhaseGroup.EW


@dataclass(frozen=True)
class SignalPlan:
    name: str
    green: float
    yellow: float
    min_duration: Optional[float] = None
    max_duration: Optional[float] = None

    @property
    def actuated(self) -> bool:
        return self.min_duration is not None

    @property
    def period(self) -> float:
        """Cycle length of the fixed-time schedule."""
        return 2 * (self.green + self.yellow)


PLANS: Dict[str, SignalPlan] = {
    'fttl1': SignalPlan('fttl1', green=25.0, yellow=5.0),
    'fttl2': SignalPlan('fttl2', green=32.0, yellow=8.0),
    'fttlopt': SignalPlan('fttlopt', green=15.0, yellow=2.0),
    'atl1': SignalPlan('atl1', green=25.0, yellow=5.0, min_duration=10.0, max_duration=40.0),
    'atl2': SignalPlan('atl2', green=32.0, yellow=8.0, min_duration=15.0, max_duration=50.0),
}


@dataclass(frozen=True)
class SignalState:
    """Phase of the active group; the other group is red.

    gaps holds the seconds since the last detector actuation per approach (N, E, S, W).
    """
    active_group: PhaseGroup = PhaseGroup.NS
    phase: Phase = Phase.GREEN
    phase_elapsed: float = 0.0
    gaps: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def phase_for(self, approach: Approach) -> Phase:
        return self.phase if group_of(approach) is self.active_group else Phase.RED


def fttl_state_at(plan: SignalPlan, t: float) -> SignalState:
    if t < 0:
        raise ValueError(f'Signal time must not be negative, got {t}')
    position = round(math.fmod(t, plan.period), 9)
    if position >= plan.period:
        position = 0.0
    half = plan.green + plan.yellow
    group = PhaseGroup.NS if position < half else PhaseGroup.EW
    within = position if group is PhaseGroup.NS else position - half
    if within < plan.green:
        return SignalState(group, Phase.GREEN, within)
    return SignalState(group, Phase.YELLOW, within - plan.green)


def _detections_tuple(detections: Union[Mapping[Approach, bool], Sequence[bool]]) -> Tuple[bool, ...]:
    if isinstance(detections, Mapping):
        return tuple(bool(detections.get(approach, False)) for approach in Approach)
    return tuple(bool(value) for value in detections)


def atl_step(state: SignalState, plan: SignalPlan, detections, dt: float,
             gap_threshold: float = GAP_THRESHOLD) -> SignalState:
    """Advance the actuated controller by dt.

    Green lasts at least min_duration; after that it gaps out once every active approach has gone
    gap_threshold seconds without a detection, and it never exceeds max_duration.
    """
    if not plan.actuated:
        raise ValueError(f'Plan {plan.name} is not actuated')
    detected = _detections_tuple(detections)
    gaps = tuple(0.0 if hit else gap + dt for hit, gap in zip(detected, state.gaps))
    elapsed = state.phase_elapsed + dt

    if state.phase is Phase.GREEN:
        active_gap = min(gaps[approach] for approach in state.active_group.approaches)
        maxed_out = elapsed >= plan.max_duration - TIME_TOLERANCE
        gapped_out = elapsed >= plan.min_duration - TIME_TOLERANCE and active_gap >= gap_threshold - TIME_TOLERANCE
        if maxed_out or gapped_out:
            logger.debug(f'{state.active_group.name} green ended after {elapsed:.1f}s '
                         f'({"max" if maxed_out else "gap"})')
            return SignalState(state.active_group, Phase.YELLOW, 0.0, gaps)
        return replace(state, phase_elapsed=elapsed, gaps=gaps)

    if elapsed >= plan.yellow - TIME_TOLERANCE:
        group = state.active_group.other()
        reset = tuple(0.0 if approach in group.approaches else gap for approach, gap in zip(Approach, gaps))
        return SignalState(group, Phase.GREEN, 0.0, reset)
    return replace(state, phase_elapsed=elapsed, gaps=gaps)


def detector_actuations(world: WorldState, distance: float = DETECTOR_DISTANCE) -> Tuple[bool, bool, bool, bool]:
    """Per approach: is any vehicle body over the loop `distance` meters upstream of the stop line."""
    hits = [False] * len(Approach)
    for vehicle in world.active_vehicles():
        detector_s = route_path(vehicle.approach, vehicle.intention, world.geometry).stop_s - distance
        if abs(vehicle.s - detector_s) <= vehicle.length / 2:
            hits[vehicle.approach] = True
    return tuple(hits)


class FixedTimeController:
    def __init__(self, plan: SignalPlan):
        self.plan = plan

    def update(self, world: WorldState) -> SignalState:
        return fttl_state_at(self.plan, world.time)


class ActuatedController:
    def __init__(self, plan: SignalPlan, detector_distance: float = DETECTOR_DISTANCE,
                 gap_threshold: float = GAP_THRESHOLD):
        self.plan = plan
        self.detector_distance = detector_distance
        self.gap_threshold = gap_threshold
        self.state: Optional[SignalState] = None

    def update(self, world: WorldState) -> SignalState:
        """Signal state for the step starting at `world`; called once per step."""
        if self.state is None:
            self.state = SignalState()
        else:
            detections = detector_actuations(world, self.detector_distance)
            self.state = atl_step(self.state, self.plan, detections, world.dt, self.gap_threshold)
        return self.state


def make_controller(plan: Union[str, SignalPlan]):
    if isinstance(plan, str):
        plan = PLANS[plan]
    return ActuatedController(plan) if plan.actuated else FixedTimeController(plan)
