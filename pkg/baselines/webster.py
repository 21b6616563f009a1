import logging
from typing import List, Sequence

from baselines.signals import SignalPlan

logger = logging.getLogger(__name__)

SATURATION_FLOW = 1800.0


class InfeasibleDemandError(ValueError):
    pass


def webster_cycle(flow_ratios: Sequence[float], lost_time: float) -> float:
    """
    Optimal cycle length C0 = (1.5 * L + 5) / (1 - Y).
    :param flow_ratios: critical flow ratio of every phase
    :param lost_time: total lost time per cycle, seconds
    :return: cycle length, seconds
    """
    total_ratio = sum(flow_ratios)
    if any(ratio < 0 for ratio in flow_ratios):
        raise InfeasibleDemandError(f'Flow ratios must not be negative: {list(flow_ratios)}')
    if total_ratio >= 1:
        raise InfeasibleDemandError(f'Total flow ratio {total_ratio} leaves no capacity')
    return (1.5 * lost_time + 5) / (1 - total_ratio)


def webster_green_splits(cycle_length: float, flow_ratios: Sequence[float], lost_time: float) -> List[float]:
    """Effective green of every phase, proportional to its flow ratio."""
    total_ratio = sum(flow_ratios)
    effective_green = cycle_length - lost_time
    if total_ratio <= 0:
        return [effective_green / len(flow_ratios)] * len(flow_ratios)
    return [ratio / total_ratio * effective_green for ratio in flow_ratios]


def webster_plan(total_flow: float, yellow: float, lost_time_per_phase: float = 2.0,
                 saturation_flow: float = SATURATION_FLOW, name: str = 'webster') -> SignalPlan:
    """
    Fixed-time plan for a symmetric two-group intersection.
    :param total_flow: vehicles per hour over all four approaches
    :param yellow: yellow duration of each group, seconds
    :param lost_time_per_phase: start-up plus clearance loss of one phase, seconds
    :param saturation_flow: vehicles per hour of green per lane
    :return: plan whose green is the longer of the two splits
    """
    # each group serves two single-lane approaches; the critical lane carries a quarter of the flow
    ratio = total_flow / 4 / saturation_flow
    lost_time = 2 * lost_time_per_phase
    cycle = webster_cycle([ratio, ratio], lost_time)
    greens = webster_green_splits(cycle, [ratio, ratio], lost_time)
    green = max(max(greens) + lost_time_per_phase - yellow, 1.0)
    logger.debug(f'webster cycle {cycle:.2f}s for {total_flow} veh/h, green {green:.2f}s')
    return SignalPlan(name, green=green, yellow=yellow)
