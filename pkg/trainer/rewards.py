import logging

logger = logging.getLogger(__name__)

# shared by the "not moving" reward case and the waiting-time metric
STOPPED_SPEED = 0.1
COLLISION_PENALTY = 10.0
COMPLETION_BONUS = 10.0


def is_stopped(speed: float) -> bool:
    return speed <= STOPPED_SPEED


def compute_reward(delta_s: float, moving: bool, collided: bool, completed: bool, k: float = 1.0) -> float:
    """Per-vehicle step reward.

    Cases by priority: collision -10k, completion +10k, standing still -k, otherwise the meters advanced.
    """
    if collided:
        return -COLLISION_PENALTY * k
    if completed:
        return COMPLETION_BONUS * k
    if not moving:
        return -k
    return delta_s
