import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from simulation.observation import FrameStack

logger = logging.getLogger(__name__)

Observation = Union[FrameStack, np.ndarray]


def observation_tensor(obs: Observation) -> np.ndarray:
    return obs.as_tensor() if isinstance(obs, FrameStack) else np.asarray(obs)


@dataclass(frozen=True)
class Transition:
    obs: Observation
    action: int
    reward: float
    next_obs: Observation
    terminal: bool


@dataclass(frozen=True)
class Batch:
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    terminals: np.ndarray

    def __len__(self):
        return len(self.actions)


class ReplayBuffer:
    """Ring buffer of transitions, oldest entries overwritten first.

    Observations are binary frames, stored bit-packed.
    """

    def __init__(self, capacity: int, actions: int = 2):
        if capacity <= 0:
            raise ValueError(f'Buffer capacity must be positive, got {capacity}')
        self.capacity = capacity
        self.actions = actions
        self.size = 0
        self.cursor = 0
        self.obs_shape: Optional[Tuple[int, ...]] = None
        self._obs = None
        self._next_obs = None
        self._actions = None
        self._rewards = None
        self._terminals = None

    def __len__(self):
        return self.size

    def _allocate(self, obs_shape: Tuple[int, ...]) -> None:
        self.obs_shape = obs_shape
        packed_length = (int(np.prod(obs_shape)) + 7) // 8
        self._obs = np.zeros((self.capacity, packed_length), dtype=np.uint8)
        self._next_obs = np.zeros((self.capacity, packed_length), dtype=np.uint8)
        self._actions = np.zeros(self.capacity, dtype=np.int64)
        self._rewards = np.zeros(self.capacity, dtype=np.float64)
        self._terminals = np.zeros(self.capacity, dtype=bool)
        logger.debug(f'replay storage for {self.capacity} transitions of {obs_shape} was allocated')

    def _pack(self, obs: Observation) -> np.ndarray:
        tensor = observation_tensor(obs)
        if tensor.shape != self.obs_shape:
            raise ValueError(f'Observation shape {tensor.shape} does not match buffer shape {self.obs_shape}')
        if np.any((tensor != 0) & (tensor != 1)):
            raise ValueError('Replay buffer stores binary frames only')
        return np.packbits(tensor.astype(bool).ravel())

    def _unpack(self, packed: np.ndarray) -> np.ndarray:
        count = int(np.prod(self.obs_shape))
        bits = np.unpackbits(packed, axis=-1, count=count)
        return bits.reshape((len(packed),) + self.obs_shape).astype(np.float32)

    def store(self, transition: Transition) -> None:
        if not 0 <= transition.action < self.actions:
            raise ValueError(f'Action {transition.action} is outside 0..{self.actions - 1}')
        if not np.isfinite(transition.reward):
            raise ValueError(f'Reward {transition.reward} is not finite')
        if self._obs is None:
            self._allocate(tuple(observation_tensor(transition.obs).shape))
        self._obs[self.cursor] = self._pack(transition.obs)
        self._next_obs[self.cursor] = self._pack(transition.next_obs)
        self._actions[self.cursor] = transition.action
        self._rewards[self.cursor] = transition.reward
        self._terminals[self.cursor] = transition.terminal
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.capacity, self.size + 1)

    def is_ready(self, batch_size: int) -> bool:
        return self.size >= batch_size

    def _gather(self, indices: np.ndarray) -> Batch:
        return Batch(
            self._unpack(self._obs[indices]),
            self._actions[indices].copy(),
            self._rewards[indices].copy(),
            self._unpack(self._next_obs[indices]),
            self._terminals[indices].copy(),
        )

    def sample(self, batch_size: int, rng: np.random.Generator) -> Optional[Batch]:
        """Uniform sample with replacement, or None while fewer than batch_size transitions are stored."""
        if not self.is_ready(batch_size):
            return None
        return self._gather(rng.integers(0, self.size, size=batch_size))

    def contents(self) -> List[Transition]:
        """Stored transitions, oldest first."""
        if self.size == 0:
            return []
        start = self.cursor if self.size == self.capacity else 0
        indices = (start + np.arange(self.size)) % self.capacity
        batch = self._gather(indices)
        return [
            Transition(batch.obs[i], int(batch.actions[i]), float(batch.rewards[i]),
                       batch.next_obs[i], bool(batch.terminals[i]))
            for i in range(len(batch))
        ]


def store_transition(buffer: ReplayBuffer, transition: Transition) -> None:
    buffer.store(transition)


def sample_batch(buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator) -> Optional[Batch]:
    return buffer.sample(batch_size, rng)
