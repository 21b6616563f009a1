import logging
import os
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from agents.replay_buffer import Batch, Observation, ReplayBuffer, observation_tensor
from neural.checkpoint import load_checkpoint, save_checkpoint
from neural.network import (NetworkArchitecture, NetworkParameters, backprop_cached, cache_head, forward,
                            forward_with_cache, init_parameters)
from neural.optim import OptimizerState, clip_gradients, make_optimizer_state, rmsprop_step
from simulation.geometry import Intention

logger = logging.getLogger(__name__)


@dataclass
class D3QNAgent:
    """Policy shared by every vehicle with one turning intention."""
    intention: Intention
    online: NetworkParameters
    target: NetworkParameters
    buffer: ReplayBuffer
    optimizer: OptimizerState
    updates: int = 0

    @property
    def actions(self) -> int:
        return self.online.architecture.actions


@dataclass
class AgentSet:
    agents: List[D3QNAgent]
    epsilon: float = 1.0
    epsilon_decay: float = 1e-6
    gamma: float = 0.99

    def for_intention(self, intention: Intention) -> D3QNAgent:
        return self.agents[assign_agent(intention)]


def assign_agent(intention: Intention) -> int:
    """Left -> 0, Straight -> 1, Right -> 2."""
    return int(Intention(intention))


def build_agent_set(architecture: NetworkArchitecture, rng: np.random.Generator, buffer_capacity: int,
                    learning_rate: float = 1e-4, gamma: float = 0.99, epsilon: float = 1.0,
                    epsilon_decay: float = 1e-6, smoothing: float = 0.99,
                    epsilon_stability: float = 1e-8) -> AgentSet:
    agents = []
    for intention in Intention:
        online = init_parameters(architecture, rng)
        agents.append(D3QNAgent(
            intention=intention,
            online=online,
            target=online.copy(),
            buffer=ReplayBuffer(buffer_capacity, architecture.actions),
            optimizer=make_optimizer_state(online, learning_rate, smoothing, epsilon_stability),
        ))
    logger.debug(f'three agents with {agents[0].online.parameter_count} parameters each were initialized')
    return AgentSet(agents, epsilon, epsilon_decay, gamma)


def greedy_action(q_values: np.ndarray) -> int:
    """Argmax with ties going to the lowest index."""
    return int(np.argmax(q_values))


def select_action(agent: D3QNAgent, obs: Observation, epsilon: float, rng: np.random.Generator) -> int:
    if epsilon > 0 and rng.random() < epsilon:
        return int(rng.integers(agent.actions))
    q_values, _, _ = forward(agent.online, observation_tensor(obs))
    return greedy_action(q_values)


def double_dqn_targets(rewards: np.ndarray, terminals: np.ndarray, next_q_online: np.ndarray,
                       next_q_target: np.ndarray, gamma: float) -> np.ndarray:
    """y = r + gamma * Q_target(s', argmax_a Q_online(s', a)); y = r on terminal transitions."""
    rows = np.arange(len(rewards))
    best_actions = np.argmax(next_q_online, axis=1)
    bootstrap = next_q_target[rows, best_actions].astype(np.float64)
    rewards = np.asarray(rewards, dtype=np.float64)
    return np.where(terminals, rewards, rewards + gamma * bootstrap)


def compute_targets(agent: D3QNAgent, batch: Batch, gamma: float,
                    next_q_online: Optional[np.ndarray] = None) -> np.ndarray:
    if next_q_online is None:
        next_q_online, _, _ = forward(agent.online, batch.next_obs)
    next_q_target, _, _ = forward(agent.target, batch.next_obs)
    return double_dqn_targets(batch.rewards, batch.terminals, next_q_online, next_q_target, gamma)


def update_agent(agent: D3QNAgent, batch_size: int, rng: np.random.Generator, gamma: float,
                 grad_clip_norm: Optional[float] = None) -> Optional[float]:
    """One RMSprop step on a sampled batch; None when the buffer is not ready yet.

    The online network sees obs and next_obs in one pass; only the obs half is backpropagated.
    """
    batch = agent.buffer.sample(batch_size, rng)
    if batch is None:
        return None
    size = len(batch.actions)
    q_values, _, _, cache = forward_with_cache(agent.online, np.concatenate((batch.obs, batch.next_obs)))
    targets = compute_targets(agent, batch, gamma, next_q_online=q_values[size:])
    loss, grads = backprop_cached(agent.online, q_values[:size], cache_head(cache, size), batch.actions, targets)
    rmsprop_step(agent.online, clip_gradients(grads, grad_clip_norm), agent.optimizer)
    agent.updates += 1
    return loss


def sync_target(agent: D3QNAgent) -> None:
    agent.target = agent.online.copy()


def anneal_epsilon(epsilon: float, decay: float) -> float:
    """One step of the linear exploration schedule."""
    return max(0.0, epsilon - decay)


def agent_checkpoint_path(directory, intention: Intention) -> str:
    return os.path.join(directory, f'{Intention(intention).name.lower()}.ckpt')


def save_agent_set(agent_set: AgentSet, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    for agent in agent_set.agents:
        save_checkpoint(agent.online, agent_checkpoint_path(directory, agent.intention))
    logger.debug(f'agent checkpoints were saved to {directory}')


def load_agent_set(directory, architecture: Optional[NetworkArchitecture] = None,
                   buffer_capacity: int = 1) -> AgentSet:
    """Greedy-ready agent set (target = online, tiny buffers) from a checkpoint directory."""
    agents = []
    for intention in Intention:
        online = load_checkpoint(agent_checkpoint_path(directory, intention), architecture)
        agents.append(D3QNAgent(intention, online, online.copy(),
                                ReplayBuffer(buffer_capacity, online.architecture.actions),
                                make_optimizer_state(online)))
    return AgentSet(agents, epsilon=0.0)
