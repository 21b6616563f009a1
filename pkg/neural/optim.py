import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from neural.network import NetworkParameters

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """RMSprop state: one squared-gradient accumulator per parameter, no momentum, no centering."""
    learning_rate: float = 1e-4
    smoothing: float = 0.99
    epsilon_stability: float = 1e-8
    accumulators: 'OrderedDict[str, np.ndarray]' = field(default_factory=OrderedDict)

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f'Learning rate must be positive, got {self.learning_rate}')


def make_optimizer_state(params: NetworkParameters, learning_rate: float = 1e-4, smoothing: float = 0.99,
                         epsilon_stability: float = 1e-8) -> OptimizerState:
    accumulators = OrderedDict((name, np.zeros_like(tensor)) for name, tensor in params.tensors.items())
    return OptimizerState(learning_rate, smoothing, epsilon_stability, accumulators)


def clip_gradients(grads: Mapping[str, np.ndarray], max_norm: Optional[float]) -> Mapping[str, np.ndarray]:
    """Scale gradients so their global L2 norm is at most max_norm; None or 0 disables clipping."""
    if not max_norm:
        return grads
    norm = float(np.sqrt(sum(float(np.sum(grad.astype(np.float64) ** 2)) for grad in grads.values())))
    if norm <= max_norm:
        return grads
    scale = max_norm / norm
    return OrderedDict((name, grad * grad.dtype.type(scale)) for name, grad in grads.items())


def rmsprop_step(params: NetworkParameters, grads: Mapping[str, np.ndarray],
                 state: OptimizerState) -> NetworkParameters:
    """acc <- rho*acc + (1-rho)*g^2; p <- p - lr*g/(sqrt(acc)+eps). Updates params and state in place."""
    for name, tensor in params.tensors.items():
        grad = grads[name]
        if grad.shape != tensor.shape:
            raise ValueError(f'Gradient {name} has shape {grad.shape}, parameter has {tensor.shape}')
        accumulator = state.accumulators.get(name)
        if accumulator is None:
            accumulator = state.accumulators[name] = np.zeros_like(tensor)
        accumulator *= state.smoothing
        accumulator += (1 - state.smoothing) * grad * grad
        tensor -= state.learning_rate * grad / (np.sqrt(accumulator) + state.epsilon_stability)
    return params
