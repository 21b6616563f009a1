"""Dueling Q-network: three ReLU convolutions, a ReLU dense layer, then value and advantage heads."""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from neural.layers import (ShapeMismatchError, conv2d_backward, conv2d_forward, conv_output_size,
                           dense_backward, dense_forward, relu)

logger = logging.getLogger(__name__)

CONV_PATTERN = ((32, 8), (64, 4), (64, 3))
STRIDE_PATTERNS = ((4, 2, 1), (2, 2, 1), (2, 1, 1), (1, 1, 1))


class NonFiniteTargetError(ValueError):
    pass


@dataclass(frozen=True)
class ConvSpec:
    filters: int
    kernel: int
    stride: int


@dataclass(frozen=True)
class NetworkArchitecture:
    in_channels: int
    height: int
    width: int
    conv_layers: Tuple[ConvSpec, ...]
    hidden_units: int = 512
    actions: int = 2

    def conv_output_shapes(self) -> List[Tuple[int, int, int]]:
        shapes = []
        height, width = self.height, self.width
        for layer in self.conv_layers:
            height = conv_output_size(height, layer.kernel, layer.stride)
            width = conv_output_size(width, layer.kernel, layer.stride)
            shapes.append((layer.filters, height, width))
        return shapes

    @property
    def flat_size(self) -> int:
        filters, height, width = self.conv_output_shapes()[-1]
        return filters * height * width

    def parameter_shapes(self) -> 'OrderedDict[str, Tuple[int, ...]]':
        shapes = OrderedDict()
        channels = self.in_channels
        for index, layer in enumerate(self.conv_layers, start=1):
            shapes[f'conv{index}.weight'] = (layer.filters, channels, layer.kernel, layer.kernel)
            shapes[f'conv{index}.bias'] = (layer.filters,)
            channels = layer.filters
        shapes['fc.weight'] = (self.hidden_units, self.flat_size)
        shapes['fc.bias'] = (self.hidden_units,)
        shapes['value.weight'] = (1, self.hidden_units)
        shapes['value.bias'] = (1,)
        shapes['advantage.weight'] = (self.actions, self.hidden_units)
        shapes['advantage.bias'] = (self.actions,)
        return shapes

    def to_dict(self) -> Dict[str, Any]:
        return {
            'in_channels': self.in_channels,
            'height': self.height,
            'width': self.width,
            'conv_layers': [[layer.filters, layer.kernel, layer.stride] for layer in self.conv_layers],
            'hidden_units': self.hidden_units,
            'actions': self.actions,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NetworkArchitecture':
        return cls(
            in_channels=int(data['in_channels']),
            height=int(data['height']),
            width=int(data['width']),
            conv_layers=tuple(ConvSpec(*map(int, layer)) for layer in data['conv_layers']),
            hidden_units=int(data['hidden_units']),
            actions=int(data['actions']),
        )


def default_architecture(frame_size: int = 48, frame_stack: int = 3, channels: int = 3,
                         hidden_units: int = 512, actions: int = 2) -> NetworkArchitecture:
    """Table layer pattern; strides are reduced until the chain fits frames smaller than 48x48."""
    for strides in STRIDE_PATTERNS:
        layers = tuple(ConvSpec(filters, kernel, stride) for (filters, kernel), stride in zip(CONV_PATTERN, strides))
        architecture = NetworkArchitecture(frame_stack * channels, frame_size, frame_size, layers, hidden_units, actions)
        try:
            architecture.conv_output_shapes()
        except ShapeMismatchError:
            continue
        return architecture
    raise ShapeMismatchError(f'Frames of {frame_size}x{frame_size} are too small for the network')


@dataclass
class NetworkParameters:
    architecture: NetworkArchitecture
    tensors: 'OrderedDict[str, np.ndarray]' = field(default_factory=OrderedDict)

    @property
    def dtype(self):
        return next(iter(self.tensors.values())).dtype

    @property
    def parameter_count(self) -> int:
        return sum(tensor.size for tensor in self.tensors.values())

    def copy(self) -> 'NetworkParameters':
        return NetworkParameters(self.architecture, OrderedDict((name, tensor.copy())
                                                                for name, tensor in self.tensors.items()))

    def astype(self, dtype) -> 'NetworkParameters':
        return NetworkParameters(self.architecture, OrderedDict((name, tensor.astype(dtype))
                                                                for name, tensor in self.tensors.items()))

    def is_finite(self) -> bool:
        return all(np.isfinite(tensor).all() for tensor in self.tensors.values())


def init_parameters(architecture: NetworkArchitecture, rng: np.random.Generator,
                    dtype=np.float32) -> NetworkParameters:
    """He-uniform weights for the ReLU layers, +-1/sqrt(fan_in) for the linear heads."""
    tensors = OrderedDict()
    for name, shape in architecture.parameter_shapes().items():
        layer, kind = name.split('.')
        if kind == 'weight':
            fan_in = int(np.prod(shape[1:]))
        else:
            fan_in = int(np.prod(architecture.parameter_shapes()[f'{layer}.weight'][1:]))
        if layer in ('value', 'advantage'):
            limit = 1.0 / np.sqrt(fan_in)
            tensor = rng.uniform(-limit, limit, size=shape)
        elif kind == 'weight':
            limit = np.sqrt(6.0 / fan_in)
            tensor = rng.uniform(-limit, limit, size=shape)
        else:
            tensor = np.zeros(shape)
        tensors[name] = tensor.astype(dtype)
    return NetworkParameters(architecture, tensors)


def _check_input(architecture: NetworkArchitecture, x: np.ndarray) -> None:
    expected = (architecture.in_channels, architecture.height, architecture.width)
    if tuple(x.shape[-3:]) != expected or x.ndim not in (3, 4):
        raise ShapeMismatchError(f'Network expects input {expected}, got {x.shape}')


def forward_with_cache(params: NetworkParameters, x: np.ndarray):
    """Batched forward pass that keeps every intermediate the backward pass needs."""
    _check_input(params.architecture, x)
    tensors = params.tensors
    architecture = params.architecture
    activations = x.astype(params.dtype, copy=False)
    cache = []
    for index, layer in enumerate(architecture.conv_layers, start=1):
        out, cols = conv2d_forward(activations, tensors[f'conv{index}.weight'], tensors[f'conv{index}.bias'],
                                   layer.stride)
        cache.append((activations.shape, cols, out))
        activations = relu(out)
    flat = activations.reshape(activations.shape[0], -1)
    hidden_pre = dense_forward(flat, tensors['fc.weight'], tensors['fc.bias'])
    hidden = relu(hidden_pre)
    value = dense_forward(hidden, tensors['value.weight'], tensors['value.bias'])[:, 0]
    advantage = dense_forward(hidden, tensors['advantage.weight'], tensors['advantage.bias'])
    q_values = value[:, None] + (advantage - advantage.mean(axis=1, keepdims=True))
    return q_values, value, advantage, (cache, flat, hidden_pre, hidden)


def cache_head(cache, count: int):
    """Cache of the first `count` samples of a batched forward pass."""
    conv_cache, flat, hidden_pre, hidden = cache
    head = []
    for input_shape, cols, out in conv_cache:
        rows = count * out.shape[2] * out.shape[3]
        head.append(((count,) + tuple(input_shape[1:]), cols[:rows], out[:count]))
    return head, flat[:count], hidden_pre[:count], hidden[:count]


def forward(params: NetworkParameters, obs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Q, V and A for one observation (C, H, W) or a batch (B, C, H, W).

    Q(a) = V + A(a) - mean(A).
    """
    _check_input(params.architecture, obs)
    single = obs.ndim == 3
    batch = obs[None] if single else obs
    q_values, value, advantage, _ = forward_with_cache(params, batch)
    if single:
        return q_values[0], value[0], advantage[0]
    return q_values, value, advantage


def backprop_loss(params: NetworkParameters, inputs: np.ndarray, actions: np.ndarray,
                  targets: np.ndarray) -> Tuple[float, 'OrderedDict[str, np.ndarray]']:
    """Mean squared TD error over the batch and its gradient for every parameter."""
    _check_input(params.architecture, inputs)
    if inputs.ndim != 4 or len(inputs) == 0:
        raise ShapeMismatchError('backprop_loss needs a non-empty batch')
    q_values, _, _, cache = forward_with_cache(params, inputs)
    return backprop_cached(params, q_values, cache, actions, targets)


def backprop_cached(params: NetworkParameters, q_values: np.ndarray, cache, actions: np.ndarray,
                    targets: np.ndarray) -> Tuple[float, 'OrderedDict[str, np.ndarray]']:
    """backprop_loss on the Q-values and cache of an earlier forward_with_cache call."""
    targets = np.asarray(targets, dtype=params.dtype)
    if not np.isfinite(targets).all():
        raise NonFiniteTargetError('Training targets contain NaN or infinity')
    actions = np.asarray(actions, dtype=np.int64)
    batch_size = len(q_values)
    if batch_size == 0:
        raise ShapeMismatchError('backprop_loss needs a non-empty batch')
    rows = np.arange(batch_size)
    tensors = params.tensors
    cache, flat, hidden_pre, hidden = cache

    errors = q_values[rows, actions] - targets
    loss = float(np.mean(errors * errors))

    grad_q = np.zeros_like(q_values)
    grad_q[rows, actions] = 2.0 * errors / batch_size
    grad_value = grad_q.sum(axis=1, keepdims=True)
    grad_advantage = grad_q - grad_q.mean(axis=1, keepdims=True)

    grads = OrderedDict()
    grad_hidden_v, grads['value.weight'], grads['value.bias'] = dense_backward(
        grad_value, hidden, tensors['value.weight'])
    grad_hidden_a, grads['advantage.weight'], grads['advantage.bias'] = dense_backward(
        grad_advantage, hidden, tensors['advantage.weight'])
    grad_hidden = (grad_hidden_v + grad_hidden_a) * (hidden_pre > 0)
    grad_flat, grads['fc.weight'], grads['fc.bias'] = dense_backward(grad_hidden, flat, tensors['fc.weight'])

    grad_activation = grad_flat.reshape(cache[-1][2].shape)
    for index in range(len(cache), 0, -1):
        input_shape, cols, pre_activation = cache[index - 1]
        grad_pre = grad_activation * (pre_activation > 0)
        layer = params.architecture.conv_layers[index - 1]
        grad_activation, grads[f'conv{index}.weight'], grads[f'conv{index}.bias'] = conv2d_backward(
            grad_pre, cols, input_shape, tensors[f'conv{index}.weight'], layer.stride,
            need_input_grad=index > 1,
        )
    ordered = OrderedDict((name, grads[name].astype(params.dtype, copy=False)) for name in tensors)
    return loss, ordered


def describe_architecture(architecture: NetworkArchitecture) -> List[Tuple[str, str, int]]:
    """(layer, output shape, parameter count) rows."""
    shapes = architecture.parameter_shapes()
    rows = [('input', 'x'.join(map(str, (architecture.in_channels, architecture.height, architecture.width))), 0)]
    for index, (layer, output) in enumerate(zip(architecture.conv_layers, architecture.conv_output_shapes()), start=1):
        count = int(np.prod(shapes[f'conv{index}.weight'])) + layer.filters
        label = f'conv{index} {layer.filters}@{layer.kernel}x{layer.kernel}/s{layer.stride} relu'
        rows.append((label, 'x'.join(map(str, output)), count))
    rows.append(('fc relu', str(architecture.hidden_units),
                 int(np.prod(shapes['fc.weight'])) + architecture.hidden_units))
    rows.append(('value linear', '1', architecture.hidden_units + 1))
    rows.append(('advantage linear', str(architecture.actions), (architecture.hidden_units + 1) * architecture.actions))
    return rows
