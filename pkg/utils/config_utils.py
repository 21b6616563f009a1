import contextlib
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Iterator, Mapping, Optional, Tuple

import environs
from dotenv import dotenv_values

from neural.layers import ShapeMismatchError
from neural.network import NetworkArchitecture, default_architecture
from simulation.observation import FRAME_CHANNELS
from simulation.world import MAX_SPEED

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    training_steps: int = 1_000_000
    max_episode_steps: int = 1_000
    evaluation_period: int = 5_000
    target_update_period: int = 1_000
    update_period: int = 1
    discount: float = 0.99
    learning_rate: float = 1e-4
    batch_size: int = 256
    buffer_size: int = 150_000
    initial_epsilon: float = 1.0
    epsilon_decay: float = 1e-6
    reward_weight: float = 1.0
    frame_stack: int = 3
    frame_size: int = 48
    view_extent: float = 50.0
    hidden_units: int = 512
    speed_commands: Tuple[float, ...] = (0.0, 15.0)
    step_length: float = 0.1
    seed: int = 0
    checkpoint_period: int = 50_000
    log_period: int = 1_000
    scenario_shift: float = 1.0
    scenario_floor: float = 0.2 / 81
    evaluation_workers: int = 1
    grad_clip_norm: float = 0.0
    rmsprop_smoothing: float = 0.99
    rmsprop_epsilon: float = 1e-8

    @property
    def actions(self) -> int:
        return len(self.speed_commands)

    def architecture(self) -> NetworkArchitecture:
        return default_architecture(self.frame_size, self.frame_stack, FRAME_CHANNELS, self.hidden_units, self.actions)


PROFILES: Dict[str, TrainConfig] = {
    'parity': TrainConfig(),
    'desk': TrainConfig(
        training_steps=150_000,
        evaluation_period=2_500,
        frame_size=24,
        buffer_size=30_000,
        batch_size=64,
        update_period=2,
        epsilon_decay=1 / 150_000,
        checkpoint_period=25_000,
        evaluation_workers=4,
    ),
}

# TrainConfig field -> config file key
CONFIG_KEYS: Dict[str, str] = {field.name: field.name.upper() for field in fields(TrainConfig)}


@contextlib.contextmanager
def _scoped_environment(values: Mapping[str, Optional[str]]) -> Iterator[None]:
    """Expose `values` through os.environ for the duration of the block."""
    saved = {key: os.environ.get(key) for key in values}
    try:
        for key, value in values.items():
            if value is not None:
                os.environ[key] = value
        yield
    finally:
        for key, value in saved.items():
            if value is None:
                os.environ.pop(key, None)
            else:
                os.environ[key] = value


def _read_values(env: environs.Env, base: TrainConfig) -> Dict[str, Any]:
    values = {}
    for field in fields(TrainConfig):
        key = CONFIG_KEYS[field.name]
        default = getattr(base, field.name)
        if field.name == 'speed_commands':
            values[field.name] = tuple(env.list(key, list(default), subcast=float))
        elif isinstance(default, bool):
            values[field.name] = env.bool(key, default)
        elif isinstance(default, int):
            values[field.name] = env.int(key, default)
        else:
            values[field.name] = env.float(key, default)
    return values


def validate_config(config: TrainConfig) -> TrainConfig:
    positive = ('max_episode_steps', 'evaluation_period', 'target_update_period', 'update_period', 'learning_rate',
                'batch_size', 'buffer_size', 'reward_weight', 'frame_stack', 'frame_size', 'view_extent',
                'hidden_units', 'step_length', 'log_period', 'scenario_shift', 'evaluation_workers', 'rmsprop_epsilon')
    for name in positive:
        if getattr(config, name) <= 0:
            raise ConfigError(f'{CONFIG_KEYS[name]} must be positive, got {getattr(config, name)}')
    non_negative = ('training_steps', 'epsilon_decay', 'seed', 'checkpoint_period', 'scenario_floor',
                    'grad_clip_norm')
    for name in non_negative:
        if getattr(config, name) < 0:
            raise ConfigError(f'{CONFIG_KEYS[name]} must not be negative, got {getattr(config, name)}')
    if not 0.0 < config.discount <= 1.0:
        raise ConfigError(f'DISCOUNT must be in (0, 1], got {config.discount}')
    if not 0.0 <= config.initial_epsilon <= 1.0:
        raise ConfigError(f'INITIAL_EPSILON must be in [0, 1], got {config.initial_epsilon}')
    if not 0.0 < config.rmsprop_smoothing < 1.0:
        raise ConfigError(f'RMSPROP_SMOOTHING must be in (0, 1), got {config.rmsprop_smoothing}')
    if config.scenario_floor * 81 > 1.0:
        raise ConfigError(f'SCENARIO_FLOOR {config.scenario_floor} leaves no mass to distribute')
    if len(config.speed_commands) < 2:
        raise ConfigError('SPEED_COMMANDS needs at least two commands')
    if any(not 0.0 <= command <= MAX_SPEED for command in config.speed_commands):
        raise ConfigError(f'SPEED_COMMANDS must lie in [0, {MAX_SPEED}], got {config.speed_commands}')
    try:
        config.architecture()
    except ShapeMismatchError as e:
        raise ConfigError(f'FRAME_SIZE {config.frame_size}: {e}')
    if config.training_steps and config.training_steps % config.evaluation_period:
        logger.warning(f'EVALUATION_PERIOD {config.evaluation_period} does not divide '
                       f'TRAINING_STEPS {config.training_steps}')
    return config


def get_config(profile: str = 'parity', config_path: Optional[str] = None,
               seed: Optional[int] = None) -> TrainConfig:
    """Profile defaults, overridden by the environment, then by the config file, then by `seed`."""
    if profile not in PROFILES:
        raise ConfigError(f'Unknown profile {profile}, expected one of {", ".join(PROFILES)}')
    file_values = {}
    if config_path is not None:
        if not os.path.isfile(config_path):
            raise ConfigError(f'Config file {config_path} does not exist')
        file_values = dotenv_values(config_path)
        unknown = sorted(set(file_values) - set(CONFIG_KEYS.values()))
        if unknown:
            raise ConfigError(f'Unknown keys in {config_path}: {", ".join(unknown)}')

    env = environs.Env()
    with _scoped_environment(file_values):
        try:
            values = _read_values(env, PROFILES[profile])
        except environs.EnvError as e:
            raise ConfigError(str(e))
    config = TrainConfig(**values)
    if seed is not None:
        config = replace(config, seed=seed)
    logger.debug(f'{profile} profile was read, config was constructed')
    return validate_config(config)


def config_hash(config: TrainConfig) -> str:
    """Short stable digest of every config value."""
    payload = json.dumps(asdict(config), sort_keys=True).encode('utf-8')
    return hashlib.sha256(payload).hexdigest()[:12]
