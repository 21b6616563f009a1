import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow acceptance checks')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_architecture():
    from neural.network import default_architecture
    return default_architecture(frame_size=16, frame_stack=3, channels=3, hidden_units=8, actions=2)


@pytest.fixture
def small_settings():
    from trainer.episodes import EpisodeSettings
    return EpisodeSettings(max_steps=20, frame_size=16, frame_stack=3)
