import pytest

from simulation.geometry import Approach, Intention
from simulation.scenarios import (ScenarioSpec, four_way_scenario, parse_scenario_lines, read_scenario_file,
                                  write_scenario_file)
from simulation.world import ScenarioValidationError


def test_four_way_scenario_has_one_vehicle_per_approach():
    spec = four_way_scenario([Intention.LEFT, Intention.STRAIGHT, Intention.RIGHT, Intention.LEFT])
    assert [spawn[0] for spawn in spec.spawns] == list(Approach)
    assert all(spawn[2] == 0.0 for spawn in spec.spawns)
    assert spec.label == 'N:Left@0 E:Straight@0 S:Right@0 W:Left@0'


def test_four_way_scenario_needs_four_intentions():
    with pytest.raises(ScenarioValidationError):
        four_way_scenario([Intention.LEFT] * 3)


def test_parse_scenario_lines():
    spec = parse_scenario_lines([
        '# approach intention spawn_time',
        'N left 0',
        '',
        'e, Straight, 1.5  # late',
    ])
    assert spec.spawns == ((Approach.N, Intention.LEFT, 0.0), (Approach.E, Intention.STRAIGHT, 1.5))


@pytest.mark.parametrize('line', ['N left', 'X left 0', 'N back 0', 'N left soon'])
def test_bad_lines_name_the_line_number(line):
    with pytest.raises(ScenarioValidationError, match='line 2'):
        parse_scenario_lines(['S right 0', line])


def test_scenario_file(tmp_path):
    spec = ScenarioSpec(((Approach.W, Intention.RIGHT, 0.0), (Approach.W, Intention.LEFT, 2.25)))
    path = tmp_path / 'scenario.txt'
    write_scenario_file(spec, path)
    assert read_scenario_file(path) == spec


def test_spec_normalizes_plain_values():
    assert ScenarioSpec(((0, 2, 1),)).spawns == ((Approach.N, Intention.RIGHT, 1.0),)
