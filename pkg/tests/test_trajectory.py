import pytest

from simulation.geometry import Approach, Intention
from simulation.scenarios import ScenarioSpec
from simulation.trajectory import (TRAJECTORY_COLUMNS, TrajectoryParseError, TrajectoryRecorder, parse_trajectory_lines,
                                   read_trajectory_csv, write_trajectory_csv)
from simulation.world import spawn_scenario, step_world


def recorded_rows(steps=30):
    world = spawn_scenario(ScenarioSpec(((Approach.S, Intention.LEFT, 0.0), (Approach.W, Intention.RIGHT, 0.0))))
    recorder = TrajectoryRecorder()
    for _ in range(steps):
        world = step_world(world, {vehicle.id: 15.0 for vehicle in world.active_vehicles()})
        recorder.record(world)
    return recorder.rows


def test_recorder_writes_one_row_per_vehicle_and_step():
    rows = recorded_rows()
    assert len(rows) == 60
    assert [row.step for row in rows[:4]] == [1, 1, 2, 2]
    assert rows[0].approach is Approach.W or rows[0].approach is Approach.S


def test_csv_round_trip(tmp_path):
    rows = recorded_rows()
    path = tmp_path / 'trajectory.csv'
    write_trajectory_csv(rows, path)
    assert read_trajectory_csv(path) == rows


def test_header_is_checked():
    with pytest.raises(TrajectoryParseError, match='line 1'):
        parse_trajectory_lines(['step,vehicle\n'])


@pytest.mark.parametrize('line', [
    '1,0,N,Left,1.0,2.0,0\n',
    '1,0,N,Left,far,2.0,0,0\n',
    '1,0,Q,Left,1.0,2.0,0,0\n',
    '1,0,N,Left,1.0,2.0,2,0\n',
])
def test_malformed_rows_name_the_line(line):
    lines = [','.join(TRAJECTORY_COLUMNS) + '\n', '1,1,E,Right,0.5,0.26,0,0\n', line]
    with pytest.raises(TrajectoryParseError, match='line 3'):
        parse_trajectory_lines(lines)
