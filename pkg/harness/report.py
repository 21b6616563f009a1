"""Benchmark reports and their CSV / JSON files."""
import csv
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from slugify import Slugify

from harness.metrics import MetricsSummary

logger = logging.getLogger(__name__)

PRECISION = 6
REPORT_FORMATS = ('csv', 'json')
METRIC_COLUMNS = ('vehicles', 'completed', 'collided', 'censored', 'collision_rate', 'mean_travel_time',
                  'mean_waiting_time', 'mean_average_speed', 'suite_collision_rate')
META_COLUMNS = ('method', 'config_hash', 'flow_rate', 'horizon', 'latency_ms', 'latency_ok')
CSV_COLUMNS = META_COLUMNS + ('row',) + METRIC_COLUMNS

slugify_name = Slugify(to_lower=True)


class UnknownFormatError(ValueError):
    pass


def _round(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(float(value), PRECISION)


@dataclass(frozen=True)
class SeedResult:
    seed: int
    vehicles: int
    completed: int
    collided: int
    censored: int
    collision_rate: float
    mean_travel_time: Optional[float]
    mean_waiting_time: Optional[float]
    mean_average_speed: Optional[float]
    suite_collision_rate: Optional[float] = None

    def __post_init__(self):
        for name in ('collision_rate', 'mean_travel_time', 'mean_waiting_time', 'mean_average_speed',
                     'suite_collision_rate'):
            object.__setattr__(self, name, _round(getattr(self, name)))


@dataclass(frozen=True)
class EvaluationReport:
    method: str
    seeds: Tuple[SeedResult, ...] = ()
    config_hash: str = ''
    flow_rate: float = 600.0
    horizon: float = 600.0
    latency_ms: Optional[float] = None
    latency_ok: Optional[bool] = None
    overall: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)

    @property
    def seed_list(self) -> List[int]:
        return [result.seed for result in self.seeds]


def seed_result(seed: int, flow: MetricsSummary, suite: Optional[MetricsSummary] = None) -> SeedResult:
    return SeedResult(
        seed=seed,
        vehicles=flow.vehicles,
        completed=flow.completed,
        collided=flow.collided,
        censored=flow.censored,
        collision_rate=flow.collision_rate,
        mean_travel_time=flow.mean_travel_time,
        mean_waiting_time=flow.mean_waiting_time,
        mean_average_speed=flow.mean_average_speed,
        suite_collision_rate=None if suite is None else suite.collision_rate,
    )


def aggregate_seeds(seeds: Sequence[SeedResult]) -> Dict[str, Dict[str, Optional[float]]]:
    """Mean and population standard deviation of every metric over the seeds that have it."""
    means, stds = {}, {}
    for name in METRIC_COLUMNS:
        values = sorted(getattr(result, name) for result in seeds if getattr(result, name) is not None)
        means[name] = _round(np.mean(values)) if values else None
        stds[name] = _round(np.std(values)) if values else None
    return {'mean': means, 'std': stds}


def build_report(method: str, seeds: Sequence[SeedResult], config_hash: str = '', flow_rate: float = 600.0,
                 horizon: float = 600.0, latency_ms: Optional[float] = None,
                 latency_bound_ms: float = 100.0) -> EvaluationReport:
    ordered = tuple(sorted(seeds, key=lambda result: result.seed))
    return EvaluationReport(
        method=method,
        seeds=ordered,
        config_hash=config_hash,
        flow_rate=float(flow_rate),
        horizon=float(horizon),
        latency_ms=_round(latency_ms),
        latency_ok=None if latency_ms is None else latency_ms < latency_bound_ms,
        overall=aggregate_seeds(ordered),
    )


def report_filename(report: EvaluationReport, fmt: str) -> str:
    return f'{slugify_name(f"{report.method} {report.flow_rate:g} vph")}.{fmt}'


def _format(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f'{value:.{PRECISION}f}'
    return str(value)


def _write_csv(report: EvaluationReport, path) -> None:
    meta = [report.method, report.config_hash, report.flow_rate, report.horizon, report.latency_ms,
            report.latency_ok]
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for result in report.seeds:
            writer.writerow([_format(value) for value in meta + [result.seed]]
                            + [_format(getattr(result, name)) for name in METRIC_COLUMNS])
        for row_name in ('mean', 'std'):
            values = report.overall.get(row_name, {})
            writer.writerow([_format(value) for value in meta + [row_name]]
                            + [_format(values.get(name)) for name in METRIC_COLUMNS])


def _write_json(report: EvaluationReport, path) -> None:
    data = asdict(report)
    data['seed_list'] = report.seed_list
    with open(path, 'w') as f:
        json.dump(data, f, indent=2)


def export_report(report: EvaluationReport, path, fmt: Optional[str] = None) -> None:
    fmt = fmt or os.path.splitext(str(path))[1].lstrip('.')
    if fmt not in REPORT_FORMATS:
        raise UnknownFormatError(f'Unknown report format "{fmt}", expected one of {", ".join(REPORT_FORMATS)}')
    if fmt == 'csv':
        _write_csv(report, path)
    else:
        _write_json(report, path)
    logger.debug(f'{report.method} report with {len(report.seeds)} seeds was written to {path}')


def _parse_optional(text: str, cast):
    return None if text == '' else cast(text)


def _seed_from_mapping(values: Dict[str, Any], cast) -> SeedResult:
    kwargs = {}
    for item in fields(SeedResult):
        raw = values[item.name]
        kwargs[item.name] = cast(raw, int if item.name in ('seed', 'vehicles', 'completed', 'collided', 'censored')
                                 else float)
    return SeedResult(**kwargs)


def _load_csv(path) -> EvaluationReport:
    with open(path, newline='') as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise UnknownFormatError(f'{path} has no report rows')
    first = rows[0]
    seeds = []
    overall = {}
    for row in rows:
        if row['row'] in ('mean', 'std'):
            overall[row['row']] = {name: _parse_optional(row[name], float) for name in METRIC_COLUMNS}
        else:
            seeds.append(_seed_from_mapping(dict(row, seed=row['row']), _parse_optional))
    latency_ok = _parse_optional(first['latency_ok'], lambda text: text == '1')
    return EvaluationReport(
        method=first['method'],
        seeds=tuple(seeds),
        config_hash=first['config_hash'],
        flow_rate=float(first['flow_rate']),
        horizon=float(first['horizon']),
        latency_ms=_parse_optional(first['latency_ms'], float),
        latency_ok=latency_ok,
        overall=overall,
    )


def _load_json(path) -> EvaluationReport:
    with open(path) as f:
        data = json.load(f)
    seeds = tuple(_seed_from_mapping(item, lambda value, cast: None if value is None else cast(value))
                  for item in data['seeds'])
    return EvaluationReport(
        method=data['method'],
        seeds=seeds,
        config_hash=data['config_hash'],
        flow_rate=data['flow_rate'],
        horizon=data['horizon'],
        latency_ms=data['latency_ms'],
        latency_ok=data['latency_ok'],
        overall=data['overall'],
    )


def load_report(path, fmt: Optional[str] = None) -> EvaluationReport:
    fmt = fmt or os.path.splitext(str(path))[1].lstrip('.')
    if fmt not in REPORT_FORMATS:
        raise UnknownFormatError(f'Unknown report format "{fmt}", expected one of {", ".join(REPORT_FORMATS)}')
    return _load_csv(path) if fmt == 'csv' else _load_json(path)
