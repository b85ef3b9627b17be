# -*- coding: utf-8 -*-
#
# sweep.py
#
"""Enumerate code parameters at fixed length and distance and tabulate metrics.

LCCR tuples satisfy Δ = u - 1, u + 2Δ = d_min and m(r + u - 1 + Δ) = n.
MSR-local and MBR-local tuples satisfy u + Δ = d_min and
m(r + u - 1) + Δ = n.

"""

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .constants import CSV_HEADER, DEFAULT_SWEEP_DMIN, DEFAULT_SWEEP_N
from .errors import ParameterError
from .metrics import Family, MetricsRow


__all__ = (
    'SweepSpec',
    'emit_csv',
    'enumerate_params',
    'run_sweep',
    'write_csv',
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    The default ranges are m >= 3, r >= 2, u >= 3, Δ >= 1, which keep every
    family inside the domain of its formulas; ``relaxed`` widens them to
    r >= 1, u >= 2, Δ >= 0.

    """

    n: int = DEFAULT_SWEEP_N
    d_min: int = DEFAULT_SWEEP_DMIN
    families: tuple = tuple(Family)
    relaxed: bool = False
    require_group_repairable: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n < 1 or self.d_min < 1:
            raise ParameterError("n and d_min must be positive, got n=%r, d_min=%r." %
                                 (self.n, self.d_min))
        object.__setattr__(self, 'families', tuple(Family(f) for f in self.families))

    @property
    def min_m(self):
        return 3

    @property
    def min_r(self):
        return 1 if self.relaxed else 2

    @property
    def min_u(self):
        return 2 if self.relaxed else 3

    @property
    def min_delta(self):
        return 0 if self.relaxed else 1


def _lccr_params(spec):
    for u in range(spec.min_u, spec.d_min + 1):
        delta = u - 1
        if u + 2 * delta != spec.d_min or delta < spec.min_delta:
            continue
        for m in range(spec.min_m, spec.n + 1):
            if spec.n % m:
                continue
            r = spec.n // m - (u - 1) - delta
            if r >= spec.min_r:
                yield m, r, u, delta


def _baseline_params(spec):
    for u in range(spec.min_u, spec.d_min + 1):
        delta = spec.d_min - u
        if delta < spec.min_delta:
            continue
        rest = spec.n - delta
        for m in range(spec.min_m, rest + 1):
            if rest % m:
                continue
            r = rest // m - (u - 1)
            if r >= spec.min_r:
                yield m, r, u, delta


def enumerate_params(spec, family):
    """Return all ``(m, r, u, delta)`` tuples of ``family`` allowed by ``spec``, sorted."""
    family = Family(family)
    found = _lccr_params(spec) if family is Family.LCCR else _baseline_params(spec)
    return sorted(found)


def _row(args):
    return MetricsRow.compute(*args).validate()


def run_sweep(spec):
    """Return one validated ``MetricsRow`` per enumerated tuple and family."""
    jobs = [(family,) + params for family in spec.families
            for params in enumerate_params(spec, family)]

    if spec.workers > 1 and jobs:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(job) for job in jobs]

    if spec.require_group_repairable:
        rows = [row for row in rows if row.group_repairable]

    rows.sort(key=MetricsRow.sort_key)
    log.info("Sweep n=%i d_min=%i produced %i rows.", spec.n, spec.d_min, len(rows))
    return rows


def write_csv(rows, fileobj):
    """Write the header and one line per row to an open text file."""
    writer = csv.writer(fileobj, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())


def emit_csv(rows, path):
    with open(path, 'w', newline='') as fileobj:
        write_csv(rows, fileobj)
    log.info("Wrote %i rows to %s.", len(rows), path)
