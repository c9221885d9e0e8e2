"""
Sweep harness: run sampler configurations over generated clouds and collect
one row per (configuration, order condition, trial).
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy
import pandas

from pcsample.core import Method, PcsampleError, PcsampleValueError, SamplerSpec, derive_seed
from pcsample.metrics import coverage_radius, separation
from pcsample.order import apply_condition, locality_score, parse_condition
from pcsample.sampler import sample
from pcsample.synth import gen_scanning_lidar, gen_sparse_dense, gen_stepper_lidar

__all__ = ['COLUMNS', 'SWEEPS', 'SOURCES', 'BenchPlan', 'parse_range', 'make_cloud',
           'run_bench', 'timing_columns']

logger = logging.getLogger(__name__)

COLUMNS = ('method', 'n', 'c', 'm', 'k', 'g', 'order', 'trial', 'threads',
           'wall_seconds', 'dist_evals', 'dist_writes', 'coverage_radius',
           'separation', 'locality_score', 'error')
SWEEPS = {'m': {'m'}, 'k': {'k'}, 'n': {'n'}, 'mk': {'m', 'k'}}
SOURCES = ('scan', 'stepper', 'sparse')
STEPPER_POINTS_PER_LAYER = 32


def timing_columns():
    """Columns that legitimately differ between otherwise identical runs."""
    return ['threads', 'wall_seconds']


def parse_range(text):
    """
    Parse ``'a..b'`` (doubling from a up to b) or ``'a,b,c'`` into ints.

    Items of a comma list may themselves be ranges; duplicates are dropped
    keeping the first occurrence.

    >>> parse_range('2048..32768')
    (2048, 4096, 8192, 16384, 32768)
    >>> parse_range('1,2,8,32')
    (1, 2, 8, 32)
    """
    values = []
    for item in str(text).split(','):
        item = item.strip()
        try:
            if '..' in item:
                low, high = (int(part) for part in item.split('..', 1))
                if not 1 <= low <= high:
                    raise ValueError
                while low <= high:
                    values.append(low)
                    low *= 2
            else:
                values.append(int(item))
        except ValueError:
            raise PcsampleValueError(f'cannot parse {item!r} as a value or a..b range')
    return tuple(dict.fromkeys(values))


def make_cloud(source, n, seed):
    """Generate the input cloud of one trial."""
    if source == 'scan':
        return gen_scanning_lidar(n, seed=seed)
    if source == 'stepper':
        layers, rest = divmod(n, STEPPER_POINTS_PER_LAYER)
        if rest or not layers:
            raise PcsampleValueError(
                f'stepper clouds hold a multiple of {STEPPER_POINTS_PER_LAYER} points; '
                f'got n={n}')
        return gen_stepper_lidar(layers, STEPPER_POINTS_PER_LAYER, seed=seed)
    if source == 'sparse':
        return gen_sparse_dense(n, seed=seed)
    raise PcsampleValueError(f'source must be one of {SOURCES}; got {source!r}')


@dataclass(frozen=True)
class BenchPlan:
    """
    Everything that determines the rows of a sweep, apart from thread count.

    ``n``, ``m`` and ``k`` are tuples; only the axes named by ``sweep`` may
    hold more than one value.
    """
    sweep: str
    methods: tuple
    n: tuple = (2048,)
    c: int = 512
    m: tuple = (32,)
    k: tuple = (16,)
    g: int = 40
    orders: tuple = ('native',)
    source: str = 'scan'
    trials: int = 10
    seed: int = 0
    axis: str = 'x'

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise PcsampleValueError(f'sweep must be one of {sorted(SWEEPS)}; got {self.sweep!r}')
        for name in ('n', 'm', 'k'):
            values = tuple(int(v) for v in getattr(self, name))
            if not values:
                raise PcsampleValueError(f'{name} needs at least one value')
            if len(values) > 1 and name not in SWEEPS[self.sweep]:
                raise PcsampleValueError(
                    f'{name} takes a single value unless the sweep covers it; '
                    f'sweep is {self.sweep!r}')
            object.__setattr__(self, name, values)
        object.__setattr__(self, 'methods', tuple(Method(m) for m in self.methods))
        for order in self.orders:
            parse_condition(order)
        if self.source not in SOURCES:
            raise PcsampleValueError(f'source must be one of {SOURCES}; got {self.source!r}')
        if int(self.trials) < 1:
            raise PcsampleValueError(f'trials must be >= 1; got {self.trials}')

    def configurations(self):
        """``(n, SamplerSpec)`` pairs in row order, without duplicates."""
        seen = []
        for n, method, m, k in itertools.product(self.n, self.methods, self.m, self.k):
            spec = SamplerSpec(method, self.c, m=m if method.uses_sectors else 1,
                               k=k if method.uses_window else 8, g=self.g)
            if (n, spec) not in seen:
                seen.append((n, spec))
        return seen


def _row(cloud, spec, locality):
    m, k, g = spec.parameters()
    row = {'method': spec.method.value, 'n': len(cloud), 'c': spec.c, 'm': m, 'k': k,
           'g': g, 'locality_score': locality, 'error': ''}
    try:
        result = sample(cloud, spec)
    except PcsampleError as err:
        logger.info('%s on n=%d recorded as failed: %s', spec.label, len(cloud), err)
        row['error'] = str(err)
        return row
    row.update(wall_seconds=result.wall_seconds,
               dist_evals=result.stats.dist_evals,
               dist_writes=result.stats.dist_writes,
               coverage_radius=coverage_radius(cloud, result.indices),
               separation=(separation(cloud, result.indices) if len(result) > 1
                           else numpy.nan))
    return row


def run_bench(plan, threads=1):
    """
    Run every configuration of ``plan`` for every order condition and trial.

    Trial ``t`` generates its cloud with seed ``derive_seed(plan.seed, t)``,
    reorders it with the same seed and samples with it too, so all
    configurations of a trial see the same input. Wall time covers the
    sampler call only.

    Parameters
    ----------
    plan : BenchPlan
    threads : int, optional
        Rows are computed concurrently on this many threads. Only the
        ``threads`` and ``wall_seconds`` columns depend on it.

    Returns
    -------
    frame : pandas.DataFrame
        Columns :data:`COLUMNS`, one row per (configuration, order, trial).
        Failed configurations keep their parameters and carry the message in
        ``error``.
    """
    threads = max(1, int(threads))
    configurations = plan.configurations()
    seeds = [derive_seed(plan.seed, t) for t in range(int(plan.trials))]
    clouds = {}
    for n, order, t in itertools.product(dict.fromkeys(n for n, _ in configurations),
                                         plan.orders, range(len(seeds))):
        cloud = apply_condition(make_cloud(plan.source, n, seeds[t]), order, seeds[t])
        clouds[n, order, t] = (cloud, locality_score(cloud, plan.axis))

    jobs = [(n, spec, order, t)
            for n, spec in configurations
            for order in plan.orders
            for t in range(len(seeds))]
    logger.info('running %d row(s) on %d thread(s)', len(jobs), threads)

    def run(job):
        n, spec, order, t = job
        cloud, locality = clouds[n, order, t]
        row = _row(cloud, spec.with_seed(seeds[t]), locality)
        row.update(n=n, order=order, trial=t, threads=threads)
        return row

    if threads == 1:
        rows = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, jobs))
    frame = pandas.DataFrame(rows, columns=list(COLUMNS))
    # Integer columns with gaps (ignored parameters, failed rows).
    for name in ('m', 'k', 'g', 'dist_evals', 'dist_writes'):
        frame[name] = pandas.array(frame[name].tolist(), dtype='Int64')
    return frame
