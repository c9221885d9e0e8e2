"""
Point cloud samplers.

Farthest point sampling (FPS) and its sector-partitioned variant (AFPS),
both optionally restricted to nearest-point distance updating (NPDU), plus
the random (RPS) and grid-voxel baselines. Every sampler returns a
:class:`~pcsample.core.SampleResult` whose :class:`~pcsample.core.OpStats`
counts exactly the work performed.
"""
import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy

from pcsample.core import (InfeasibleQuotaError, Method, OpStats, PcsampleValueError,
                           SampleResult, SeedPolicy, check_cloud, derive_seed,
                           make_rng, sector_seed)

from ._lockstep import run_sectors, update_window
from .oracle import oracle_fps

__all__ = ['SectorPlan', 'partition_sectors', 'allocate_samples', 'update_window',
           'fps', 'rps', 'afps', 'npdu_fps', 'npdu_afps', 'grid_voxel_sample',
           'oracle_fps', 'sample', 'sample_batch']

logger = logging.getLogger(__name__)


def partition_sectors(n, m):
    """
    Split storage indices ``[0, n)`` into ``m`` contiguous sectors.

    The first ``n % m`` sectors hold ``ceil(n / m)`` points, the rest
    ``floor(n / m)``.

    Returns
    -------
    ranges : list of (start, stop) tuples
    """
    n, m = int(n), int(m)
    if not 1 <= m <= n:
        raise PcsampleValueError(f'sector count must lie in [1, {n}]; got {m}')
    sizes = _even_split(n, m)
    stops = numpy.cumsum(sizes)
    return [(int(stop - size), int(stop)) for size, stop in zip(sizes, stops)]


def allocate_samples(c, m):
    """
    Split ``c`` samples over ``m`` sectors.

    The first ``c % m`` sectors get ``ceil(c / m)``, the rest ``floor(c / m)``.
    """
    c, m = int(c), int(m)
    if not 1 <= m <= c:
        raise PcsampleValueError(f'sector count must lie in [1, {c}]; got {m}')
    return [int(q) for q in _even_split(c, m)]


def _even_split(total, parts):
    sizes = numpy.full(parts, total // parts, dtype=numpy.int64)
    sizes[:total % parts] += 1
    return sizes


@dataclass(frozen=True)
class SectorPlan:
    """Sector intervals in storage order and the samples each must yield."""
    ranges: tuple
    quotas: tuple

    @classmethod
    def build(cls, n, c, m):
        ranges = tuple(partition_sectors(n, m))
        quotas = tuple(allocate_samples(c, m))
        for s, ((start, stop), quota) in enumerate(zip(ranges, quotas)):
            if quota > stop - start:
                raise InfeasibleQuotaError(
                    f'sector {s} [{start}, {stop}) holds {stop - start} points '
                    f'but must yield {quota}')
        return cls(ranges, quotas)

    @property
    def starts(self):
        return numpy.array([start for start, _ in self.ranges], dtype=numpy.int64)

    @property
    def sizes(self):
        return numpy.array([stop - start for start, stop in self.ranges],
                           dtype=numpy.int64)


def _first_points(plan, seed_policy, seed):
    seed_policy = SeedPolicy(seed_policy)
    starts = plan.starts
    if seed_policy is SeedPolicy.FIXED_FIRST_POINT:
        return starts
    return numpy.array([start + make_rng(sector_seed(seed, s)).integers(size)
                        for s, (start, size) in enumerate(zip(starts, plan.sizes))],
                       dtype=numpy.int64)


def _check_count(cloud, c):
    n = len(check_cloud(cloud))
    c = int(c)
    if not 1 <= c <= n:
        raise PcsampleValueError(f'sample count must lie in [1, {n}]; got {c}')
    return n, c


def _run_plan(cloud, plan, first, k=None, workers=1, trace=None):
    starts, sizes = plan.starts, plan.sizes
    quotas = numpy.array(plan.quotas, dtype=numpy.int64)
    m = len(quotas)
    workers = max(1, min(int(workers), m))
    if trace is not None and workers > 1:
        raise PcsampleValueError(
            f'trace needs single-threaded sectors; got workers={workers} for m={m}')
    logger.debug('running %d sector(s), k=%s, on %d worker(s)', m, k, workers)
    if workers == 1:
        indices, rows, stats = run_sectors(cloud.columns, starts, sizes, quotas,
                                           first, k, trace)
        return SampleResult(indices, rows, stats)

    # Contiguous groups keep every group's quotas non-increasing and make the
    # merge a plain concatenation in sector order.
    groups = numpy.array_split(numpy.arange(m), workers)

    def run_group(group):
        return run_sectors(cloud.columns, starts[group], sizes[group], quotas[group],
                           first[group], k)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run_group, groups))
    indices = numpy.concatenate([part[0] for part in parts])
    rows = numpy.concatenate([part[1] + group[0] for part, group in zip(parts, groups)])
    stats = sum((part[2] for part in parts), OpStats())
    return SampleResult(indices, rows, stats)


def fps(cloud, c, seed_policy=SeedPolicy.RANDOM_FIRST_POINT, seed=0, first_index=None,
        trace=None):
    """
    Farthest point sampling.

    After the first point, every iteration updates the minimum squared
    distance of all N points to the newly sampled point and samples the point
    with the largest tracked distance (lowest index on ties).

    Parameters
    ----------
    cloud : PointCloud
    c : int
        Number of samples, ``1 <= c <= N``.
    seed_policy : SeedPolicy or str, optional
        ``random`` draws the first point from ``seed``; ``fixed`` starts at 0.
    seed : int, optional
    first_index : int, optional
        Start from this index instead of the one the seed policy picks.
    trace : callable, optional
        ``trace(iteration, track)`` after every update pass.

    Returns
    -------
    result : SampleResult
        ``stats.dist_evals == (c - 1) * N``.
    """
    n, c = _check_count(cloud, c)
    plan = SectorPlan.build(n, c, 1)
    if first_index is None:
        first = _first_points(plan, seed_policy, seed)
    else:
        if not 0 <= int(first_index) < n:
            raise PcsampleValueError(f'first_index must lie in [0, {n}); got {first_index}')
        first = numpy.array([first_index], dtype=numpy.int64)
    return _run_plan(cloud, plan, first, trace=trace)


def rps(cloud, c, seed=0):
    """Random point sampling: ``c`` distinct uniform indices."""
    n, c = _check_count(cloud, c)
    indices = make_rng(seed).choice(n, size=c, replace=False)
    return SampleResult(indices, numpy.zeros(c, dtype=numpy.int64), OpStats())


def afps(cloud, c, m, seed_policy=SeedPolicy.RANDOM_FIRST_POINT, seed=0, workers=1,
         trace=None):
    """
    Adjustable FPS: an independent local FPS inside each of ``m`` sectors.

    Sectors are contiguous storage intervals (see :func:`partition_sectors`)
    and sector ``s`` yields ``allocate_samples(c, m)[s]`` points, starting from
    its own stream ``seed ^ s``. Results are concatenated in sector order, so
    only ``ceil(c / m) - 1`` update passes run per sector.

    Parameters
    ----------
    workers : int, optional
        Threads to spread sectors over. The result does not depend on it.
    trace : callable, optional
        Only allowed when the sectors run on a single worker.
    """
    n, c = _check_count(cloud, c)
    plan = SectorPlan.build(n, c, m)
    first = _first_points(plan, seed_policy, seed)
    return _run_plan(cloud, plan, first, workers=workers, trace=trace)


def npdu_fps(cloud, c, k, seed_policy=SeedPolicy.RANDOM_FIRST_POINT, seed=0, trace=None):
    """
    FPS with nearest-point distance updating.

    Each iteration only updates the points stored in
    ``update_window((0, N), new_index, k)``; the argmax still scans the whole
    track, skipping sampled points. Points no window has touched keep an
    infinite distance, so while any remain the lowest-indexed one is sampled
    next: early samples are spread through storage rather than chosen by
    geometry.
    """
    n, c = _check_count(cloud, c)
    k = _check_window(k)
    plan = SectorPlan.build(n, c, 1)
    first = _first_points(plan, seed_policy, seed)
    return _run_plan(cloud, plan, first, k=k, trace=trace)


def npdu_afps(cloud, c, m, k, seed_policy=SeedPolicy.RANDOM_FIRST_POINT, seed=0,
              workers=1, trace=None):
    """NPDU applied inside every AFPS sector: at most ``k`` updates per sector pass."""
    n, c = _check_count(cloud, c)
    k = _check_window(k)
    plan = SectorPlan.build(n, c, m)
    first = _first_points(plan, seed_policy, seed)
    return _run_plan(cloud, plan, first, k=k, workers=workers, trace=trace)


def _check_window(k):
    k = int(k)
    if k < 1:
        raise PcsampleValueError(f'k must be >= 1; got {k}')
    return k


def grid_voxel_sample(cloud, c, g=40, seed=0):
    """
    Random voxel sampling over a ``g x g x g`` grid on the bounding box.

    ``min(c, occupied)`` occupied voxels are drawn without replacement and one
    uniform point is taken from each. If ``c`` exceeds the occupied voxels the
    remainder is drawn uniformly from the points not yet sampled, with a
    warning.
    """
    n, c = _check_count(cloud, c)
    g = int(g)
    if g < 1:
        raise PcsampleValueError(f'grid resolution must be >= 1; got {g}')
    points = cloud.points
    low = points.min(axis=0)
    extent = points.max(axis=0) - low
    scale = numpy.divide(g, extent, out=numpy.zeros(3), where=extent > 0)
    voxel = numpy.minimum(((points - low) * scale).astype(numpy.int64), g - 1)
    keys = (voxel[:, 0] * g + voxel[:, 1]) * g + voxel[:, 2]
    occupied, inverse, counts = numpy.unique(keys, return_inverse=True,
                                             return_counts=True)
    members = numpy.argsort(inverse.reshape(-1), kind='stable')
    first_member = numpy.concatenate([[0], numpy.cumsum(counts)[:-1]])

    rng = make_rng(seed)
    take = min(c, len(occupied))
    chosen = rng.choice(len(occupied), size=take, replace=False)
    indices = members[first_member[chosen] + rng.integers(0, counts[chosen])]
    logger.debug('grid g=%d: %d occupied voxels for c=%d', g, len(occupied), c)
    if take < c:
        warnings.warn(
            f'only {len(occupied)} of {g ** 3} voxels are occupied; drawing the '
            f'remaining {c - take} samples uniformly from unsampled points')
        rest = numpy.setdiff1d(numpy.arange(n), indices)
        indices = numpy.concatenate([indices, rng.choice(rest, size=c - take,
                                                         replace=False)])
    return SampleResult(indices, numpy.zeros(c, dtype=numpy.int64), OpStats())


def sample(cloud, spec, workers=1):
    """
    Run the sampler a :class:`~pcsample.core.SamplerSpec` names, timing it.

    Returns
    -------
    result : SampleResult
        With ``wall_seconds`` set to the time spent in the sampler call.
    """
    spec.validate_for(len(cloud))
    method = spec.method
    if method is Method.RPS:
        run = lambda: rps(cloud, spec.c, spec.seed)  # noqa: E731
    elif method is Method.FPS:
        run = lambda: fps(cloud, spec.c, spec.seed_policy, spec.seed)  # noqa: E731
    elif method is Method.AFPS:
        run = lambda: afps(cloud, spec.c, spec.m, spec.seed_policy,  # noqa: E731
                           spec.seed, workers)
    elif method is Method.NPDU_FPS:
        run = lambda: npdu_fps(cloud, spec.c, spec.k, spec.seed_policy,  # noqa: E731
                               spec.seed)
    elif method is Method.NPDU_AFPS:
        run = lambda: npdu_afps(cloud, spec.c, spec.m, spec.k,  # noqa: E731
                                spec.seed_policy, spec.seed, workers)
    else:
        run = lambda: grid_voxel_sample(cloud, spec.c, spec.g, spec.seed)  # noqa: E731
    start = time.perf_counter()
    result = run()
    elapsed = time.perf_counter() - start
    logger.debug('%s on %d points: %.6f s, %s', spec.label, len(cloud), elapsed,
                 result.stats)
    return replace(result, wall_seconds=elapsed)


def sample_batch(clouds, spec, workers=1):
    """
    Sample every cloud of a batch independently with ``spec``.

    Element ``b`` runs with seed ``derive_seed(spec.seed, b)``; results are
    returned in batch order whatever ``workers`` is.
    """
    clouds = list(clouds)
    specs = [spec.with_seed(derive_seed(spec.seed, b)) for b in range(len(clouds))]
    if workers <= 1:
        return [sample(cloud, s) for cloud, s in zip(clouds, specs)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(sample, clouds, specs))
