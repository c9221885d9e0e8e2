"""
Produce and measure storage orderings of point clouds.

Three orderings are studied: unsorted, approximately sorted (sorted bins with
arbitrary order inside each bin) and exactly sorted along one axis.
"""
import logging

import numpy

from pcsample.core import (OrderTag, PcsampleValueError, axis_name, check_cloud,
                           make_rng)

logger = logging.getLogger(__name__)


def exact_sort(cloud, axis='x'):
    """
    Stably sort ``cloud`` by its coordinate along ``axis``.

    Points with equal coordinates keep their original relative order.
    """
    check_cloud(cloud)
    axis = axis_name(axis)
    order = numpy.argsort(cloud.coord(axis), kind='stable')
    return cloud.permuted(order, OrderTag.exactly_sorted(axis))


def bin_approx_sort(cloud, axis='x', bin_size=128, seed=0):
    """
    Approximately sort ``cloud`` along ``axis`` with bins of ``bin_size``.

    The cloud is exactly sorted first, then every consecutive block of
    ``bin_size`` points (the final partial block included) is shuffled
    independently. Every point of a later bin is therefore >= every point of
    an earlier bin, while the order inside each bin is arbitrary.

    Parameters
    ----------
    cloud : PointCloud
    axis : {'x', 'y', 'z'}, optional
    bin_size : int, optional
        Points per bin; 1 reproduces :func:`exact_sort`. Default 128.
    seed : int, optional
        Seed of the within-bin shuffles.

    Returns
    -------
    cloud : PointCloud
        Tagged ``approx_sorted(axis, bin_size)``.
    """
    n = len(check_cloud(cloud))
    bin_size = int(bin_size)
    if not 1 <= bin_size <= n:
        raise PcsampleValueError(f'bin_size must lie in [1, {n}]; got {bin_size}')
    ordered = exact_sort(cloud, axis)
    keys = make_rng(seed).random(n)
    bins = numpy.arange(n) // bin_size
    # Primary key is the bin, so points never leave their bin.
    order = numpy.lexsort((keys, bins))
    return ordered.permuted(order, OrderTag.approx_sorted(axis, bin_size))


def shuffle(cloud, seed=0):
    """Uniformly permute ``cloud`` with the seeded generator."""
    n = len(check_cloud(cloud))
    return cloud.permuted(make_rng(seed).permutation(n), OrderTag.unsorted())


def locality_score(cloud, axis='x'):
    """
    Adjacent-inversion rate of ``cloud`` along ``axis``.

    Returns the fraction of index pairs ``(i, i + 1)`` whose coordinate
    decreases. 0 means exactly sorted, 1 reverse sorted, about 0.5 no
    locality at all.
    """
    values = cloud.coord(axis)
    if len(values) < 2:
        raise PcsampleValueError('locality_score needs at least 2 points')
    return float(numpy.count_nonzero(values[:-1] > values[1:]) / (len(values) - 1))


def windowed_locality_score(cloud, axis='x', window=64):
    """
    Mean direction-agnostic disorder over consecutive windows of the cloud.

    Each window of ``window`` points is scored as ``min(s, 1 - s)``, where
    ``s`` is its adjacent-inversion rate, so runs that rise or fall steadily
    both score 0. A trailing window shorter than two points is ignored.
    """
    values = cloud.coord(axis)
    window = int(window)
    if window < 2:
        raise PcsampleValueError(f'window must be >= 2; got {window}')
    if len(values) < 2:
        raise PcsampleValueError('windowed_locality_score needs at least 2 points')
    scores = []
    for start in range(0, len(values), window):
        chunk = values[start:start + window]
        if len(chunk) < 2:
            continue
        s = numpy.count_nonzero(chunk[:-1] > chunk[1:]) / (len(chunk) - 1)
        scores.append(min(s, 1.0 - s))
    return float(numpy.mean(scores))


def parse_condition(condition):
    """
    Parse an order condition string into ``(operation, axis, bin_size)``.

    Accepted forms are ``native`` (keep the generated order), ``shuffle``,
    ``exact:<axis>`` and ``bin:<axis>:<size>``.
    """
    parts = str(condition).strip().lower().split(':')
    if parts == ['native'] or parts == ['shuffle']:
        return parts[0], None, None
    if parts[0] == 'exact' and len(parts) == 2:
        return 'exact', axis_name(parts[1]), None
    if parts[0] == 'bin' and len(parts) == 3:
        try:
            size = int(parts[2])
        except ValueError:
            size = 0
        if size >= 1:
            return 'bin', axis_name(parts[1]), size
    raise PcsampleValueError(
        f'unknown order condition {condition!r}; expected native, shuffle, '
        'exact:<axis> or bin:<axis>:<size>')


def apply_condition(cloud, condition, seed=0):
    """Reorder ``cloud`` according to an order condition string."""
    operation, axis, bin_size = parse_condition(condition)
    logger.debug('applying order condition %s to %r', condition, cloud)
    if operation == 'native':
        return check_cloud(cloud)
    if operation == 'shuffle':
        return shuffle(cloud, seed)
    if operation == 'exact':
        return exact_sort(cloud, axis)
    return bin_approx_sort(cloud, axis, min(bin_size, len(cloud)), seed)
