"""
Lockstep engine behind fps, afps and the NPDU variants.

Every sector runs its own local farthest point sampling with a private
DistanceTrack row. The engine advances all sectors one iteration at a time in
a padded (M, S_max) layout, so a single numpy pass per iteration serves every
sector. Sectors never read each other's rows, so the result equals running
them one after the other.
"""
import numpy

from pcsample.core import DistanceTrack, OpStats, PcsampleValueError


def update_window(sector, sample_idx, k):
    """
    Index interval whose distances an NPDU iteration updates.

    Returns ``[sample_idx - k // 2, sample_idx + ceil(k / 2))`` clamped to the
    half-open ``sector`` interval. Near a sector boundary the window is not
    re-extended, so it may hold fewer than ``k`` points.

    Scalars give a tuple of ints; arrays of sector bounds and sample indices
    give a tuple of arrays, one window per sector.
    """
    start, stop = sector
    left = k // 2
    right = k - left
    if numpy.ndim(sample_idx) == 0:
        if k < 1:
            raise PcsampleValueError(f'k must be >= 1; got {k}')
        if not start <= sample_idx < stop:
            raise PcsampleValueError(
                f'sample index {sample_idx} lies outside sector [{start}, {stop})')
        return int(max(sample_idx - left, start)), int(min(sample_idx + right, stop))
    return (numpy.maximum(sample_idx - left, start),
            numpy.minimum(sample_idx + right, stop))


def run_sectors(columns, starts, sizes, quotas, first, k=None, trace=None):
    """
    Sample every sector to its quota.

    Parameters
    ----------
    columns : ndarray, shape (3, N)
        Contiguous x, y and z coordinates of the whole cloud.
    starts, sizes, quotas : ndarray of int, shape (M,)
        Sector start indices, sector sizes and per-sector sample counts.
        Quotas must be non-increasing, as produced by ``allocate_samples``.
    first : ndarray of int, shape (M,)
        Global index of each sector's first sample.
    k : int, optional
        NPDU window size. ``None`` updates the whole sector every iteration.
    trace : callable, optional
        Called as ``trace(iteration, track)`` after every update pass.

    Returns
    -------
    indices : ndarray
        Samples in sector order, each sector's in sampling order.
    sector_rows : ndarray
        Row (local sector number) of every sample.
    stats : OpStats
    """
    starts = numpy.asarray(starts, dtype=numpy.int64)
    sizes = numpy.asarray(sizes, dtype=numpy.int64)
    quotas = numpy.asarray(quotas, dtype=numpy.int64)
    if numpy.any(numpy.diff(quotas) > 0):
        raise PcsampleValueError('sector quotas must be non-increasing')
    x, y, z = columns
    m = len(starts)
    stops = starts + sizes
    row_width = int(sizes.max())
    width = row_width if k is None else min(int(k), row_width)
    offsets = numpy.arange(width)
    # Global index -> flat position in the padded (M, row_width) layout.
    shift = numpy.arange(m) * row_width - starts

    track = DistanceTrack(sizes)
    distance = track.rows.reshape(-1)
    # Argmax keys: tracked distance for live points, -1 once sampled,
    # -inf for padding.
    keys2d = numpy.full((m, row_width), -numpy.inf)
    keys2d[numpy.arange(row_width) < sizes[:, None]] = numpy.inf
    keys = keys2d.reshape(-1)

    samples = numpy.empty((m, int(quotas.max())), dtype=numpy.int64)
    current = numpy.asarray(first, dtype=numpy.int64).copy()
    samples[:, 0] = current
    keys[current + shift] = -1.0

    dist_evals = dist_writes = argmax_scans = iterations = 0
    for t in range(1, int(quotas.max())):
        r = int(numpy.count_nonzero(quotas > t))
        cur = current[:r]
        if k is None:
            lo, hi = starts[:r], stops[:r]
        else:
            lo, hi = update_window((starts[:r], stops[:r]), cur, k)
        pos = lo[:, None] + offsets
        valid = pos < hi[:, None]
        pos = numpy.where(valid, pos, cur[:, None])
        dx = x[pos] - x[cur][:, None]
        dy = y[pos] - y[cur][:, None]
        dz = z[pos] - z[cur][:, None]
        dist = dx * dx + dy * dy + dz * dz

        flat = pos + shift[:r, None]
        hit = valid & (dist <= distance[flat])
        flat_hit = flat[hit]
        dist_hit = dist[hit]
        distance[flat_hit] = dist_hit
        live = keys[flat_hit] >= 0
        keys[flat_hit[live]] = dist_hit[live]

        dist_evals += int(numpy.count_nonzero(valid))
        dist_writes += len(flat_hit)
        if trace is not None:
            trace(t, track)

        current[:r] = starts[:r] + keys2d[:r].argmax(axis=1)
        keys[current[:r] + shift[:r]] = -1.0
        samples[:r, t] = current[:r]
        argmax_scans += int(sizes[:r].sum())
        iterations += r

    taken = numpy.arange(samples.shape[1]) < quotas[:, None]
    rows = numpy.repeat(numpy.arange(m), quotas)
    stats = OpStats(dist_evals, dist_writes, argmax_scans, iterations)
    return samples[taken], rows, stats
