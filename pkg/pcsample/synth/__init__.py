"""
Synthetic point clouds for the two LiDAR acquisition regimes and for
sparse/dense stress cases.

A scanning 3D LiDAR rotates about z and emits points in azimuth-sweep order,
so a limited field of view yields clouds approximately sorted along x. A 2D
LiDAR on a stepping motor emits one planar scan per layer in increasing z, so
its clouds are exactly sorted along z.
"""
import logging
from dataclasses import dataclass

import numpy

from pcsample.core import (OrderTag, PcsampleValueError, PointCloud, derive_seed,
                           make_rng)

logger = logging.getLogger(__name__)

DEFAULT_ELEVATIONS = (-6.0, -2.0, 2.0, 6.0)


@dataclass(frozen=True)
class RangeProfile:
    """
    Piecewise-smooth radius (meters) as a function of azimuth (degrees).

    The background is ``base * (1 + sum(a * sin(f * theta + phase)))`` over
    ``harmonics`` of ``(a, f, phase)``. Each ``(start_deg, width_deg, range)``
    in ``objects`` pulls the radius in to ``range`` across its azimuth span,
    modelling a closer object in front of the background.
    """
    base: float = 12.0
    harmonics: tuple = ()
    objects: tuple = ()

    @classmethod
    def constant(cls, distance):
        return cls(base=float(distance))

    @classmethod
    def random(cls, seed, base=12.0, amplitude=0.01, n_harmonics=3, n_objects=3,
               depth=(0.85, 0.95)):
        """
        Draw a profile from ``seed``.

        Harmonic ``h`` gets relative amplitude ``amplitude * w_h / h`` with the
        weights ``w`` summing to one, which bounds the relative slope
        ``|r'| / r`` by about ``amplitude``. Objects sit at ``base * U(*depth)``,
        so a sweep packs at most about ``1 / depth[0]`` times as many points
        per meter onto an object as onto the background.
        """
        rng = make_rng(seed)
        weights = rng.random(n_harmonics) + 1e-3
        weights /= weights.sum()
        harmonics = tuple(
            (float(amplitude * w / h), float(h), float(phase))
            for h, (w, phase) in enumerate(
                zip(weights, rng.uniform(0.0, 2 * numpy.pi, n_harmonics)), start=1))
        objects = tuple(
            (float(start), float(width), float(base * scale))
            for start, width, scale in zip(rng.uniform(0.0, 360.0, n_objects),
                                           rng.uniform(5.0, 25.0, n_objects),
                                           rng.uniform(*depth, n_objects)))
        return cls(base=float(base), harmonics=harmonics, objects=objects)

    def __call__(self, azimuth_deg):
        azimuth_deg = numpy.asarray(azimuth_deg, dtype=numpy.float64)
        theta = numpy.radians(azimuth_deg)
        ripple = numpy.zeros_like(theta)
        for amplitude, frequency, phase in self.harmonics:
            ripple += amplitude * numpy.sin(frequency * theta + phase)
        radius = self.base * (1.0 + ripple)
        for start, width, distance in self.objects:
            inside = numpy.mod(azimuth_deg - start, 360.0) < width
            radius = numpy.where(inside, numpy.minimum(radius, distance), radius)
        return radius


def gen_scanning_lidar(n, fov_deg=120.0, range_profile=None, jitter=0.0, seed=0,
                       elevations_deg=DEFAULT_ELEVATIONS):
    """
    Simulate one sweep of a multi-beam scanning LiDAR.

    Every point gets its own azimuth, increasing with index across a field of
    view centred on 270 degrees, so x = r cos(azimuth) rises along any sweep
    of up to 180 degrees. Beams of the elevation fan are interleaved point by
    point, and z follows the beam elevation at the measured range.

    Parameters
    ----------
    n : int
        Number of points, at least 2.
    fov_deg : float, optional
        Horizontal field of view in (0, 360]. Default 120.
    range_profile : RangeProfile, optional
        Radius as a function of azimuth. Drawn from ``seed`` when omitted.
    jitter : float, optional
        Relative range noise amplitude; each radius is scaled by
        ``1 + jitter * U(-1, 1)``. Default 0.
    seed : int, optional
    elevations_deg : sequence of float, optional
        Beam elevations, cycled over consecutive points.

    Returns
    -------
    cloud : PointCloud
        Tagged unsorted; the x locality is emergent, not claimed.
    """
    n = int(n)
    if n < 2:
        raise PcsampleValueError(f'a scan needs at least 2 points; got {n}')
    fov_deg = float(fov_deg)
    if not 0.0 < fov_deg <= 360.0:
        raise PcsampleValueError(f'fov_deg must lie in (0, 360]; got {fov_deg}')
    if jitter < 0:
        raise PcsampleValueError(f'jitter must be >= 0; got {jitter}')
    if range_profile is None:
        range_profile = RangeProfile.random(derive_seed(seed, 1))

    azimuth = 270.0 - fov_deg / 2 + fov_deg * (numpy.arange(n) + 0.5) / n
    radius = range_profile(azimuth)
    if jitter:
        radius = radius * (1.0 + jitter * make_rng(seed).uniform(-1.0, 1.0, n))
    fan = numpy.radians(numpy.asarray(elevations_deg, dtype=numpy.float64))
    elevation = fan[numpy.arange(n) % len(fan)]
    theta = numpy.radians(azimuth)
    points = numpy.column_stack([radius * numpy.cos(theta),
                                 radius * numpy.sin(theta),
                                 radius * numpy.tan(elevation)])
    return PointCloud(points)


def gen_stepper_lidar(layers, points_per_layer, z_step=0.1, seed=0, fov_deg=270.0,
                      range_profile=None):
    """
    Simulate a 2D LiDAR raised one step per layer by a stepping motor.

    Layer ``i`` is a planar scan at ``z = i * z_step``, so the cloud is
    exactly sorted along z. Each layer draws its own range profile unless
    ``range_profile`` is given.
    """
    layers = int(layers)
    points_per_layer = int(points_per_layer)
    if layers < 1 or points_per_layer < 1:
        raise PcsampleValueError('layers and points_per_layer must be >= 1')
    if z_step < 0:
        raise PcsampleValueError(f'z_step must be >= 0; got {z_step}')
    fov_deg = float(fov_deg)
    if not 0.0 < fov_deg <= 360.0:
        raise PcsampleValueError(f'fov_deg must lie in (0, 360]; got {fov_deg}')

    azimuth = -fov_deg / 2 + fov_deg * (numpy.arange(points_per_layer) + 0.5) / points_per_layer
    theta = numpy.radians(azimuth)
    scans = []
    for layer in range(layers):
        profile = range_profile or RangeProfile.random(derive_seed(seed, layer))
        radius = profile(azimuth)
        scans.append(numpy.column_stack([radius * numpy.cos(theta),
                                         radius * numpy.sin(theta),
                                         numpy.full(points_per_layer, layer * z_step)]))
    return PointCloud(numpy.concatenate(scans), OrderTag.exactly_sorted('z'))


def gen_sparse_dense(n, n_clusters=5, sparse_fraction=0.05, seed=0, cluster_std=0.05,
                     extent=10.0, cluster_extent=1.0):
    """
    Tight clusters inside a much larger, sparsely populated volume.

    ``round(sparse_fraction * n)`` points are spread uniformly over the cube
    ``[-extent, extent]^3``; the rest are split as evenly as possible between
    ``n_clusters`` normal clusters of deviation ``cluster_std`` whose centres
    lie in ``[-cluster_extent, cluster_extent]^3``. Points are stored in
    generation order: the sparse background first, then each cluster.
    """
    n = int(n)
    n_clusters = int(n_clusters)
    if not n >= n_clusters >= 1:
        raise PcsampleValueError(
            f'need n >= n_clusters >= 1; got n={n}, n_clusters={n_clusters}')
    if not 0.0 <= sparse_fraction <= 1.0:
        raise PcsampleValueError(
            f'sparse_fraction must lie in [0, 1]; got {sparse_fraction}')

    rng = make_rng(seed)
    n_sparse = int(round(sparse_fraction * n))
    n_dense = n - n_sparse
    background = rng.uniform(-extent, extent, (n_sparse, 3))
    centres = rng.uniform(-cluster_extent, cluster_extent, (n_clusters, 3))
    counts = numpy.full(n_clusters, n_dense // n_clusters)
    counts[:n_dense % n_clusters] += 1
    clusters = [rng.normal(centre, cluster_std, (count, 3))
                for centre, count in zip(centres, counts)]
    logger.debug('sparse/dense cloud: %d sparse, clusters %s', n_sparse, counts.tolist())
    return PointCloud(numpy.concatenate([background] + clusters))
