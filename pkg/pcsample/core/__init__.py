"""
Domain types shared by every pcsample subpackage.

This module owns the numeric conventions the samplers rely on: squared
Euclidean distance evaluated left-to-right in float64, lowest-index-wins
tie-breaking, and a portable seeded generator (numpy's PCG64) with per-sector
streams derived as ``seed ^ sector_id``.
"""
import enum
import hashlib
import logging
from collections import namedtuple
from dataclasses import dataclass, field, fields, replace

import numpy

logger = logging.getLogger(__name__)

AXES = ('x', 'y', 'z')
SEED_LIMIT = 2 ** 64


class PcsampleError(Exception):
    """Base class for every error raised by pcsample."""


class PcsampleValueError(PcsampleError, ValueError):
    """An argument violates a documented precondition."""


class InvalidCloudError(PcsampleValueError):
    """A cloud failed :func:`validate`."""

    def __init__(self, violation):
        self.violation = violation
        where = '' if violation.index is None else f' at index {violation.index}'
        super().__init__(f'invalid point cloud{where}: {violation.message}')


class InfeasibleQuotaError(PcsampleValueError):
    """A sector holds fewer points than the samples allocated to it."""


class CloudFormatError(PcsampleError):
    """A cloud file is malformed, truncated or empty."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = '' if path is None else f'{path}: '
        if line is not None:
            prefix += f'line {line}: '
        super().__init__(prefix + message)


def axis_name(axis):
    """Normalize ``axis`` (``'x'``, ``'y'``, ``'z'`` or 0-2) to its letter."""
    if isinstance(axis, str) and axis.lower() in AXES:
        return axis.lower()
    if isinstance(axis, (int, numpy.integer)) and 0 <= axis < 3:
        return AXES[int(axis)]
    raise PcsampleValueError(f'axis must be one of x, y, z; got {axis!r}')


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise PcsampleValueError(f'seed must lie in [0, 2**64); got {seed}')
    return seed


def make_rng(seed):
    """Return the generator every seeded operation draws from."""
    return numpy.random.Generator(numpy.random.PCG64(check_seed(seed)))


def sector_seed(seed, sector_id):
    """Seed of the independent stream owned by one sector."""
    return check_seed(seed) ^ int(sector_id)


def derive_seed(seed, index):
    """Derive the seed of trial (or batch element) ``index`` from ``seed``."""
    state = numpy.random.SeedSequence([check_seed(seed), int(index)])
    return int(state.generate_state(1, numpy.uint64)[0])


class OrderKind(str, enum.Enum):
    UNSORTED = 'unsorted'
    APPROX_SORTED = 'approx_sorted'
    EXACTLY_SORTED = 'exactly_sorted'


@dataclass(frozen=True)
class OrderTag:
    """
    Descriptive storage-order metadata of a :class:`PointCloud`.

    The tag is never trusted for correctness; :func:`validate` checks it
    against the coordinates and reports use it as a label.
    """
    kind: OrderKind = OrderKind.UNSORTED
    axis: str = None
    bin_size: int = None

    def __post_init__(self):
        kind = OrderKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        if kind is OrderKind.UNSORTED:
            if self.axis is not None or self.bin_size is not None:
                raise PcsampleValueError('an unsorted tag takes no axis or bin size')
            return
        object.__setattr__(self, 'axis', axis_name(self.axis))
        if kind is OrderKind.APPROX_SORTED:
            if self.bin_size is None or int(self.bin_size) < 1:
                raise PcsampleValueError('approx_sorted needs a bin size >= 1')
            object.__setattr__(self, 'bin_size', int(self.bin_size))
        elif self.bin_size is not None:
            raise PcsampleValueError('exactly_sorted takes no bin size')

    @classmethod
    def unsorted(cls):
        return cls(OrderKind.UNSORTED)

    @classmethod
    def approx_sorted(cls, axis, bin_size):
        return cls(OrderKind.APPROX_SORTED, axis, bin_size)

    @classmethod
    def exactly_sorted(cls, axis):
        return cls(OrderKind.EXACTLY_SORTED, axis)

    def __str__(self):
        if self.kind is OrderKind.UNSORTED:
            return 'unsorted'
        if self.kind is OrderKind.APPROX_SORTED:
            return f'approx_sorted({self.axis}, {self.bin_size})'
        return f'exactly_sorted({self.axis})'


class PointCloud:
    """
    An ordered cloud of N points in three dimensions.

    Coordinates are widened to 64-bit floats and stored read-only. The storage
    order is part of the data: sector partitioning and update windows are
    defined on indices, so two clouds holding the same points in a different
    order are different inputs.

    Parameters
    ----------
    points : array_like, shape (N, 3)
        Coordinates in meters.
    order_tag : OrderTag, optional
        Descriptive ordering metadata. Defaults to unsorted.
    """
    __slots__ = ('_points', '_columns', 'order_tag')

    def __init__(self, points, order_tag=None):
        points = numpy.array(points, dtype=numpy.float64)
        if points.size == 0:
            points = points.reshape(0, 3)
        if points.ndim != 2 or points.shape[1] != 3:
            raise PcsampleValueError(
                f'points must have shape (N, 3); got {points.shape}')
        points.setflags(write=False)
        columns = numpy.ascontiguousarray(points.T)
        columns.setflags(write=False)
        self._points = points
        self._columns = columns
        self.order_tag = OrderTag() if order_tag is None else order_tag

    @property
    def points(self):
        return self._points

    @property
    def columns(self):
        # Contiguous x, y and z rows; the samplers gather from these.
        return self._columns

    def coord(self, axis):
        return self._columns[AXES.index(axis_name(axis))]

    def permuted(self, order, order_tag=None):
        """Return a new cloud holding ``points[order]`` with ``order_tag``."""
        return PointCloud(self._points[numpy.asarray(order)], order_tag)

    def __len__(self):
        return len(self._points)

    def __repr__(self):
        return f'PointCloud(n={len(self)}, order_tag={self.order_tag})'


Violation = namedtuple('Violation', ['index', 'message'])
Violation.__doc__ = 'First invariant violation found by validate; index may be None.'


def validate(cloud):
    """
    Check every :class:`PointCloud` invariant, including the order tag.

    Returns
    -------
    violation : Violation or None
        ``None`` when the cloud is valid, otherwise the first violation found
        together with the offending index.
    """
    n = len(cloud)
    if n == 0:
        return Violation(None, 'cloud holds no points')
    finite = numpy.isfinite(cloud.points).all(axis=1)
    if not finite.all():
        return Violation(int(numpy.argmin(finite)), 'coordinate is NaN or infinite')

    tag = cloud.order_tag
    if tag.kind is OrderKind.EXACTLY_SORTED:
        values = cloud.coord(tag.axis)
        drops = numpy.flatnonzero(values[1:] < values[:-1])
        if drops.size:
            return Violation(int(drops[0]) + 1,
                             f'{tag.axis} decreases under {tag}')
    elif tag.kind is OrderKind.APPROX_SORTED:
        values = cloud.coord(tag.axis)
        starts = numpy.arange(0, n, tag.bin_size)
        highs = numpy.maximum.reduceat(values, starts)
        lows = numpy.minimum.reduceat(values, starts)
        overlaps = numpy.flatnonzero(lows[1:] < highs[:-1])
        if overlaps.size:
            j = int(overlaps[0])
            start = int(starts[j + 1])
            stop = min(start + tag.bin_size, n)
            offset = int(numpy.argmax(values[start:stop] < highs[j]))
            return Violation(start + offset,
                             f'bin {j + 1} reaches below bin {j} under {tag}')
    return None


def check_cloud(cloud):
    """Raise :class:`InvalidCloudError` unless ``cloud`` validates."""
    violation = validate(cloud)
    if violation is not None:
        raise InvalidCloudError(violation)
    return cloud


def squared_dist(a, b):
    """Squared Euclidean distance between two coordinate triples."""
    dx = float(a[0]) - float(b[0])
    dy = float(a[1]) - float(b[1])
    dz = float(a[2]) - float(b[2])
    return dx * dx + dy * dy + dz * dz


def cloud_digest(cloud):
    """SHA-256 hex digest over the float64 coordinates and the order tag."""
    sha = hashlib.sha256()
    sha.update(numpy.ascontiguousarray(cloud.points, dtype='<f8').tobytes())
    sha.update(str(cloud.order_tag).encode('utf-8'))
    return sha.hexdigest()


class Method(str, enum.Enum):
    RPS = 'rps'
    FPS = 'fps'
    AFPS = 'afps'
    NPDU_FPS = 'npdu-fps'
    NPDU_AFPS = 'npdu-afps'
    GRID_VOXEL = 'grid'

    @property
    def uses_sectors(self):
        return self in (Method.AFPS, Method.NPDU_AFPS)

    @property
    def uses_window(self):
        return self in (Method.NPDU_FPS, Method.NPDU_AFPS)


class SeedPolicy(str, enum.Enum):
    RANDOM_FIRST_POINT = 'random'
    FIXED_FIRST_POINT = 'fixed'


@dataclass(frozen=True)
class SamplerSpec:
    """
    Which sampler to run and with which parameters.

    Parameters
    ----------
    method : Method or str
        One of ``rps``, ``fps``, ``afps``, ``npdu-fps``, ``npdu-afps``, ``grid``.
    c : int
        Number of points to sample.
    m : int, optional
        Sector count, used by the AFPS variants. Default 1.
    k : int, optional
        Update-window size, used by the NPDU variants. Default 8.
    g : int, optional
        Grid resolution per dimension, used by ``grid``. Default 40.
    seed : int, optional
        64-bit seed. Default 0.
    seed_policy : SeedPolicy or str, optional
        ``random`` draws each sector's first point, ``fixed`` starts every
        sector at its first stored point. Default ``random``.
    """
    method: Method
    c: int
    m: int = 1
    k: int = 8
    g: int = 40
    seed: int = 0
    seed_policy: SeedPolicy = SeedPolicy.RANDOM_FIRST_POINT

    def __post_init__(self):
        object.__setattr__(self, 'method', Method(self.method))
        object.__setattr__(self, 'seed_policy', SeedPolicy(self.seed_policy))
        for name in ('c', 'm', 'k', 'g'):
            value = int(getattr(self, name))
            if value < 1:
                raise PcsampleValueError(f'{name} must be >= 1; got {value}')
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'seed', check_seed(self.seed))

    def validate_for(self, n):
        """Check the cloud-dependent preconditions for a cloud of ``n`` points."""
        if self.c > n:
            raise PcsampleValueError(
                f'cannot sample c={self.c} points from a cloud of {n}')
        if self.method.uses_sectors:
            if self.m > self.c:
                raise PcsampleValueError(
                    f'sector count m={self.m} exceeds sample count c={self.c}')
        return self

    @property
    def label(self):
        if self.method is Method.AFPS:
            return f'afps(m={self.m})'
        if self.method is Method.NPDU_FPS:
            return f'npdu-fps(k={self.k})'
        if self.method is Method.NPDU_AFPS:
            return f'npdu-afps(m={self.m},k={self.k})'
        if self.method is Method.GRID_VOXEL:
            return f'grid(g={self.g})'
        return self.method.value

    def parameters(self):
        """The (m, k, g) triple with parameters the method ignores set to None."""
        return (self.m if self.method.uses_sectors else None,
                self.k if self.method.uses_window else None,
                self.g if self.method is Method.GRID_VOXEL else None)

    def as_dict(self):
        return {'method': self.method.value, 'c': self.c, 'm': self.m,
                'k': self.k, 'g': self.g, 'seed': self.seed,
                'seed_policy': self.seed_policy.value}

    @classmethod
    def from_mapping(cls, mapping):
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in mapping.items()
                      if key in known})

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass(frozen=True)
class OpStats:
    """Exact operation counters of one sampler run."""
    dist_evals: int = 0
    dist_writes: int = 0
    argmax_scans: int = 0
    iterations: int = 0

    def __add__(self, other):
        return OpStats(self.dist_evals + other.dist_evals,
                       self.dist_writes + other.dist_writes,
                       self.argmax_scans + other.argmax_scans,
                       self.iterations + other.iterations)

    def as_dict(self):
        return {'dist_evals': self.dist_evals, 'dist_writes': self.dist_writes,
                'argmax_scans': self.argmax_scans, 'iterations': self.iterations}


@dataclass(frozen=True)
class SampleResult:
    """
    Sampled indices in sampling order, with their sector of origin.

    ``wall_seconds`` is filled in by :func:`pcsample.sampler.sample`, which
    times the sampler call; direct sampler calls leave it as ``None``.
    """
    indices: numpy.ndarray
    sector_of: numpy.ndarray
    stats: OpStats = field(default_factory=OpStats)
    wall_seconds: float = None

    def __post_init__(self):
        indices = numpy.array(self.indices, dtype=numpy.int64)
        sector_of = numpy.array(self.sector_of, dtype=numpy.int64)
        if indices.shape != sector_of.shape or indices.ndim != 1:
            raise PcsampleValueError('indices and sector_of must be parallel 1-D sequences')
        indices.setflags(write=False)
        sector_of.setflags(write=False)
        object.__setattr__(self, 'indices', indices)
        object.__setattr__(self, 'sector_of', sector_of)

    def __len__(self):
        return len(self.indices)

    def take(self, cloud):
        """Return the sampled points of ``cloud`` as a new cloud."""
        in_storage_order = bool(numpy.all(numpy.diff(self.indices) > 0))
        tag = cloud.order_tag if in_storage_order else OrderTag.unsorted()
        if tag.kind is OrderKind.APPROX_SORTED:
            # Bins of the source are not bins of the subset.
            tag = OrderTag.unsorted()
        return cloud.permuted(self.indices, tag)


class DistanceTrack:
    """
    Per-point minimum squared distance to the sampled set.

    One row per sector, padded to the widest sector; every row starts at
    +infinity and only ever decreases. Rows are private to one sampling run.
    """

    def __init__(self, sizes):
        self._sizes = numpy.asarray(sizes, dtype=numpy.int64)
        self.rows = numpy.full((len(self._sizes), int(self._sizes.max())), numpy.inf)

    def sector(self, s):
        return self.rows[s, :self._sizes[s]]

    @property
    def d(self):
        """Storage-order copy of the tracked distances."""
        return numpy.concatenate([self.sector(s) for s in range(len(self._sizes))])
