"""
Geometric quality of a sample set, and side-by-side comparison of samplers.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy
import pandas
from scipy.spatial.distance import cdist, pdist

from pcsample.core import PcsampleError, PcsampleValueError, cloud_digest, derive_seed
from pcsample.order import locality_score
from pcsample.sampler import sample

__all__ = ['coverage_radius', 'separation', 'QualityRow', 'QualityReport', 'compare']

logger = logging.getLogger(__name__)

# Rows of the point-to-sample distance matrix evaluated at once.
CHUNK_ROWS = 4096


def _sample_points(cloud, samples):
    samples = numpy.asarray(samples, dtype=numpy.int64).reshape(-1)
    if samples.size == 0:
        raise PcsampleValueError('sample set is empty')
    n = len(cloud)
    if samples.min() < 0 or samples.max() >= n:
        raise PcsampleValueError(f'sample indices must lie in [0, {n})')
    return cloud.points[samples]


def coverage_radius(cloud, samples):
    """
    Largest distance from any point of ``cloud`` to its nearest sample.

    Parameters
    ----------
    cloud : PointCloud
    samples : sequence of int
        Indices into ``cloud``; order and repeats do not matter.

    Returns
    -------
    radius : float
        In the units of the cloud. Lower is better.
    """
    chosen = _sample_points(cloud, samples)
    points = cloud.points
    worst = 0.0
    for start in range(0, len(points), CHUNK_ROWS):
        nearest = cdist(points[start:start + CHUNK_ROWS], chosen, 'sqeuclidean').min(axis=1)
        worst = max(worst, float(nearest.max()))
    return float(numpy.sqrt(worst))


def separation(cloud, samples):
    """Smallest pairwise distance between sampled points (0 for repeats)."""
    chosen = _sample_points(cloud, samples)
    if len(chosen) < 2:
        raise PcsampleValueError('separation needs at least 2 samples')
    return float(pdist(chosen).min())


@dataclass(frozen=True)
class QualityRow:
    """Aggregate of one sampler configuration over several trials."""
    method: str
    label: str
    c: int
    m: int
    k: int
    g: int
    trials: int
    coverage_radius: float
    coverage_radius_std: float
    separation: float
    separation_std: float
    dist_evals: float
    wall_seconds: float
    wall_seconds_std: float
    locality_score: float


@dataclass(frozen=True)
class QualityReport:
    """
    Rows of a :func:`compare` run, all measured on the cloud ``digest`` names.
    """
    digest: str
    rows: tuple

    def to_dataframe(self):
        columns = list(QualityRow.__dataclass_fields__)
        frame = pandas.DataFrame([asdict(row) for row in self.rows], columns=columns)
        frame.insert(0, 'digest', self.digest)
        # Parameters a method ignores are empty cells, not zeros.
        for name in ('m', 'k', 'g'):
            frame[name] = pandas.array(frame[name].tolist(), dtype='Int64')
        return frame

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False)
        return path

    def to_json(self, path=None):
        """Write (or, without ``path``, return) the report as one JSON object."""
        rows = json.loads(self.to_dataframe().drop(columns='digest').to_json(orient='records'))
        text = json.dumps({'digest': self.digest, 'rows': rows}, sort_keys=True)
        if path is None:
            return text
        with open(path, 'w', encoding='utf-8') as file:
            file.write(text + '\n')
        return path


def _trial(cloud, spec):
    result = sample(cloud, spec)
    radius = coverage_radius(cloud, result.indices)
    spread = separation(cloud, result.indices) if len(result) > 1 else numpy.nan
    return radius, spread, result.stats.dist_evals, result.wall_seconds


def compare(cloud, specs, trials=10, seed=None, workers=1, axis='x'):
    """
    Run every sampler spec on ``cloud`` and aggregate quality and cost.

    Parameters
    ----------
    cloud : PointCloud
    specs : sequence of SamplerSpec
    trials : int, optional
        Runs per spec. Trial ``t`` uses seed ``derive_seed(seed, t)``.
        Default 10.
    seed : int, optional
        Base seed of the trials. Defaults to each spec's own seed.
    workers : int, optional
        Threads to spread the trials of one spec over. Aggregation follows the
        trial index, so the report does not depend on it.
    axis : {'x', 'y', 'z'}, optional
        Axis the input ``locality_score`` is measured along.

    Returns
    -------
    report : QualityReport
        One row per spec, in the order given. Means and population standard
        deviations are taken over the trials.
    """
    trials = int(trials)
    if trials < 1:
        raise PcsampleValueError(f'trials must be >= 1; got {trials}')
    specs = list(specs)
    locality = locality_score(cloud, axis) if len(cloud) > 1 else numpy.nan
    rows = []
    for spec in specs:
        base = spec.seed if seed is None else seed
        trial_specs = [spec.with_seed(derive_seed(base, t)) for t in range(trials)]
        logger.info('comparing %s over %d trial(s)', spec.label, trials)
        try:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=int(workers)) as pool:
                    outcomes = list(pool.map(lambda s: _trial(cloud, s), trial_specs))
            else:
                outcomes = [_trial(cloud, s) for s in trial_specs]
        except PcsampleError as err:
            raise PcsampleValueError(f'{spec.label} failed: {err}') from err
        radius, spread, evals, seconds = (numpy.array(values, dtype=numpy.float64)
                                          for values in zip(*outcomes))
        m, k, g = spec.parameters()
        rows.append(QualityRow(
            method=spec.method.value, label=spec.label, c=spec.c, m=m, k=k, g=g,
            trials=trials,
            coverage_radius=float(radius.mean()),
            coverage_radius_std=float(radius.std()),
            separation=float(spread.mean()),
            separation_std=float(spread.std()),
            dist_evals=float(evals.mean()),
            wall_seconds=float(seconds.mean()),
            wall_seconds_std=float(seconds.std()),
            locality_score=locality))
    return QualityReport(cloud_digest(cloud), tuple(rows))
