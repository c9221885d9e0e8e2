"""
Point cloud files and sampling artifacts.

Two cloud formats are supported, both preserving storage order exactly:

``xyz_text``
    One point per line, three whitespace-separated decimal reals. Blank lines
    and ``#`` comments are ignored.
``f32_bin``
    Little-endian 32-bit reals, 12 bytes per point, no header.
"""
import json
import logging
import warnings
from collections import defaultdict
from pathlib import Path

import numpy

from pcsample.core import CloudFormatError, PcsampleValueError, PointCloud, cloud_digest

__all__ = ['FORMATS', 'infer_format', 'read_cloud', 'write_cloud', 'read_indices',
           'write_indices', 'stats_record', 'export', 'Serializer',
           'get_prefixed_filename']

logger = logging.getLogger(__name__)

FORMATS = ('xyz_text', 'f32_bin')
_SUFFIXES = {'.xyz': 'xyz_text', '.txt': 'xyz_text', '.bin': 'f32_bin', '.f32': 'f32_bin'}
_EXTENSIONS = {'xyz_text': '.xyz', 'f32_bin': '.bin'}
_FLOAT32_MAX = float(numpy.finfo(numpy.float32).max)


def infer_format(path, format=None):
    """Return ``format`` if given, otherwise guess it from the file suffix."""
    if format is not None:
        if format not in FORMATS:
            raise PcsampleValueError(f'format must be one of {FORMATS}; got {format!r}')
        return format
    suffix = Path(path).suffix.lower()
    try:
        return _SUFFIXES[suffix]
    except KeyError:
        raise PcsampleValueError(
            f'cannot infer a cloud format from {str(path)!r}; pass one of {FORMATS}')


def read_cloud(path, format=None):
    """
    Read a point cloud file.

    Parameters
    ----------
    path : str or Path
    format : {'xyz_text', 'f32_bin'}, optional
        Inferred from the suffix when omitted (``.xyz``/``.txt`` and
        ``.bin``/``.f32``).

    Returns
    -------
    cloud : PointCloud
        Tagged unsorted; order is data, so the file order is kept as is.

    Raises
    ------
    CloudFormatError
        For a malformed line (with its line number), a truncated binary file or
        a file without points.
    """
    path = Path(path)
    format = infer_format(path, format)
    if format == 'f32_bin':
        raw = path.read_bytes()
        if len(raw) % 12:
            raise CloudFormatError(
                f'{len(raw)} bytes is not a whole number of 12-byte points; '
                'the file is truncated', path)
        points = numpy.frombuffer(raw, dtype='<f4').reshape(-1, 3)
    else:
        points = _parse_text(path)
    if len(points) == 0:
        raise CloudFormatError('file holds no points', path)
    logger.debug('read %d points from %s (%s)', len(points), path, format)
    return PointCloud(points)


def _parse_text(path):
    rows = []
    with open(path, 'rb') as file:
        for line_number, raw in enumerate(file, start=1):
            try:
                line = raw.decode('utf-8')
            except UnicodeDecodeError:
                raise CloudFormatError('not UTF-8 text', path, line_number) from None
            fields = line.split('#', 1)[0].split()
            if not fields:
                continue
            if len(fields) != 3:
                raise CloudFormatError(
                    f'expected 3 coordinates, found {len(fields)}', path, line_number)
            try:
                rows.append([float(value) for value in fields])
            except ValueError:
                raise CloudFormatError(f'not a number in {line.strip()!r}', path,
                                       line_number)
    return numpy.array(rows, dtype=numpy.float64).reshape(-1, 3)


def write_cloud(cloud, path, format=None):
    """
    Write ``cloud`` in storage order.

    ``xyz_text`` is written with 17 significant digits, so reading it back
    gives the same 64-bit values. ``f32_bin`` narrows to 32 bits; values
    beyond the 32-bit range become infinite and a warning is issued.
    """
    path = Path(path)
    format = infer_format(path, format)
    points = cloud.points
    if format == 'f32_bin':
        if numpy.any(numpy.abs(points) > _FLOAT32_MAX):
            warnings.warn(f'coordinates of {path} overflow the 32-bit range and '
                          'are written as infinities')
        with numpy.errstate(over='ignore'):
            path.write_bytes(points.astype('<f4').tobytes())
    else:
        numpy.savetxt(path, points, fmt='%.17g')
    logger.debug('wrote %d points to %s (%s)', len(points), path, format)
    return path


def write_indices(indices, path):
    """Write one index per line, in the given order."""
    path = Path(path)
    path.write_text(''.join(f'{int(i)}\n' for i in indices), encoding='utf-8')
    return path


def read_indices(path):
    return numpy.loadtxt(path, dtype=numpy.int64, ndmin=1)


def stats_record(result):
    """The stats JSON object of one sampler run."""
    record = result.stats.as_dict()
    record['wall_seconds'] = result.wall_seconds
    return record


def export(items, directory, file_prefix='{digest:.8}-', cloud_format='f32_bin'):
    """
    Export clouds, sampling results and reports to files.

    This creates, under ``directory``:

    * ``<file_prefix>cloud.bin`` (or ``.xyz``) for a ``'cloud'`` item,
    * ``<file_prefix><label>-indices.txt`` and ``<file_prefix><label>-stats.json``
      for a ``'sample'`` item,
    * ``<file_prefix>report.csv`` and ``<file_prefix>report.json`` for a
      ``'report'`` item.

    Parameters
    ----------
    items : iterable
        Expected to yield ``(name, obj)`` pairs; see :class:`Serializer`.
    directory : str or Path
        Output directory, created if missing. Use ``''`` for the current
        working directory.
    file_prefix : str, optional
        The first part of every file name. It is formatted with ``{digest}``,
        the SHA-256 of the cloud (or of the report's cloud), and ``{method}``,
        the sampler label of a sample item (empty otherwise). The default
        ``'{digest:.8}-'`` keeps artifacts of different inputs apart.
    cloud_format : {'f32_bin', 'xyz_text'}, optional

    Returns
    -------
    artifacts : dict
        Maps labels (``'cloud'``, ``'indices'``, ``'stats'``, ``'report'``) to
        lists of file paths.

    Examples
    --------

    Write a cloud and its FPS sample next to each other.

    >>> export([('cloud', cloud), ('sample', (spec, result))], 'out/')

    Name files after the sampler instead of the cloud.

    >>> export(items, 'out/', '{method}-')
    """
    with Serializer(directory, file_prefix, cloud_format=cloud_format) as serializer:
        for item in items:
            serializer(*item)

    return serializer.artifacts


class Serializer:
    """
    Route ``(name, obj)`` pairs to files.

    ``'cloud'``
        A :class:`~pcsample.core.PointCloud`. It must come first when samples
        follow, because their file names use its digest. Only one cloud is
        accepted per serializer.
    ``'sample'``
        A ``(SamplerSpec, SampleResult)`` pair; writes the index list and the
        stats JSON.
    ``'report'``
        A :class:`~pcsample.metrics.QualityReport`; writes CSV and JSON.

    Parameters
    ----------
    directory : str or Path
    file_prefix : str, optional
        See :func:`export`.
    cloud_format : {'f32_bin', 'xyz_text'}, optional
    """

    def __init__(self, directory, file_prefix='{digest:.8}-', cloud_format='f32_bin'):
        self._directory = Path(directory)
        self._file_prefix = file_prefix
        self._cloud_format = infer_format('', cloud_format)
        self._digest = None
        self._artifacts = defaultdict(list)
        self._closed = False

    @property
    def artifacts(self):
        return dict(self._artifacts)

    def __call__(self, name, obj):
        if self._closed:
            raise RuntimeError('this Serializer is closed')
        handler = getattr(self, f'_{name}', None)
        if handler is None:
            raise PcsampleValueError(f'unknown artifact kind {name!r}')
        handler(obj)

    def _reserve(self, label, filename):
        path = self._directory / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        self._artifacts[label].append(path)
        return path

    def _cloud(self, cloud):
        if self._digest is not None:
            raise RuntimeError(
                'a Serializer writes the artifacts of one cloud only; '
                'a second cloud was sent to it')
        self._digest = cloud_digest(cloud)
        filename = get_prefixed_filename(self._file_prefix, self._digest, '', 'cloud',
                                         _EXTENSIONS[self._cloud_format])
        write_cloud(cloud, self._reserve('cloud', filename), self._cloud_format)

    def _sample(self, pair):
        if self._digest is None:
            raise RuntimeError('send the cloud before its samples')
        spec, result = pair
        filename = get_prefixed_filename(self._file_prefix, self._digest, spec.label,
                                         f'{spec.label}-indices', '.txt')
        write_indices(result.indices, self._reserve('indices', filename))
        filename = get_prefixed_filename(self._file_prefix, self._digest, spec.label,
                                         f'{spec.label}-stats', '.json')
        record = dict(stats_record(result), **spec.as_dict())
        self._reserve('stats', filename).write_text(
            json.dumps(record, sort_keys=True) + '\n', encoding='utf-8')

    def _report(self, report):
        if self._digest is not None and report.digest != self._digest:
            raise PcsampleValueError('the report was measured on a different cloud')
        for extension, write in (('.csv', report.to_csv), ('.json', report.to_json)):
            filename = get_prefixed_filename(self._file_prefix, report.digest, '',
                                             'report', extension)
            write(self._reserve('report', filename))

    def close(self):
        self._closed = True

    def __enter__(self):
        return self

    def __exit__(self, *exception_details):
        self.close()


def get_prefixed_filename(file_prefix, digest, method, name, extension):
    '''Assemble the prefixed filename.'''
    templated_file_prefix = file_prefix.format(digest=digest, method=method)
    return f'{templated_file_prefix}{name}{extension}'
