import json

import numpy
import pytest
from hypothesis import given, settings, strategies as st

from pcsample.core import PcsampleValueError, PointCloud, SamplerSpec, cloud_digest
from pcsample.core.tests.strategies import clouds, clouds_with_count
from pcsample.metrics import QualityReport, compare, coverage_radius, separation
from pcsample.order import bin_approx_sort, shuffle
from pcsample.sampler import fps
from pcsample.synth import gen_scanning_lidar, gen_sparse_dense


def test_coverage_radius(line_cloud):
    cloud = line_cloud(4)
    assert coverage_radius(cloud, [0, 1, 2, 3]) == 0.0
    assert coverage_radius(cloud, [0, 3]) == 1.0
    assert coverage_radius(cloud, [0]) == 3.0
    with pytest.raises(PcsampleValueError):
        coverage_radius(cloud, [])
    with pytest.raises(PcsampleValueError):
        coverage_radius(cloud, [4])


def test_coverage_radius_spans_chunks():
    points = numpy.zeros((10000, 3))
    points[:, 2] = numpy.arange(10000)
    assert coverage_radius(PointCloud(points), [0]) == 9999.0


def test_separation(line_cloud):
    cloud = line_cloud(4)
    assert separation(cloud, [0, 3]) == 3.0
    assert separation(cloud, [3, 1, 0]) == 1.0
    doubled = PointCloud(numpy.zeros((2, 3)))
    assert separation(doubled, [0, 1]) == 0.0
    with pytest.raises(PcsampleValueError):
        separation(cloud, [2])


@settings(max_examples=100, deadline=None)
@given(clouds(min_size=2, max_size=200), st.data())
def test_coverage_never_worsens_under_union(cloud, data):
    indices = st.lists(st.integers(0, len(cloud) - 1), min_size=1, max_size=20)
    first, second = data.draw(indices), data.draw(indices)
    union = first + second
    assert coverage_radius(cloud, union) <= coverage_radius(cloud, first)
    permuted = data.draw(st.permutations(union))
    assert coverage_radius(cloud, permuted) == coverage_radius(cloud, union)
    if len(union) > 1:
        assert separation(cloud, permuted) == separation(cloud, union)


@settings(max_examples=100, deadline=None)
@given(clouds_with_count(min_size=2, max_size=256))
def test_greedy_prefixes_separate_at_least_their_coverage(cloud_and_count):
    cloud, c = cloud_and_count
    indices = fps(cloud, max(c, 2)).indices
    for prefix in range(2, len(indices) + 1):
        radius = coverage_radius(cloud, indices[:prefix])
        spread = separation(cloud, indices[:prefix])
        assert radius <= spread * (1 + 1e-12) + 1e-12


def test_compare_records_stats(line_cloud):
    cloud = line_cloud(16)
    specs = [SamplerSpec('fps', 4, seed_policy='fixed'), SamplerSpec('rps', 4)]
    report = compare(cloud, specs, trials=1, seed=3)
    assert report.digest == cloud_digest(cloud)
    fps_row, rps_row = report.rows
    assert (fps_row.method, rps_row.method) == ('fps', 'rps')
    assert fps_row.dist_evals == 3 * 16
    assert rps_row.dist_evals == 0
    assert fps_row.coverage_radius == 3.0
    assert fps_row.coverage_radius_std == 0.0
    assert fps_row.locality_score == 0.0
    assert fps_row.trials == 1


def test_compare_is_deterministic(random_cloud):
    cloud = random_cloud(200, seed=2)
    spec = SamplerSpec('npdu-afps', 32, m=4, k=8, seed=5)
    one, two = compare(cloud, [spec, spec], trials=3).rows
    timing = {'wall_seconds', 'wall_seconds_std'}
    strip = lambda row: {k: v for k, v in vars(row).items() if k not in timing}  # noqa: E731
    assert strip(one) == strip(two)
    threaded = compare(cloud, [spec], trials=3, workers=3).rows[0]
    assert strip(threaded) == strip(one)


def test_compare_names_failing_spec(random_cloud):
    cloud = random_cloud(20, seed=0)
    with pytest.raises(PcsampleValueError, match=r'afps\(m=8\)'):
        compare(cloud, [SamplerSpec('fps', 4), SamplerSpec('afps', 4, m=8)], trials=1)
    with pytest.raises(PcsampleValueError):
        compare(cloud, [SamplerSpec('fps', 4)], trials=0)


def test_compare_prefers_sorted_input_for_afps():
    scan = gen_scanning_lidar(2048, seed=1)
    spec = SamplerSpec('afps', 512, m=8)
    binned = compare(bin_approx_sort(scan, 'x', 128, seed=1), [spec], trials=20, seed=0)
    shuffled = compare(shuffle(scan, seed=1), [spec], trials=20, seed=0)
    assert binned.rows[0].coverage_radius < shuffled.rows[0].coverage_radius


def test_report_serialization(tmp_path, line_cloud):
    cloud = line_cloud(8)
    specs = [SamplerSpec('fps', 1), SamplerSpec('grid', 4, g=40),
             SamplerSpec('npdu-afps', 4, m=2, k=4)]
    report = compare(cloud, specs, trials=2)
    assert isinstance(report, QualityReport)
    frame = report.to_dataframe()
    assert list(frame['method']) == ['fps', 'grid', 'npdu-afps']
    assert frame['g'].tolist()[1] == 40
    assert set(frame['digest']) == {report.digest}

    report.to_csv(tmp_path / 'report.csv')
    header = (tmp_path / 'report.csv').read_text().splitlines()[0].split(',')
    assert header[:3] == ['digest', 'method', 'label']

    document = json.loads(report.to_json())
    assert document['digest'] == report.digest
    first, grid, local = document['rows']
    assert first['m'] is None and first['separation'] is None
    assert grid['g'] == 40 and grid['k'] is None
    assert (local['m'], local['k']) == (2, 4)
    report.to_json(tmp_path / 'report.json')
    assert json.loads((tmp_path / 'report.json').read_text()) == document


def test_compare_ranks_baselines_on_sparse_dense_clouds():
    cloud = gen_sparse_dense(2000, n_clusters=5, sparse_fraction=0.05, seed=7)
    specs = [SamplerSpec('rps', 64), SamplerSpec('fps', 64), SamplerSpec('grid', 64, g=40),
             SamplerSpec('npdu-afps', 64, m=4, k=8)]
    radius = {row.method: row.coverage_radius for row in compare(cloud, specs).rows}
    assert radius['fps'] == min(radius.values())
    assert radius['rps'] == max(radius.values())
