import numpy
import pytest

from pcsample.core import OrderTag, PcsampleValueError, validate
from pcsample.metrics import coverage_radius
from pcsample.order import locality_score, windowed_locality_score
from pcsample.sampler import fps, rps
from pcsample.synth import RangeProfile, gen_scanning_lidar, gen_sparse_dense, gen_stepper_lidar


def test_narrow_sweep_at_constant_range_is_sorted_in_x():
    cloud = gen_scanning_lidar(2048, fov_deg=90, range_profile=RangeProfile.constant(10.0))
    assert numpy.all(numpy.diff(cloud.coord('x')) > 0)
    assert locality_score(cloud, 'x') == 0.0
    assert cloud.order_tag == OrderTag.unsorted()


@pytest.mark.parametrize('fov', [30, 90, 120, 180])
@pytest.mark.parametrize('seed', range(5))
def test_limited_sweeps_have_x_locality(fov, seed):
    cloud = gen_scanning_lidar(2048, fov_deg=fov, seed=seed)
    assert locality_score(cloud, 'x') <= 0.05


def test_full_sweep_has_only_local_x_locality():
    cloud = gen_scanning_lidar(2048, fov_deg=360, seed=4)
    assert abs(locality_score(cloud, 'x') - 0.5) < 0.05
    assert windowed_locality_score(cloud, 'x', window=64) < 0.1


def test_scan_elevation_fan():
    cloud = gen_scanning_lidar(8, range_profile=RangeProfile.constant(10.0),
                               elevations_deg=(0.0, 45.0))
    numpy.testing.assert_allclose(cloud.coord('z'), [0, 10] * 4, atol=1e-12)


def test_scan_minimal_and_invalid():
    assert len(gen_scanning_lidar(2, fov_deg=360, jitter=0.5, seed=1)) == 2
    for fov in (0, -10, 361):
        with pytest.raises(PcsampleValueError):
            gen_scanning_lidar(16, fov_deg=fov)
    with pytest.raises(PcsampleValueError):
        gen_scanning_lidar(1)


def test_generators_are_deterministic():
    for generate in (lambda seed: gen_scanning_lidar(256, jitter=0.01, seed=seed),
                     lambda seed: gen_stepper_lidar(4, 16, seed=seed),
                     lambda seed: gen_sparse_dense(200, seed=seed)):
        numpy.testing.assert_array_equal(generate(3).points, generate(3).points)
        assert not numpy.array_equal(generate(3).points, generate(4).points)


def test_stepper_layers():
    cloud = gen_stepper_lidar(3, 2, z_step=1.0)
    numpy.testing.assert_array_equal(cloud.coord('z'), [0, 0, 1, 1, 2, 2])
    assert cloud.order_tag == OrderTag.exactly_sorted('z')
    assert validate(cloud) is None
    single = gen_stepper_lidar(1, 32, seed=8)
    assert numpy.all(single.coord('z') == 0)
    assert validate(single) is None


@pytest.mark.parametrize('seed', range(10))
def test_stepper_output_validates(seed):
    assert validate(gen_stepper_lidar(64, 32, seed=seed)) is None


def test_stepper_rejects_bad_arguments():
    with pytest.raises(PcsampleValueError):
        gen_stepper_lidar(0, 4)
    with pytest.raises(PcsampleValueError):
        gen_stepper_lidar(2, 4, z_step=-1)


def test_range_profile():
    assert RangeProfile.constant(3.0)(numpy.arange(5)).tolist() == [3.0] * 5
    profile = RangeProfile(base=10.0, objects=((350.0, 20.0, 4.0),))
    assert profile(355.0) == 4.0
    assert profile(5.0) == 4.0
    assert profile(20.0) == 10.0
    drawn = RangeProfile.random(5)
    assert drawn == RangeProfile.random(5)
    assert numpy.all(drawn(numpy.linspace(0, 360, 1000)) > 0)
    pinned = RangeProfile.random(5, depth=(0.5, 0.5))
    assert [distance for _, _, distance in pinned.objects] == [6.0] * 3


@pytest.mark.parametrize('seed', range(30))
def test_default_scan_objects_are_shallow(seed):
    # Sectors of equal point count then hold about equal lengths of surface.
    cloud = gen_scanning_lidar(2048, seed=seed)
    radius = numpy.hypot(cloud.coord('x'), cloud.coord('y'))
    assert radius.min() >= 0.8 * radius.max()
    assert all(0.85 * 12.0 <= distance <= 0.95 * 12.0
               for _, _, distance in RangeProfile.random(seed).objects)


def test_sparse_dense_extremes():
    clustered = gen_sparse_dense(500, sparse_fraction=0.0, seed=2)
    assert numpy.abs(clustered.points).max() < 1.5
    uniform = gen_sparse_dense(500, sparse_fraction=1.0, seed=2)
    assert numpy.abs(uniform.points).max() <= 10.0
    assert numpy.abs(uniform.points).max() > 5.0
    with pytest.raises(PcsampleValueError):
        gen_sparse_dense(3, n_clusters=5)
    with pytest.raises(PcsampleValueError):
        gen_sparse_dense(100, sparse_fraction=1.5)


def test_sparse_dense_stores_background_first():
    cloud = gen_sparse_dense(1000, sparse_fraction=0.05, seed=0)
    assert len(cloud) == 1000
    assert numpy.abs(cloud.points[:50]).max() > 3.0
    assert numpy.abs(cloud.points[50:]).max() < 1.5


def test_fps_covers_sparse_regions_better_than_rps():
    fps_radius, rps_radius = [], []
    for seed in range(20):
        cloud = gen_sparse_dense(1000, n_clusters=5, sparse_fraction=0.05, seed=seed)
        fps_radius.append(coverage_radius(cloud, fps(cloud, 64, seed=seed).indices))
        rps_radius.append(coverage_radius(cloud, rps(cloud, 64, seed=seed).indices))
    assert numpy.mean(fps_radius) < numpy.mean(rps_radius)
