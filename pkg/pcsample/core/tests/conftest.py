import numpy
import pytest

from pcsample.core import OrderTag, PointCloud


@pytest.fixture
def line_cloud():
    """Factory for clouds of points 0, 1, ... on the x axis."""
    def make(n=4, order_tag=None):
        points = numpy.zeros((n, 3))
        points[:, 0] = numpy.arange(n)
        return PointCloud(points, order_tag or OrderTag.exactly_sorted('x'))
    return make


@pytest.fixture
def random_cloud():
    """Factory for uniform clouds in [-1, 1]^3 drawn from ``seed``."""
    def make(n=64, seed=0, scale=1.0):
        rng = numpy.random.default_rng(seed)
        return PointCloud(rng.uniform(-scale, scale, (n, 3)))
    return make
