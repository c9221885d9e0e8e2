from pcsample.core.tests.conftest import line_cloud, random_cloud  # noqa
