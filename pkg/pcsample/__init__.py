"""
Farthest point sampling and its storage-order-aware variants for point clouds.

Subpackages: ``core`` (types and conventions), ``order``, ``synth``,
``sampler``, ``metrics``, ``formats``, ``bench`` and ``cli``.
"""
from ._version import __version__  # noqa: F401
