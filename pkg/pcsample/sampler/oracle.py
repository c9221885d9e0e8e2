"""
Naive farthest point sampling, kept deliberately free of numpy tricks.

Used only to cross-check the vectorized engine.
"""
from pcsample.core import PcsampleValueError


def oracle_fps(cloud, c, first_index):
    """
    Plain double-loop farthest point sampling from ``first_index``.

    Returns
    -------
    indices : list of int
        Samples in greedy order.
    """
    points = [tuple(p) for p in cloud.points.tolist()]
    n = len(points)
    c = int(c)
    if not 1 <= c <= n:
        raise PcsampleValueError(f'sample count must lie in [1, {n}]; got {c}')
    if not 0 <= first_index < n:
        raise PcsampleValueError(f'first_index must lie in [0, {n}); got {first_index}')

    distance = [float('inf')] * n
    sampled = [False] * n
    order = [int(first_index)]
    sampled[first_index] = True
    while len(order) < c:
        ax, ay, az = points[order[-1]]
        for j in range(n):
            bx, by, bz = points[j]
            dx = bx - ax
            dy = by - ay
            dz = bz - az
            dist = dx * dx + dy * dy + dz * dz
            if dist <= distance[j]:
                distance[j] = dist
        best = None
        for j in range(n):
            if sampled[j]:
                continue
            if best is None or distance[j] > distance[best]:
                best = j
        order.append(best)
        sampled[best] = True
    return order
