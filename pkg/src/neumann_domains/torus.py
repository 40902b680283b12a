"""Geometry helpers for the flat torus with fundamental domain [0, 2*pi)^2."""

import numpy as np

PERIOD = 2.0 * np.pi


def wrap(x):
    """Reduce coordinates into the fundamental domain [0, 2*pi)."""
    return np.mod(x, PERIOD)


def delta(a, b):
    """Shortest displacement vector from a to b on the torus.

    Components are in (-pi, pi].  Broadcasts over leading axes.
    """
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return d - PERIOD * np.round(d / PERIOD)


def dist(a, b):
    """Torus distance |delta(a, b)| along the last axis."""
    return np.linalg.norm(delta(a, b), axis=-1)


def nearest_lift(x, ref):
    """Translate x by multiples of the period so it lands nearest to ref."""
    x = np.asarray(x, dtype=float)
    return x + PERIOD * np.round((np.asarray(ref, dtype=float) - x) / PERIOD)


def pairwise_dist(points, centers):
    """Torus distances between each row of points (N,2) and centers (M,2) -> (N, M)."""
    d = points[:, None, :] - centers[None, :, :]
    d -= PERIOD * np.round(d / PERIOD)
    return np.linalg.norm(d, axis=-1)
