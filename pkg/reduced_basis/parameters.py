"""
Box-shaped parameter spaces.

A parameter is a plain float64 vector; the space knows its admissible
interval per component and how to sample training and test sets from it.
"""
import itertools
import logging

import numpy as np

from .exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


class ParameterSpace:
    """Cartesian product of closed intervals ``[low_i, high_i]``."""

    def __init__(self, dim, low, high, names=None):
        if dim < 1:
            raise InvalidArgumentError(f"Parameter dimension must be positive, got {dim}")
        self.dim = int(dim)
        self.low = np.broadcast_to(np.asarray(low, dtype=float), (self.dim,)).copy()
        self.high = np.broadcast_to(np.asarray(high, dtype=float), (self.dim,)).copy()
        if np.any(self.low > self.high):
            raise InvalidArgumentError("Lower parameter bounds must not exceed upper bounds")
        self.names = tuple(names) if names is not None else tuple(f"mu_{i}" for i in range(self.dim))
        if len(self.names) != self.dim:
            raise InvalidArgumentError(f"Got {len(self.names)} component names for dimension {self.dim}")

    def __repr__(self):
        ranges = ', '.join(f"{name}=[{lo:g}, {hi:g}]" for name, lo, hi in zip(self.names, self.low, self.high))
        return f"ParameterSpace({ranges})"

    def contains(self, mu):
        mu = np.asarray(mu, dtype=float)
        return mu.shape == (self.dim,) and bool(np.all(mu >= self.low) and np.all(mu <= self.high))

    def parse(self, mu):
        """Return ``mu`` as a float vector, raising if it is not admissible."""
        mu = np.asarray(mu, dtype=float)
        if mu.shape != (self.dim,):
            raise InvalidArgumentError(f"Expected {self.dim} parameter components, got shape {mu.shape}")
        if not np.all(np.isfinite(mu)):
            raise InvalidArgumentError(f"Parameter {mu.tolist()} has non-finite components")
        if not self.contains(mu):
            outside = ', '.join(
                f"{name}={value:g} not in [{lo:g}, {hi:g}]"
                for name, value, lo, hi in zip(self.names, mu, self.low, self.high)
                if not lo <= value <= hi
            )
            raise InvalidArgumentError(f"Parameter outside admissible box: {outside}")
        return mu

    def sample_uniformly(self, points_per_axis):
        """
        Tensor grid with equidistant points per axis, endpoints included.

        Parameters are returned in lexicographic order of the per-axis
        indices (last component varies fastest).
        """
        if points_per_axis < 2:
            raise InvalidArgumentError(f"Need at least 2 points per axis, got {points_per_axis}")
        axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in zip(self.low, self.high)]
        return [np.array(point) for point in itertools.product(*axes)]

    def sample_randomly(self, count, seed=0):
        """
        I.i.d. uniform samples.

        The seed to parameter map is fixed by numpy's ``default_rng(seed)``
        (PCG64 bit generator) drawing one ``(count, dim)`` block with
        ``Generator.uniform``, so a seed reproduces the same list for a
        given numpy release.
        """
        if count < 1:
            raise InvalidArgumentError(f"Sample count must be at least 1, got {count}")
        rng = np.random.default_rng(seed)
        samples = rng.uniform(self.low, self.high, size=(count, self.dim))
        logger.debug(f"Drew {count} random parameters with seed {seed}")
        return [row.copy() for row in samples]
