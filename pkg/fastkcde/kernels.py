"""Epanechnikov kernel in radial form, parameterized by the dimension of its space."""

import math

import numpy as np
import scipy.special


class KernelSpec():
    '''
    Radial Epanechnikov kernel c_d (1 - u^2) on the unit ball of R^dim.

    Parameters
    ----------
    dim : int
        Dimension of the space the kernel integrates over.

    Attributes
    ----------
    normalizer : float
        The constant c_d = Gamma(dim/2 + 1) (dim + 2) / (2 pi^(dim/2)) making the
        profile integrate to one over R^dim. For dim=1 this is 3/4.
    '''
    def __init__(self, dim=1):
        if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)):
            raise TypeError(f"dim must be an integer, got {dim!r}")
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self.normalizer = epanechnikov_normalizer(self.dim)

    def __repr__(self):
        return f"KernelSpec(dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, KernelSpec) and other.dim == self.dim

    def __hash__(self):
        return hash(("KernelSpec", self.dim))


def epanechnikov_normalizer(dim):
    return scipy.special.gamma(dim / 2 + 1) * (dim + 2) / (2 * math.pi ** (dim / 2))


def profile(spec, u):
    '''
    Radial profile c_d (1 - u^2) for u < 1, zero otherwise.

    Parameters
    ----------
    spec : KernelSpec
    u : float or array-like
        Non-negative radial argument(s).

    Returns
    -------
    float or np.ndarray
    '''
    u = np.asarray(u, dtype=float)
    values = np.where(u < 1, spec.normalizer * (1 - u * u), 0.0)
    if values.ndim == 0:
        return float(values)
    return values


def scaled_kernel(spec, distance, h):
    '''
    K_h(t) = h^(-dim) K(t / h), evaluated on a distance.

    Parameters
    ----------
    spec : KernelSpec
    distance : float or array-like
        Non-negative distance(s) between a query and a kernel center.
    h : float
        Bandwidth, strictly positive.

    Returns
    -------
    float or np.ndarray
        Zero wherever distance >= h.
    '''
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    return profile(spec, np.asarray(distance, dtype=float) / h) / h ** spec.dim


def kernel_bounds(spec, dist_min, dist_max, h):
    '''
    Bounds on scaled_kernel over every distance in [dist_min, dist_max].

    The profile is non-increasing, so the far end gives the lower bound
    and the near end the upper one.

    Returns
    -------
    (vmin, vmax) : tuple of float
    '''
    if dist_min > dist_max:
        raise ValueError(f"dist_min ({dist_min}) must not exceed dist_max ({dist_max})")
    return scaled_kernel(spec, dist_max, h), scaled_kernel(spec, dist_min, h)


def sample_1d(rng, size=None):
    '''
    Draws from the 1-d Epanechnikov density on [-1, 1].

    Uses the three-uniform construction: with U1, U2, U3 uniform on [-1, 1],
    return U2 if |U3| is the largest of the three magnitudes, else U3.

    Parameters
    ----------
    rng : numpy.random.Generator
    size : int or tuple, default=None
        None returns a single float.
    '''
    shape = (3,) if size is None else (3,) + tuple(int(s) for s in np.atleast_1d(size))
    u1, u2, u3 = rng.uniform(-1.0, 1.0, size=shape)
    take_u2 = (np.abs(u3) >= np.abs(u1)) & (np.abs(u3) >= np.abs(u2))
    draws = np.where(take_u2, u2, u3)
    if size is None:
        return float(draws)
    return draws
