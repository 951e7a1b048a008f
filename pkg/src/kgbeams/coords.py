"""Coordinate conventions (natural units, hbar = c = 1).

Light-cone times are ``t_plus = t + z`` and ``t_minus = t - z``; the transverse
plane is carried by ``x_plus = x + iy`` and ``x_minus = x - iy``.

A :class:`SpacetimePoint` may hold scalars or numpy arrays of a common
broadcastable shape; in the latter case it represents a point set and every
field in the package evaluates it elementwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("t", "x", "y", "z"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite coordinate {name}={getattr(self, name)!r}")

    @property
    def shape(self) -> tuple:
        return np.broadcast(self.t, self.x, self.y, self.z).shape

    def arrays(self):
        """Return ``(t, x, y, z)`` as broadcast float arrays."""
        return tuple(np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in
                                           (self.t, self.x, self.y, self.z))))

    def __getitem__(self, idx) -> "SpacetimePoint":
        t, x, y, z = self.arrays()
        return SpacetimePoint(t[idx], x[idx], y[idx], z[idx])

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (float(self.t), float(self.x), float(self.y), float(self.z))


@dataclass(frozen=True)
class LightConeCoords:
    t_plus: float
    t_minus: float
    x_plus: complex
    x_minus: complex
    rho: float
    phi: float


@dataclass(frozen=True)
class OffSliceTransverse:
    """Independent complex transverse variables.

    On real points ``x_minus == conj(x_plus)``; here the two are free, which is
    what derivatives with respect to each of them require.
    """

    x_plus: complex
    x_minus: complex

    def __post_init__(self):
        if not (np.all(np.isfinite(self.x_plus)) and np.all(np.isfinite(self.x_minus))):
            raise ValueError("non-finite off-slice transverse coordinate")


def azimuth(x, y):
    """Azimuth in [0, 2pi); defined as 0 on the axis."""
    phi = np.arctan2(y, x)
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    # arctan2 of a tiny negative y can round up to exactly 2pi
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    phi = np.where((np.asarray(x) == 0.0) & (np.asarray(y) == 0.0), 0.0, phi)
    return phi[()] if np.ndim(phi) == 0 else phi


def to_lightcone(p: SpacetimePoint) -> LightConeCoords:
    t, x, y, z = (p.t, p.x, p.y, p.z)
    x_plus = np.asarray(x) + 1j * np.asarray(y)
    rho = np.hypot(x, y)
    return LightConeCoords(
        t_plus=t + z,
        t_minus=t - z,
        x_plus=x_plus[()] if np.ndim(x_plus) == 0 else x_plus,
        x_minus=np.conj(x_plus)[()] if np.ndim(x_plus) == 0 else np.conj(x_plus),
        rho=rho,
        phi=azimuth(x, y),
    )


def from_cylindrical(rho, phi, z, t) -> SpacetimePoint:
    if np.any(np.asarray(rho) < 0):
        raise ValueError(f"rho must be non-negative, got {rho!r}")
    return SpacetimePoint(t=t, x=rho * np.cos(phi), y=rho * np.sin(phi), z=z)
