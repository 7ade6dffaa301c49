"""Effective wavenumber, band structure and group velocity of a finite chain.

The chain behaves as an effective waveguide of length ``(n + 1) d`` whose
transmission phase fixes a wavenumber up to multiples of ``2 pi / ((n+1) d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidInputError

#: Default tolerance on |v_G(w)/v_G(w_0) - 1| for "approximately linear" dispersion.
LINEAR_DISPERSION_TOLERANCE = 0.05

# Wrapped phase steps this close to pi cannot be unwrapped unambiguously.
_MAX_PHASE_STEP = 0.9 * np.pi


@dataclass(frozen=True)
class DispersionCurve:
    omegas: np.ndarray
    k_real: np.ndarray
    branch_index: int
    v_group: Optional[np.ndarray] = None
    omega_0: Optional[float] = None

    @property
    def scaled_group_velocity(self):
        if self.v_group is None or self.omega_0 is None:
            raise InvalidInputError("curve has no group velocity; call group_velocity first")
        return scaled_group_velocity(self.omegas, self.v_group, self.omega_0)


def effective_wavenumber(omegas, phases, n, d, omega_0, sign_choice=1) -> DispersionCurve:
    """Unwrapped effective wavenumber ``k = (arg T - sign*pi + 2 m pi) / ((n+1) d)``.

    The branch ``m`` puts ``k(omega_0)`` nearest to ``pi / (2 d)``, the
    band-centre value, which always lies in ``(0, pi/d]``. Because ``sign*pi``
    and ``2 m pi`` differ only by whole turns, ``sign_choice`` changes ``m``
    but never ``k``.
    """
    w = np.asarray(omegas, dtype=float)
    phi = np.asarray(phases, dtype=float)
    if w.ndim != 1 or w.shape != phi.shape or w.size < 2:
        raise InvalidInputError("omegas and phases must be matching 1-D arrays")
    if np.any(np.diff(w) <= 0):
        raise InvalidInputError("omegas must be strictly increasing")
    if sign_choice not in (1, -1):
        raise InvalidInputError("sign_choice must be +1 or -1")
    if not (w[0] <= omega_0 <= w[-1]):
        raise InvalidInputError("omega_0 must lie inside the frequency grid")
    steps = np.angle(np.exp(1j * np.diff(phi)))
    if np.any(np.abs(steps) >= _MAX_PHASE_STEP):
        raise InvalidInputError("phase step between samples too close to pi; refine the grid")

    length = (n + 1) * d
    unwrapped = phi[0] + np.concatenate(([0.0], np.cumsum(steps)))
    base = (unwrapped - sign_choice * np.pi) / length
    k0 = np.interp(omega_0, w, base)
    m = int(np.round((np.pi / (2 * d) - k0) * length / (2 * np.pi)))
    k = base + 2 * np.pi * m / length
    return DispersionCurve(omegas=w, k_real=k, branch_index=m, omega_0=omega_0)


def resonance_frequencies(n, omega_0, g, d):
    """The ``n`` transmission resonances ``(omega_rj, k_j)`` of a uniform chain."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    j = np.arange(1, n + 1)
    k = j * np.pi / ((n + 1) * d)
    return omega_0 + 2 * g * np.cos(k * d), k


def infinite_chain_dispersion(omega_0, g, d, k):
    return omega_0 + 2 * g * np.cos(np.asarray(k) * d)


def scaled_group_velocity(omegas, v_group, omega_0):
    v0 = np.interp(omega_0, omegas, v_group)
    if not np.isfinite(v0):
        # flat k at the centre: infinite velocity there counts as the reference
        return np.where(np.isinf(v_group), 1.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return v_group / v0


def group_velocity(curve: DispersionCurve) -> DispersionCurve:
    """Attach ``v_G = (dk/domega)^-1`` by finite differences along the grid.

    Second-order central differences inside, first-order one-sided at the
    ends. Samples with zero slope get ``inf``.
    """
    # offset first so a constant k differentiates to exactly zero
    dk = np.gradient(curve.k_real - curve.k_real[0], curve.omegas, edge_order=1)
    with np.errstate(divide="ignore"):
        v = np.where(dk == 0, np.inf, 1.0 / np.where(dk == 0, 1.0, dk))
    return replace(curve, v_group=v)


def linear_dispersion_bandwidth(curve: DispersionCurve,
                                tolerance=LINEAR_DISPERSION_TOLERANCE) -> float:
    """Half-width around omega_0 over which ``|v_G/v_G(omega_0) - 1| <= tolerance``.

    Walking outwards from omega_0, returns the offset of the last grid point
    before the first violation. Without any violation the result is the
    grid coverage ``min(omega_0 - omega_min, omega_max - omega_0)``.
    """
    if tolerance < 0:
        raise InvalidInputError("tolerance must be >= 0")
    if curve.v_group is None:
        curve = group_velocity(curve)
    w, w0 = curve.omegas, curve.omega_0
    ratio = curve.scaled_group_velocity
    coverage = min(w0 - w[0], w[-1] - w0)
    dist = np.abs(w - w0)
    bad = ~(np.abs(ratio - 1.0) <= tolerance)
    if not np.any(bad):
        return float(coverage)
    first_bad = dist[bad].min()
    good = dist[dist < first_bad]
    return float(min(good.max(), coverage)) if good.size else 0.0
