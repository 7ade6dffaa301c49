"""Surface-plasmon dispersion of the source/drain nanowire and of a flat interface.

The fundamental TM (m = 0) mode of a metal cylinder of radius R in a
dielectric satisfies

    eps_m/kappa_m * I1(k0 kappa_m R)/I0(k0 kappa_m R)
        + eps_d/kappa_d * K1(k0 kappa_d R)/K0(k0 kappa_d R) = 0,

with ``kappa = sqrt(n^2 - eps)`` and effective index ``n``. The tapered wire
is represented by its tip-region radius only.

Modified Bessel functions of order 0 and 1 are evaluated here for complex
arguments:

* ``|z| <= 12``: power series. For K with ``Re z > 0``, ``|z| > 2`` and
  ``|arg z| <= 75 deg`` the series loses too many digits to cancellation and
  the integral ``K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt`` is summed
  by the trapezoid rule instead (geometric convergence, error < 1e-15).
* ``|z| > 12``: Hankel asymptotic expansion truncated at its smallest term
  (relative error ~ exp(-2|z|) < 4e-11).
* ``Re z < 0``: reflected onto the right half plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.constants

from .errors import (BesselRangeError, InvalidInputError, ModeNotBoundError,
                     NumericalFailureError, SingularityError)
from .materials import PermittivityModel, permittivity

SERIES_RADIUS = 12.0
MAX_ARGUMENT = 700.0
_K_INTEGRAL_MIN = 2.0
_K_INTEGRAL_MAX_ARG = np.deg2rad(75.0)
_EULER_GAMMA = 0.5772156649015329

RESIDUAL_TOLERANCE = 1e-9
MAX_ITERATIONS = 200
#: Newton steps longer than this fraction of |n| are scaled back.
NEWTON_DAMPING = 0.25


# modified Bessel functions ---------------------------------------------------

def _i_series(nu, z):
    q = z * z / 4
    term = (z / 2) ** nu / math.factorial(nu)
    total = term
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + nu))
        total += term
        if abs(term) <= 1e-17 * abs(total) or k > 200:
            return total


def _k_series(nu, z, i_val):
    q = z * z / 4
    log_term = np.log(z / 2)
    if nu == 0:
        term, harmonic, total = 1.0 + 0j, 0.0, 0j
        k = 0
        while True:
            total += term * harmonic
            k += 1
            harmonic += 1.0 / k
            term *= q / (k * k)
            if abs(term * harmonic) <= 1e-17 * max(abs(total), 1e-300) or k > 200:
                break
        return -(log_term + _EULER_GAMMA) * i_val + total
    # nu == 1: psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
    term, h_k, total = 1.0 + 0j, 0.0, 0j
    k = 0
    while True:
        psi_sum = -2 * _EULER_GAMMA + h_k + h_k + 1.0 / (k + 1)
        total += term * psi_sum
        k += 1
        h_k += 1.0 / k
        term *= q / (k * (k + 1))
        if abs(term * psi_sum) <= 1e-17 * max(abs(total), 1e-300) or k > 200:
            break
    return 1 / z + log_term * i_val - z / 4 * total


def _k_integral(nu, z):
    h = 0.02
    t_max = 1.0
    # extend until the integrand is below double precision relative to its start
    while z.real * (math.cosh(t_max) - 1) - nu * t_max < 45.0:
        t_max += 0.5
    t = np.arange(0.0, t_max + h, h)
    f = np.exp(-z * (np.cosh(t) - 1)) * np.cosh(nu * t)
    return np.exp(-z) * h * (f.sum() - 0.5 * f[0] - 0.5 * f[-1])


def _asymptotic_terms(nu, z, sign):
    """Sum of ``sign^k a_k(nu) / z^k`` down to the smallest term."""
    mu = 4 * nu * nu
    term, total = 1.0 + 0j, 1.0 + 0j
    prev = math.inf
    for k in range(1, 200):
        term = term * sign * (mu - (2 * k - 1) ** 2) / (k * 8 * z)
        if abs(term) >= prev:
            break
        total += term
        prev = abs(term)
        if prev <= 1e-17 * abs(total):
            break
    return total


def _i_right(nu, z):
    """I_nu for Re z >= 0."""
    if abs(z) <= SERIES_RADIUS:
        return _i_series(nu, z)
    pref = 1 / np.sqrt(2 * np.pi * z)
    val = np.exp(z) * pref * _asymptotic_terms(nu, z, -1)
    # exponentially small companion, relevant near the imaginary axis
    s = 1 if z.imag >= 0 else -1
    val += s * 1j * (-1) ** nu * np.exp(-z) * pref * _asymptotic_terms(nu, z, 1)
    return val


def _k_right(nu, z):
    """K_nu for Re z > 0 (or on the imaginary axis)."""
    r = abs(z)
    if r > SERIES_RADIUS:
        return np.sqrt(np.pi / (2 * z)) * np.exp(-z) * _asymptotic_terms(nu, z, 1)
    if r > _K_INTEGRAL_MIN and abs(np.angle(z)) <= _K_INTEGRAL_MAX_ARG:
        return _k_integral(nu, z)
    return _k_series(nu, z, _i_series(nu, z))


def modified_bessel(order: int, kind: str, z) -> complex:
    """Modified Bessel function ``I_order(z)`` or ``K_order(z)``, principal branch.

    Parameters
    ----------
    order : {0, 1}
    kind : {"I", "K"}
    z : complex
        ``|z| <= 700``; ``z != 0`` for K.
    """
    if order not in (0, 1):
        raise InvalidInputError(f"order must be 0 or 1, got {order!r}")
    kind = str(kind).upper()
    if kind not in ("I", "K"):
        raise InvalidInputError(f"kind must be 'I' or 'K', got {kind!r}")
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInputError("z must be finite")
    if abs(z) > MAX_ARGUMENT:
        raise BesselRangeError(f"|z| = {abs(z):.4g} exceeds {MAX_ARGUMENT:g}")
    if kind == "I":
        if z == 0:
            return complex(1.0 if order == 0 else 0.0)
        if z.real < 0:
            return complex((-1) ** order * _i_right(order, -z))
        return complex(_i_right(order, z))
    if z == 0:
        raise SingularityError("K_nu(z) is singular at z = 0")
    if z.real >= 0:
        return complex(_k_right(order, z))
    # K_n(w e^{+-i pi}) = (-1)^n K_n(w) -+ i pi I_n(w), w = -z in the right half plane
    w = -z
    s = 1 if z.imag >= 0 else -1
    return complex((-1) ** order * _k_right(order, w) - s * 1j * np.pi * _i_right(order, w))


# dispersion relations ----------------------------------------------------------

@dataclass(frozen=True)
class WireGeometry:
    radius: float
    eps_d: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError(f"radius must be positive, got {self.radius!r}")
        if not self.eps_d > 0:
            raise InvalidInputError(f"eps_d must be positive, got {self.eps_d!r}")


def _eps_m(model, omega):
    if isinstance(model, PermittivityModel):
        return complex(permittivity(model, omega))
    return complex(model)


def photon_line(omega, eps_d=1.0, c=scipy.constants.c):
    """Light-line wavenumber ``sqrt(eps_d) omega / c`` in rad/m."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise InvalidInputError("omega must be >= 0")
    if not eps_d > 0:
        raise InvalidInputError("eps_d must be positive")
    k = np.sqrt(eps_d) * w / c
    return k[()] if k.ndim == 0 else k


def flat_interface_spp(model, eps_d, omega, c=scipy.constants.c):
    """Surface-plasmon wavenumber at a flat metal/dielectric interface.

    ``k = (omega/c) sqrt(eps_m eps_d / (eps_m + eps_d))`` on the principal
    branch (``Re k >= 0``). ``model`` is a :class:`PermittivityModel` or a
    fixed complex permittivity.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise InvalidInputError("omega must be positive")
    if not eps_d > 0:
        raise InvalidInputError("eps_d must be positive")
    eps_m = permittivity(model, w) if isinstance(model, PermittivityModel) \
        else np.full(w.shape, complex(model))
    denom = np.asarray(eps_m + eps_d)
    if np.any(denom == 0):
        raise SingularityError("eps_m = -eps_d: surface-plasmon resonance pole")
    k = w / c * np.sqrt(eps_m * eps_d / denom)
    return k[()] if np.ndim(k) == 0 else k


def wire_residual(n_eff, geom: WireGeometry, eps_m, omega, c=scipy.constants.c):
    """Left-hand side of the m = 0 wire dispersion relation at index ``n_eff``."""
    k0 = omega / c
    kap_m = np.sqrt(n_eff * n_eff - eps_m)
    kap_d = np.sqrt(n_eff * n_eff - geom.eps_d)
    xm = k0 * kap_m * geom.radius
    xd = k0 * kap_d * geom.radius
    metal = eps_m / kap_m * modified_bessel(1, "I", xm) / modified_bessel(0, "I", xm)
    diel = geom.eps_d / kap_d * modified_bessel(1, "K", xd) / modified_bessel(0, "K", xd)
    return complex(metal + diel)


def wire_effective_index(geom: WireGeometry, model, omega, initial_guess,
                         c=scipy.constants.c) -> complex:
    """Effective index of the fundamental wire mode by damped complex Newton.

    The derivative is a central difference in the complex plane. Steps longer
    than ``NEWTON_DAMPING * |n|`` are shortened. The iterate must stay a
    bound mode (``Re n > sqrt(eps_d)``).
    """
    if not omega > 0:
        raise InvalidInputError("omega must be positive")
    eps_m = _eps_m(model, omega)
    bound = np.sqrt(geom.eps_d)
    n = complex(initial_guess)
    if not n.real > bound:
        raise InvalidInputError("initial guess must satisfy Re n_eff > sqrt(eps_d)")

    def f(x):
        return wire_residual(x, geom, eps_m, omega, c)

    for _ in range(MAX_ITERATIONS):
        r = f(n)
        if abs(r) <= RESIDUAL_TOLERANCE:
            return n
        h = 1e-7 * abs(n)
        deriv = (f(n + h) - f(n - h)) / (2 * h)
        if deriv == 0 or not np.isfinite(deriv):
            raise NumericalFailureError("vanishing derivative in wire-mode Newton iteration")
        step = -r / deriv
        limit = NEWTON_DAMPING * abs(n)
        if abs(step) > limit:
            step *= limit / abs(step)
        n = n + step
        if not n.real > bound:
            raise ModeNotBoundError(f"iteration left the bound-mode region (n = {n:.6g})")
    raise NumericalFailureError(f"no convergence in {MAX_ITERATIONS} Newton iterations")


def wire_dispersion(geom: WireGeometry, model, omegas, initial_guess=None,
                    c=scipy.constants.c):
    """Effective indices along increasing ``omegas`` by warm-started continuation.

    The default start is just right of the light line, ``1.2 sqrt(eps_d)``,
    which suits a long-wavelength first frequency.
    """
    w = np.asarray(omegas, dtype=float)
    if w.ndim != 1 or w.size < 1 or np.any(np.diff(w) <= 0):
        raise InvalidInputError("omegas must be a strictly increasing 1-D sequence")
    guess = complex(1.2 * np.sqrt(geom.eps_d)) if initial_guess is None else initial_guess
    out = np.empty(w.size, dtype=complex)
    for i, om in enumerate(w):
        guess = out[i] = wire_effective_index(geom, model, om, guess, c)
    return out
