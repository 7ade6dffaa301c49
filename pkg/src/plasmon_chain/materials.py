"""Metal permittivity, Froehlich resonance and nanoparticle chain parameters.

All frequencies are angular (rad/s) and all lengths are in metres. The
silver preset reproduces the Drude-type fit used for the chain studies:

>>> preset = load_preset("silver-palik-fit")
>>> round(float(permittivity(preset.permittivity, 5e15).real), 2)
-2.86
"""

from __future__ import annotations

import dataclasses
import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.constants
from scipy import optimize

from .errors import InvalidInputError, NumericalFailureError, WeakCouplingWarning

#: Reproduction default for the nanoparticle resonance.  The fitted silver
#: model's own Froehlich root sits near 5.30e15 rad/s; see ``frohlich_frequency``.
OMEGA_0_DEFAULT = 5e15

#: Weak-coupling bound as a fraction of omega_0.
WEAK_COUPLING_LIMIT = 0.1

MIN_RADIUS = 10e-9
_REL_SLACK = 1e-12


@dataclass(frozen=True)
class PermittivityModel:
    """Drude-type dielectric function ``eps_inf - wp^2/(w^2 + i w G) + i*offset``."""

    eps_inf: float
    omega_p: float
    gamma_drude: float
    imag_offset: float = 0.5

    def __post_init__(self):
        if not self.omega_p > 0:
            raise InvalidInputError(f"omega_p must be positive, got {self.omega_p}")
        if self.gamma_drude < 0:
            raise InvalidInputError(f"gamma_drude must be >= 0, got {self.gamma_drude}")
        if self.imag_offset < 0:
            raise InvalidInputError(f"imag_offset must be >= 0, got {self.imag_offset}")

    def __call__(self, omega):
        return permittivity(self, omega)


class Polarization(enum.Enum):
    """Dipole orientation relative to the chain axis; value is the relative coupling."""

    TRANSVERSE = 1.0
    LONGITUDINAL = -2.0

    @classmethod
    def parse(cls, text: str) -> "Polarization":
        key = text.strip().upper()
        aliases = {"T": "TRANSVERSE", "L": "LONGITUDINAL"}
        try:
            return cls[aliases.get(key, key)]
        except KeyError:
            raise InvalidInputError(f"unknown polarization {text!r}") from None


@dataclass(frozen=True)
class PhysicalConstants:
    e: float = scipy.constants.e
    eps_0: float = scipy.constants.epsilon_0
    c: float = scipy.constants.c
    v_F: float = 1.38e6
    lambda_B: float = 57e-9


@dataclass(frozen=True)
class MaterialGeometry:
    """Free-electron metal and point-dipole chain geometry.

    ``spacing >= 3 * radius`` and ``radius >= 10 nm`` are enforced on
    construction. The near-field condition needs omega_0 and is checked by
    :func:`near_field_ok`.
    """

    rho_el: float
    m_eff: float
    eps_d: float
    radius: float
    spacing: float
    polarization: Polarization = Polarization.LONGITUDINAL

    def __post_init__(self):
        if self.rho_el <= 0 or self.m_eff <= 0 or self.eps_d <= 0:
            raise InvalidInputError("rho_el, m_eff and eps_d must be positive")
        if self.radius < MIN_RADIUS * (1 - _REL_SLACK):
            raise InvalidInputError(
                f"radius {self.radius:g} m is below the 10 nm macroscopic limit")
        if self.spacing < 3 * self.radius * (1 - _REL_SLACK):
            raise InvalidInputError(
                f"spacing {self.spacing:g} m violates the point-dipole bound d >= 3R")


@dataclass(frozen=True)
class MaterialPreset:
    name: str
    permittivity: PermittivityModel
    rho_el: float
    m_eff: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def geometry(self, radius, spacing, eps_d=1.0,
                 polarization=Polarization.LONGITUDINAL) -> MaterialGeometry:
        return MaterialGeometry(self.rho_el, self.m_eff, eps_d, radius, spacing,
                                polarization)


_PRESETS = {
    "silver-palik-fit": MaterialPreset(
        name="silver-palik-fit",
        permittivity=PermittivityModel(eps_inf=5.0, omega_p=1.402e16,
                                       gamma_drude=6.25e13, imag_offset=0.5),
        rho_el=5.85e28,
        m_eff=8.7e-31,
        constants=PhysicalConstants(v_F=1.38e6, lambda_B=57e-9),
    ),
}
_ALIASES = {"silver": "silver-palik-fit", "ag": "silver-palik-fit"}


def preset_names():
    return sorted(_PRESETS) + sorted(_ALIASES)


def load_preset(name: str, **overrides) -> MaterialPreset:
    """Return a named material preset, optionally overriding individual fields.

    Overrides may target any field of the preset, of its
    :class:`PermittivityModel` (``eps_inf``, ``omega_p``, ``gamma_drude``,
    ``imag_offset``) or of its :class:`PhysicalConstants` (``v_F``, ...).
    """
    key = _ALIASES.get(name.lower(), name.lower())
    if key not in _PRESETS:
        raise InvalidInputError(f"unknown material preset {name!r}; "
                                f"available: {', '.join(preset_names())}")
    preset = _PRESETS[key]
    eps_fields = {f.name for f in dataclasses.fields(PermittivityModel)}
    const_fields = {f.name for f in dataclasses.fields(PhysicalConstants)}
    eps_kw = {k: v for k, v in overrides.items() if k in eps_fields}
    const_kw = {k: v for k, v in overrides.items() if k in const_fields}
    top_kw = {k: v for k, v in overrides.items()
              if k not in eps_fields and k not in const_fields}
    unknown = set(top_kw) - {"rho_el", "m_eff"}
    if unknown:
        raise InvalidInputError(f"unknown preset override(s): {sorted(unknown)}")
    return dataclasses.replace(
        preset,
        permittivity=dataclasses.replace(preset.permittivity, **eps_kw),
        constants=dataclasses.replace(preset.constants, **const_kw),
        **top_kw,
    )


def permittivity(model: PermittivityModel, omega):
    """Complex relative permittivity of the metal at angular frequency ``omega``."""
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise InvalidInputError("permittivity requires omega > 0")
    eps = (model.eps_inf - model.omega_p**2 / (w * w + 1j * w * model.gamma_drude)
           + 1j * model.imag_offset)
    return eps[()] if eps.ndim == 0 else eps


def frohlich_frequency(model: PermittivityModel, eps_d: float = 1.0) -> float:
    """Dipole resonance where Re eps_m(omega) = -2 eps_d, found by bisection.

    The bracket is (0.1, 1) * omega_p, which holds the dipole resonance of
    any Drude-like metal with a sensible background.
    """
    def residual(w):
        return float(np.real(permittivity(model, w))) + 2.0 * eps_d

    lo, hi = 0.1 * model.omega_p, model.omega_p
    if residual(lo) * residual(hi) > 0:
        raise NumericalFailureError(
            "no Froehlich root in (0.1*omega_p, omega_p) for this model")
    root = optimize.bisect(residual, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                           maxiter=400)
    if abs(residual(root)) > 1e-9 * eps_d:
        raise NumericalFailureError(f"bisection residual {residual(root):.3g} too large")
    return root


def interaction_frequency(geom: MaterialGeometry,
                          consts: PhysicalConstants = PhysicalConstants()) -> float:
    """Dipole-dipole interaction frequency omega_I of the point-dipole chain."""
    num = consts.e**2 * geom.rho_el * geom.radius**3
    den = 3.0 * geom.m_eff * consts.eps_0 * geom.eps_d * geom.spacing**3
    return float(np.sqrt(num / den))


def coupling_strength(omega_I: float, omega_0: float, polarization: Polarization) -> float:
    """Signed nearest-neighbour coupling ``g = omega_I**2 * gamma / (2 omega_0)``.

    Emits :class:`WeakCouplingWarning` when ``|g| > 0.1 omega_0``; the value is
    still returned.
    """
    if not omega_0 > 0:
        raise InvalidInputError("omega_0 must be positive")
    g = omega_I**2 * polarization.value / (2.0 * omega_0)
    if not weak_coupling_ok(g, omega_0):
        warnings.warn(f"|g| = {abs(g) / omega_0:.4f} omega_0 exceeds the weak-coupling "
                      f"bound {WEAK_COUPLING_LIMIT}", WeakCouplingWarning, stacklevel=2)
    return g


def weak_coupling_ok(g: float, omega_0: float) -> bool:
    return abs(g) <= WEAK_COUPLING_LIMIT * omega_0 * (1 + _REL_SLACK)


def near_field_ok(geom: MaterialGeometry, omega_0: float, c: float = scipy.constants.c) -> bool:
    """True when the spacing is below the free-space wavelength at omega_0."""
    return geom.spacing < 2 * np.pi * c / omega_0


def damping_rate(radius: float, consts: PhysicalConstants = PhysicalConstants()) -> float:
    """Matthiessen's rule with effective radius equal to the particle radius."""
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    return consts.v_F / consts.lambda_B + consts.v_F / radius
