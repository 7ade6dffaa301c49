"""Two-plasmon interference at the chain and nonlinear absorption.

One plasmon enters from the source and one from the drain with joint
spectral amplitude ``psi(w_s, w_d)``. Each input scatters through the
chain's (R, T) coefficients; whatever is not reflected or transmitted goes
into the bath operators ``F_s``, ``F_d``. Those are not independent: their
cross commutator is ``-(T_d^* R_s + R_d^* T_s)``, which is where the
interference enters the loss probabilities.

Outcome labels are ``p<source count><drain count>``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from .errors import (InvalidInputError, NumericalFailureError, UnimodalityWarning)
from .fidelity import GaussianWavepacket, simpson_weights, worker_count, GRID_HALF_WIDTH
from .materials import WEAK_COUPLING_LIMIT
from .scattering import ChainConfig, ScatteringCoefficients, solve_scattering

NORM_TOLERANCE = 1e-8
IMAG_TOLERANCE = 1e-10
PRESCAN_POINTS = 64
DEFAULT_BRACKET = (1e-3, 1.0)


@dataclass(frozen=True)
class JointAmplitude:
    """Two-plasmon spectral amplitude tabulated on a common frequency grid.

    ``values[i, j] = psi(omegas[i], omegas[j])`` with the first argument the
    source plasmon's frequency.
    """

    omegas: np.ndarray
    values: np.ndarray
    kind: str = "grid"

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (w.size, w.size):
            raise InvalidInputError("joint amplitude must be square over the frequency grid")
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "values", v)
        norm = self.norm
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidInputError(f"joint amplitude norm {norm:.12g} is not 1")

    @property
    def weights(self):
        q = simpson_weights(self.omegas)
        return np.outer(q, q)

    @property
    def norm(self):
        return float(np.sum(self.weights * np.abs(self.values) ** 2))

    @classmethod
    def grid(cls, omegas, values):
        return cls(omegas, values, "grid")

    @classmethod
    def product(cls, xi_s, xi_d, omegas=None, points=401):
        """Separable amplitude ``xi_s(w_s) xi_d(w_d)``.

        Profiles are :class:`GaussianWavepacket` instances or callables. Without
        an explicit grid one is built covering +-8 sigma of both packets.
        """
        if omegas is None:
            packets = [p for p in (xi_s, xi_d) if isinstance(p, GaussianWavepacket)]
            if len(packets) != 2:
                raise InvalidInputError("pass omegas unless both profiles are Gaussian packets")
            lo = min(p.center - GRID_HALF_WIDTH * p.sigma for p in packets)
            hi = max(p.center + GRID_HALF_WIDTH * p.sigma for p in packets)
            omegas = np.linspace(lo, hi, points)
        w = np.asarray(omegas, dtype=float)
        return cls(w, np.outer(xi_s(w), xi_d(w)), "product")


class TwoPlasmonProbabilities(NamedTuple):
    p20: float
    p02: float
    p11: float
    p10: float
    p01: float
    p00: float

    @property
    def p_survive(self):
        """``(P0, P1, P2)``: probabilities that zero, one or two plasmons survive."""
        return (self.p00, self.p10 + self.p01, self.p20 + self.p02 + self.p11)

    @property
    def P0(self):
        return self.p00

    @property
    def P1(self):
        return self.p10 + self.p01

    @property
    def P2(self):
        return self.p20 + self.p02 + self.p11

    @property
    def total(self):
        return float(sum(self))


def overlap_integral(psi: JointAmplitude) -> float:
    """``I = int int psi(w, w') psi^*(w', w)``; real for any amplitude."""
    val = np.sum(psi.weights * psi.values * np.conj(psi.values.T))
    if abs(val.imag) > IMAG_TOLERANCE:
        raise NumericalFailureError(f"overlap integral has imaginary part {val.imag:.3g}")
    return float(val.real)


def _check_flux(r, t, label):
    s = abs(r) ** 2 + abs(t) ** 2
    if s > 1 + 1e-12:
        raise InvalidInputError(f"|R|^2 + |T|^2 = {s!r} > 1 for the {label} input")


def joint_probabilities_flat(R, T, I, R_d=None, T_d=None) -> TwoPlasmonProbabilities:
    """Detection probabilities for frequency-independent coefficients.

    ``R``, ``T`` belong to the source input; the drain input's coefficients
    default to the same values (equal port couplings).
    """
    R_s, T_s = complex(R), complex(T)
    R_d = R_s if R_d is None else complex(R_d)
    T_d = T_s if T_d is None else complex(T_d)
    _check_flux(R_s, T_s, "source")
    _check_flux(R_d, T_d, "drain")
    if not -1 - 1e-12 <= I <= 1 + 1e-12:
        raise InvalidInputError(f"overlap integral must lie in [-1, 1], got {I!r}")
    L_s = 1 - abs(R_s) ** 2 - abs(T_s) ** 2
    L_d = 1 - abs(R_d) ** 2 - abs(T_d) ** 2
    C = np.conj(T_d) * R_s + np.conj(R_d) * T_s
    rr_tt = (R_s * R_d * np.conj(T_s * T_d)).real
    p20 = abs(R_s * T_d) ** 2 * (1 + I)
    p02 = abs(T_s * R_d) ** 2 * (1 + I)
    p11 = abs(R_s * R_d) ** 2 + abs(T_s * T_d) ** 2 + 2 * rr_tt * I
    p10 = abs(R_s) ** 2 * L_d + abs(T_d) ** 2 * L_s - 2 * (np.conj(R_s) * T_d * C).real * I
    p01 = abs(T_s) ** 2 * L_d + abs(R_d) ** 2 * L_s - 2 * (np.conj(T_s) * R_d * C).real * I
    p00 = L_s * L_d + abs(C) ** 2 * I
    return TwoPlasmonProbabilities(*(float(x) for x in (p20, p02, p11, p10, p01, p00)))


def joint_probabilities_exact(psi: JointAmplitude,
                              coeffs: ScatteringCoefficients) -> TwoPlasmonProbabilities:
    """Detection probabilities with frequency-dependent coefficients, by 2-D Simpson.

    ``coeffs`` must be sampled on ``psi.omegas``.
    """
    w = np.atleast_1d(coeffs.omega)
    if w.shape != psi.omegas.shape or not np.allclose(w, psi.omegas, rtol=1e-12, atol=0):
        raise InvalidInputError("coefficients must be sampled on the joint-amplitude grid")
    Rs, Ts, Rd, Td = (np.atleast_1d(c) for c in (coeffs.r_s, coeffs.t_s, coeffs.r_d, coeffs.t_d))
    Ls = 1 - np.abs(Rs) ** 2 - np.abs(Ts) ** 2
    Ld = 1 - np.abs(Rd) ** 2 - np.abs(Td) ** 2
    C = np.conj(Td) * Rs + np.conj(Rd) * Ts
    W = psi.weights
    P = psi.values          # psi(w_i, w_j)
    Pt = P.T                # psi(w_j, w_i)
    col = np.newaxis

    def integ(f):
        return float(np.sum(W * f).real)

    p20 = 0.5 * integ(np.abs(P * Rs[:, col] * Td[col, :] + Pt * Rs[col, :] * Td[:, col]) ** 2)
    p02 = 0.5 * integ(np.abs(P * Ts[:, col] * Rd[col, :] + Pt * Ts[col, :] * Rd[:, col]) ** 2)
    p11 = integ(np.abs(P * Rs[:, col] * Rd[col, :] + Pt * Ts[col, :] * Td[:, col]) ** 2)
    cross = np.conj(P) * Pt
    p10 = integ(np.abs(P) ** 2 * (np.abs(Rs) ** 2)[:, col] * Ld[col, :]
                + np.abs(Pt) ** 2 * (np.abs(Td) ** 2)[:, col] * Ls[col, :]
                - 2 * (cross * (np.conj(Rs) * Td)[:, col] * C[col, :]).real)
    p01 = integ(np.abs(P) ** 2 * (np.abs(Ts) ** 2)[:, col] * Ld[col, :]
                + np.abs(Pt) ** 2 * (np.abs(Rd) ** 2)[:, col] * Ls[col, :]
                - 2 * (cross * (np.conj(Ts) * Rd)[:, col] * C[col, :]).real)
    # the bath cross term pairs C at the drain frequency with C^* at the source one
    p00 = integ(np.abs(P) ** 2 * Ls[:, col] * Ld[col, :]
                + (cross * np.conj(C)[:, col] * C[col, :]).real)
    return TwoPlasmonProbabilities(p20, p02, p11, p10, p01, p00)


# optimisation ----------------------------------------------------------------

def _reference_coupling(template: ChainConfig) -> float:
    if template.couplings:
        return max(abs(g) for g in template.couplings)
    return WEAK_COUPLING_LIMIT * min(template.local_freqs)


def _coefficients(template, g, omega):
    c = solve_scattering(template.with_ports(g), omega)
    return c.r_s, c.t_s, c.r_d, c.t_d


def probabilities_at(template: ChainConfig, g_in, omega, I=1.0) -> TwoPlasmonProbabilities:
    """Flat-coefficient probabilities for ``g_in = g_out`` at a single frequency."""
    r_s, t_s, r_d, t_d = _coefficients(template, g_in, omega)
    return joint_probabilities_flat(r_s, t_s, I, R_d=r_d, T_d=t_d)


def _bounds(template, bounds):
    g_ref = _reference_coupling(template)
    if bounds is None:
        bounds = (DEFAULT_BRACKET[0] * g_ref, DEFAULT_BRACKET[1] * g_ref)
    lo, hi = map(float, bounds)
    if not 0 < lo < hi <= g_ref * (1 + 1e-12):
        raise InvalidInputError(f"bounds must satisfy 0 < lo < hi <= {g_ref:g}")
    return lo, hi


def _golden_minimum(f, lo, hi, xtol):
    """Pre-scan then golden-section search around the lowest interior dip.

    P1 also tends to zero at the weak-coupling end, where the chain simply
    reflects both plasmons, so the scan looks for interior local minima
    rather than the global one. Without any interior dip the better
    endpoint is returned with a :class:`UnimodalityWarning`.
    """
    xs = np.linspace(lo, hi, PRESCAN_POINTS)
    fs = np.array([f(x) for x in xs])
    dips = np.flatnonzero((fs[1:-1] < fs[:-2]) & (fs[1:-1] <= fs[2:])) + 1
    if dips.size == 0:
        warnings.warn("no interior minimum in the pre-scan; returning the best endpoint",
                      UnimodalityWarning, stacklevel=3)
        return xs[0] if fs[0] <= fs[-1] else xs[-1]
    k = dips[np.argmin(fs[dips])]
    res = optimize.minimize_scalar(f, bracket=(xs[k - 1], xs[k], xs[k + 1]), method="golden",
                                   options={"xtol": xtol / max(abs(xs[k]), 1e-300)})
    x = float(res.x)
    if not xs[k - 1] <= x <= xs[k + 1] or f(x) > fs[k]:
        x = xs[k]
    return x


def balance_coupling(template: ChainConfig, omega, bounds=None, xtol=None):
    """``g_in = g_out`` at which ``|R|^2 = |T|^2``, by Brent's method on a sign change."""
    lo, hi = _bounds(template, bounds)
    g_ref = _reference_coupling(template)

    def diff(g):
        r, t, _, _ = _coefficients(template, g, omega)
        return abs(r) ** 2 - abs(t) ** 2

    xs = np.linspace(lo, hi, PRESCAN_POINTS)
    ds = np.array([diff(x) for x in xs])
    change = np.flatnonzero(np.sign(ds[:-1]) * np.sign(ds[1:]) <= 0)
    if change.size == 0:
        raise NumericalFailureError("|R|^2 - |T|^2 does not change sign inside the bounds")
    k = change[0]
    return optimize.brentq(diff, xs[k], xs[k + 1], xtol=xtol or 1e-14 * g_ref, rtol=1e-15)


def minimize_one_plasmon_loss(template: ChainConfig, omega=None, bounds=None, I=1.0):
    """Minimise the one-plasmon survival probability over ``g_in = g_out``.

    Returns ``(g_opt, probabilities)``. For a lossless chain P1 vanishes for
    every coupling, so the balanced coupling ``|R|^2 = |T|^2`` is returned
    instead when it exists inside the bounds, otherwise the upper bound.
    """
    if omega is None:
        omega = float(np.mean(template.local_freqs))
    lo, hi = _bounds(template, bounds)
    xtol = 1e-8 * _reference_coupling(template)
    if template.lossless:
        try:
            g = balance_coupling(template, omega, (lo, hi))
        except NumericalFailureError:
            # e.g. odd n on resonance, where |T| = 1 for every coupling
            warnings.warn("lossless chain without a balanced coupling in the bounds; "
                          "P1 vanishes for every coupling, returning the upper bound",
                          UnimodalityWarning, stacklevel=2)
            g = hi
    else:
        g = _golden_minimum(lambda x: probabilities_at(template, x, omega, I).P1, lo, hi, xtol)
    return g, probabilities_at(template, g, omega, I)


class LossSweepRow(NamedTuple):
    gamma: float
    g_opt: float
    P0: float
    P1: float
    P2: float
    R2: float
    T2: float


def loss_sweep(template: ChainConfig, gamma_grid, omega=None, bounds=None, I=1.0,
               workers: Optional[int] = None):
    """Minimal one-plasmon loss and its coupling for each damping rate in ``gamma_grid``."""
    gammas = np.asarray(gamma_grid, dtype=float)
    if gammas.ndim != 1 or gammas.size < 1:
        raise InvalidInputError("gamma_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(gammas) <= 0) or gammas[0] < 0:
        raise InvalidInputError("gamma_grid must be non-negative and strictly increasing")
    if omega is None:
        omega = float(np.mean(template.local_freqs))

    def one(gamma):
        cfg = template.with_damping(gamma)
        g, probs = minimize_one_plasmon_loss(cfg, omega, bounds, I)
        r, t, _, _ = _coefficients(cfg, g, omega)
        return LossSweepRow(gamma, g, probs.P0, probs.P1, probs.P2, abs(r) ** 2, abs(t) ** 2)

    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        return list(pool.map(one, gammas))
