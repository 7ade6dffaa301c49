"""Input-output scattering of a nanoparticle chain between two nanowire ports.

Eliminating the particle modes from the frequency-domain Heisenberg
equations leaves, for each frequency, the complex tridiagonal system

    D_i a_i - i g_{i-1,i} a_{i-1} - i g_{i,i+1} a_{i+1} = -sqrt(g_in) s_in delta_{i1}
                                                        - sqrt(g_out) d_in delta_{in}
                                                        - sqrt(Gamma_i) A_in,i

with ``D_i = i(w - w_i) - Gamma_i/2 - g_in/2 [i=1] - g_out/2 [i=n]``. The
outgoing amplitudes follow from the port boundary conditions
``s_out = sqrt(g_in) a_1 - s_in``, ``d_out = sqrt(g_out) a_n - d_in`` and
``A_out,i = sqrt(Gamma_i) a_i - A_in,i``.

Coefficients are normalised so that a single undamped particle has
``t = g_in / (g_in - i(w - w_0))``; no extra phase convention is applied.
Any consistent frequency unit works (rad/s or units of omega_0).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, signal

from .errors import InvalidInputError, NumericalFailureError, WeakCouplingWarning
from .materials import WEAK_COUPLING_LIMIT

CLOSED_FORM_SIZES = (1, 2, 3, 5, 7)


@dataclass(frozen=True)
class ChainConfig:
    """One chain instance: particle count, on-site frequencies, couplings and losses."""

    n: int
    local_freqs: tuple
    couplings: tuple
    g_in: float
    g_out: float
    damping: tuple
    spacing: float = 75e-9

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidInputError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "local_freqs", tuple(float(x) for x in self.local_freqs))
        object.__setattr__(self, "couplings", tuple(float(x) for x in self.couplings))
        object.__setattr__(self, "damping", tuple(float(x) for x in self.damping))
        if len(self.local_freqs) != self.n or len(self.damping) != self.n:
            raise InvalidInputError("local_freqs and damping need exactly n entries")
        if len(self.couplings) != self.n - 1:
            raise InvalidInputError("couplings need exactly n - 1 entries")
        if any(x < 0 for x in self.damping):
            raise InvalidInputError("damping rates must be >= 0")
        if self.g_in < 0 or self.g_out < 0:
            raise InvalidInputError("g_in and g_out must be >= 0")
        if not all(np.isfinite(self.local_freqs + self.couplings + self.damping)):
            raise InvalidInputError("chain parameters must be finite")
        if not self.spacing > 0:
            raise InvalidInputError("spacing must be positive")
        if self.couplings and not self.weak_coupling:
            warnings.warn("nearest-neighbour coupling exceeds 0.1 * min(local_freqs)",
                          WeakCouplingWarning, stacklevel=3)

    @classmethod
    def uniform(cls, n, omega_0, g, g_in, g_out=None, gamma=0.0, spacing=75e-9):
        """Chain with identical particles, couplings and damping rates."""
        return cls(n=n, local_freqs=(omega_0,) * n, couplings=(g,) * (n - 1),
                   g_in=g_in, g_out=g_in if g_out is None else g_out,
                   damping=(gamma,) * n, spacing=spacing)

    @property
    def weak_coupling(self) -> bool:
        if not self.couplings:
            return True
        return max(abs(g) for g in self.couplings) <= (
            WEAK_COUPLING_LIMIT * min(self.local_freqs) * (1 + 1e-12))

    @property
    def lossless(self) -> bool:
        return not any(self.damping)

    def with_ports(self, g_in, g_out=None) -> "ChainConfig":
        return replace(self, g_in=g_in, g_out=g_in if g_out is None else g_out)

    def with_damping(self, gamma) -> "ChainConfig":
        return replace(self, damping=(gamma,) * self.n)


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Amplitude coefficients for a drive from the source (``_s``) or drain (``_d``).

    Scalars for a scalar frequency; otherwise arrays over the frequency axis,
    with the per-particle loss amplitudes shaped ``(len(omega), n)``.
    """

    omega: np.ndarray
    r_s: np.ndarray
    t_s: np.ndarray
    r_d: np.ndarray
    t_d: np.ndarray
    s_loss_s: np.ndarray
    s_loss_d: np.ndarray

    def flux(self, direction: str = "s"):
        """|r|^2 + |t|^2 + sum |S_i|^2 for one drive direction (unity by unitarity)."""
        if direction == "s":
            r, t, s = self.r_s, self.t_s, self.s_loss_s
        elif direction == "d":
            r, t, s = self.r_d, self.t_d, self.s_loss_d
        else:
            raise InvalidInputError("direction must be 's' or 'd'")
        return np.abs(r) ** 2 + np.abs(t) ** 2 + np.sum(np.abs(s) ** 2, axis=-1)

    @property
    def loss_s(self):
        return np.sum(np.abs(self.s_loss_s) ** 2, axis=-1)


def _system(config: ChainConfig, omegas: np.ndarray):
    """Sub-, main and super-diagonals of the chain matrix, shape (n, m) / (n-1,)."""
    w_i = np.asarray(config.local_freqs)[:, None]
    gam = np.asarray(config.damping)[:, None]
    diag = 1j * (omegas[None, :] - w_i) - 0.5 * gam
    diag[0] -= 0.5 * config.g_in
    diag[-1] -= 0.5 * config.g_out
    off = -1j * np.asarray(config.couplings, dtype=float)
    return diag, off


def _thomas(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray):
    """Solve symmetric tridiagonal systems column-wise.

    ``diag`` is (n, m), ``off`` the (n-1,) off-diagonal shared by all m
    systems, ``rhs`` (n, m, k). Returns the solution and a boolean mask of
    columns whose elimination hit a zero pivot.
    """
    n = diag.shape[0]
    piv = np.empty_like(diag)
    y = np.empty_like(rhs)
    piv[0] = diag[0]
    y[0] = rhs[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(1, n):
            f = off[i - 1] / piv[i - 1]
            piv[i] = diag[i] - f * off[i - 1]
            y[i] = rhs[i] - f[:, None] * y[i - 1]
        x = np.empty_like(rhs)
        x[-1] = y[-1] / piv[-1][:, None]
        for i in range(n - 2, -1, -1):
            x[i] = (y[i] - off[i] * x[i + 1]) / piv[i][:, None]
    bad = np.any(piv == 0, axis=0) | ~np.all(np.isfinite(x), axis=(0, 2))
    return x, bad


def solve_scattering(config: ChainConfig, omega) -> ScatteringCoefficients:
    """Scattering coefficients of the chain at one frequency or an array of them.

    Raises :class:`NumericalFailureError` when the system is singular, which
    can only happen for an undamped chain with a port decoupled exactly at
    an eigenfrequency.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if w.ndim != 1:
        raise InvalidInputError("omega must be a scalar or 1-D array")
    if np.any(~(w > 0)):
        raise InvalidInputError("omega must be positive")

    n = config.n
    diag, off = _system(config, w)
    rhs = np.zeros((n, w.size, 2), dtype=complex)
    rhs[0, :, 0] = -np.sqrt(config.g_in)
    rhs[-1, :, 1] -= np.sqrt(config.g_out)
    a, bad = _thomas(diag, off, rhs)
    for j in np.flatnonzero(bad):
        full = np.diag(diag[:, j]) + np.diag(np.broadcast_to(off, (n - 1,)), 1) \
            + np.diag(np.broadcast_to(off, (n - 1,)), -1)
        try:
            a[:, j, :] = np.linalg.solve(full, rhs[:, j, :])
        except np.linalg.LinAlgError:
            raise NumericalFailureError(
                f"singular chain system at omega = {w[j]!r}: undamped eigenfrequency "
                "with a decoupled port") from None

    sg_in, sg_out = np.sqrt(config.g_in), np.sqrt(config.g_out)
    sgam = np.sqrt(np.asarray(config.damping))[:, None]
    src, drn = a[:, :, 0], a[:, :, 1]
    coeffs = dict(
        r_s=sg_in * src[0] - 1.0,
        t_s=sg_out * src[-1],
        r_d=sg_out * drn[-1] - 1.0,
        t_d=sg_in * drn[0],
        s_loss_s=(sgam * src).T,
        s_loss_d=(sgam * drn).T,
    )
    if scalar:
        coeffs = {k: v[0] for k, v in coeffs.items()}
        return ScatteringCoefficients(omega=float(w[0]), **coeffs)
    return ScatteringCoefficients(omega=w, **coeffs)


def closed_form_transmission(n, g_np, g_in, gamma, omega, omega_0, as_printed=False):
    """Analytic transmission of a uniform chain with ``g_out = g_in``.

    ``gamma == 0`` selects the lossless expressions and ``gamma > 0`` the
    damped ones. ``as_printed`` switches to two typo-bearing variants kept
    for comparison: the lossless n = 7 denominator with ``(w + w_0)`` in two
    places where ``(w - w_0)`` belongs, and the damped n = 5 form with
    ``(G + 2i dw)`` as its first factor instead of ``(G - 2i dw)``. Neither
    variant satisfies the linear system.
    """
    if n not in CLOSED_FORM_SIZES:
        raise InvalidInputError(f"closed forms exist only for n in {CLOSED_FORM_SIZES}")
    if gamma < 0:
        raise InvalidInputError("gamma must be >= 0")
    w = np.asarray(omega, dtype=float)
    x = w - omega_0
    g, G = g_np, g_in
    if gamma == 0:
        y = w + omega_0 if as_printed else x
        if n == 1:
            return G / (G - 1j * x)
        if n == 2:
            return -4j * g * G / (4 * g**2 + (G - 2j * x) ** 2)
        if n == 3:
            return -4 * g**2 * G / ((G - 2j * x) * (4 * g**2 - x * (1j * G + 2 * x)))
        if n == 5:
            return 4 * g**4 * G / ((2 * g**2 * (G - 3j * x) - (G - 2j * x) * x**2)
                                   * (2 * g**2 - x * (1j * G + 2 * x)))
        return -4 * g**6 * G / ((g**2 * (G - 4j * x) - (G - 2j * x) * x**2)
                                * (4 * g**4 + x**3 * (1j * G + 2 * y)
                                   - g**2 * x * (3j * G + 8 * y)))

    e = gamma - 2j * x
    if n == 1:
        return 2 * G / (2 * G + e)
    if n == 2:
        return -4j * g * G / (4 * g**2 + (G + e) ** 2)
    if n == 3:
        return -8 * g**2 * G / ((G + e) * (8 * g**2 + e * (G + e)))
    if n == 5:
        first = gamma + 2j * x if as_printed else e
        return 32 * g**4 * G / ((4 * g**2 + first * (G + e))
                                * (4 * g**2 * (2 * G + 3 * e) + e**2 * (G + e)))
    return -128 * g**6 * G / ((4 * g**2 * (G + 2 * e) + e**2 * (G + e))
                              * (32 * g**4 + 4 * g**2 * (3 * G + 4 * e) * e
                                 + e**3 * (G + e)))


class Spectrum(NamedTuple):
    omega: np.ndarray
    T2: np.ndarray
    argT: np.ndarray
    R2: np.ndarray
    loss_total: np.ndarray

    def rows(self):
        return zip(*(np.asarray(c).tolist() for c in self))


def transmission_spectrum(config: ChainConfig, omega_grid: Sequence[float]) -> Spectrum:
    """|T|^2, arg T, |R|^2 and total absorbed fraction along a frequency grid."""
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or w.size < 2 or np.any(np.diff(w) <= 0):
        raise InvalidInputError("omega_grid must be strictly increasing with >= 2 points")
    sc = solve_scattering(config, w)
    return Spectrum(w, np.abs(sc.t_s) ** 2, np.angle(sc.t_s), np.abs(sc.r_s) ** 2,
                    sc.loss_s)


def transmission_peaks(config: ChainConfig, omega_grid, refine=True):
    """Local maxima of |T|^2 on the grid, each refined by a bounded 1-D search.

    Returns ``(omega_peak, T2_peak)`` arrays in ascending frequency order.
    """
    spec = transmission_spectrum(config, omega_grid)
    w = spec.omega
    idx, _ = signal.find_peaks(spec.T2)
    if not refine:
        return w[idx], spec.T2[idx]

    def neg_t2(x):
        return -abs(solve_scattering(config, x).t_s) ** 2

    peaks, heights = [], []
    for i in idx:
        lo, hi = w[max(i - 1, 0)], w[min(i + 1, w.size - 1)]
        res = optimize.minimize_scalar(neg_t2, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * max(abs(hi), 1.0)})
        best = res.x if -res.fun >= spec.T2[i] else w[i]
        peaks.append(best)
        heights.append(max(-res.fun, spec.T2[i]))
    return np.array(peaks), np.array(heights)


@dataclass(frozen=True)
class MeanFieldTrajectory:
    times: np.ndarray
    amplitudes: np.ndarray  # (len(times), n)

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2


def classical_mean_field_evolution(config: ChainConfig, initial_amplitudes, t_final, dt,
                                   sample_every=1) -> MeanFieldTrajectory:
    """Fixed-step RK4 integration of the closed chain's coherent amplitudes.

    Solves ``d alpha_i/dt = -i w_i alpha_i - i sum_j g_ij alpha_j``; ports and
    damping are ignored. Integration runs in the frame rotating at the mean
    on-site frequency, whose phase is restored exactly, so the step error is
    set by the couplings and detunings only. For this linear autonomous
    system one RK4 step is the fixed matrix ``I + hA + (hA)^2/2 + (hA)^3/6 +
    (hA)^4/24``, which is applied ``sample_every`` times between samples.
    """
    alpha0 = np.asarray(initial_amplitudes, dtype=complex)
    if alpha0.shape != (config.n,):
        raise InvalidInputError("initial_amplitudes needs one entry per particle")
    w_i = np.asarray(config.local_freqs)
    if not (dt > 0) or dt > 0.01 / np.max(np.abs(w_i)) * (1 + 1e-12):
        raise InvalidInputError("dt must satisfy 0 < dt <= 0.01 / max(local_freqs)")
    if t_final < 0:
        raise InvalidInputError("t_final must be >= 0")
    if int(sample_every) < 1:
        raise InvalidInputError("sample_every must be >= 1")

    w_ref = float(np.mean(w_i))
    H = np.diag(w_i - w_ref) + np.diag(config.couplings, 1) + np.diag(config.couplings, -1)
    hA = -1j * dt * H
    step = np.eye(config.n, dtype=complex)
    term = np.eye(config.n, dtype=complex)
    for k in range(1, 5):
        term = term @ hA / k
        step = step + term
    stride = np.linalg.matrix_power(step, int(sample_every))

    n_samples = int(np.floor(t_final / (dt * sample_every) + 1e-9)) + 1
    out = np.empty((n_samples, config.n), dtype=complex)
    out[0] = alpha0
    for k in range(1, n_samples):
        out[k] = stride @ out[k - 1]
    times = np.arange(n_samples) * dt * sample_every
    out *= np.exp(-1j * w_ref * times)[:, None]
    return MeanFieldTrajectory(times, out)
