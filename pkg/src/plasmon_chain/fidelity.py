"""Wavepackets, output states and state-transfer fidelities.

Integrals over frequency use composite Simpson weights on a uniform grid
covering at least +-8 sigma of the packet. The same weights discretise the
continuous single-plasmon space when the output density matrix is built
(basis vectors ``sqrt(w_k) |1_{omega_k}>``), so the closed fidelity
expression and a direct contraction against the density matrix agree to
rounding.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .dispersion import effective_wavenumber, group_velocity, linear_dispersion_bandwidth
from .errors import InvalidInputError
from .scattering import ChainConfig, solve_scattering

#: Best average fidelity of a measure-and-resend (classical) qubit channel.
CLASSICAL_THRESHOLD = 2.0 / 3.0

#: Half-width of every frequency grid in units of sigma. The Gaussian mass
#: beyond it is erfc(8/sqrt(2)) ~ 1.2e-15.
GRID_HALF_WIDTH = 8.0
DEFAULT_POINTS = 2001
NORM_TOLERANCE = 1e-8

FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


@dataclass(frozen=True)
class GaussianWavepacket:
    """Gaussian spectral amplitude centred on ``center`` with rms width ``sigma``."""

    center: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidInputError(f"sigma must be positive, got {self.sigma!r}")
        if not np.isfinite(self.center):
            raise InvalidInputError("center must be finite")

    @classmethod
    def from_fwhm(cls, center, fwhm):
        """Packet whose spectral intensity has full width ``fwhm`` at half maximum."""
        return cls(center, fwhm * FWHM_TO_SIGMA)

    def grid(self, points=DEFAULT_POINTS):
        """Uniform grid over ``center +- 8 sigma`` (odd point count for Simpson)."""
        if points < 3 or points % 2 == 0:
            raise InvalidInputError("points must be odd and >= 3")
        h = GRID_HALF_WIDTH * self.sigma
        return np.linspace(self.center - h, self.center + h, points)

    def __call__(self, omega):
        return gaussian_amplitude(self, omega)


@dataclass(frozen=True)
class QubitState:
    """Vacuum / single-plasmon qubit ``a|0> + b|1_xi>``."""

    a: complex
    b: complex

    def __post_init__(self):
        norm = abs(self.a) ** 2 + abs(self.b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidInputError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")

    @classmethod
    def from_bloch(cls, theta, phi):
        return cls(complex(np.cos(theta / 2)), complex(np.exp(1j * phi) * np.sin(theta / 2)))


@dataclass(frozen=True)
class OutputQubitDensity:
    """Drain state in the basis ``{|0>, sqrt(w_k)|1_{omega_k}>}``."""

    omega_grid: np.ndarray
    p_vac: float
    coherence: np.ndarray
    one_particle_block: np.ndarray

    def matrix(self):
        m = self.omega_grid.size
        rho = np.empty((m + 1, m + 1), dtype=complex)
        rho[0, 0] = self.p_vac
        rho[0, 1:] = self.coherence
        rho[1:, 0] = np.conj(self.coherence)
        rho[1:, 1:] = self.one_particle_block
        return rho

    @property
    def trace(self):
        return float(self.p_vac + np.real(np.trace(self.one_particle_block)))

    def check(self, trace_tol=1e-10, herm_tol=1e-12, psd_tol=1e-10):
        """Raise :class:`InvalidInputError` if a density-matrix invariant fails."""
        rho = self.matrix()
        if abs(self.trace - 1.0) > trace_tol:
            raise InvalidInputError(f"trace {self.trace!r} differs from 1")
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise InvalidInputError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -psd_tol:
            raise InvalidInputError("density matrix is not positive semidefinite")


def gaussian_amplitude(wp: GaussianWavepacket, omega):
    w = np.asarray(omega, dtype=float)
    val = (2 * np.pi * wp.sigma**2) ** -0.25 * np.exp(-((wp.center - w) ** 2) / (4 * wp.sigma**2))
    return val[()] if val.ndim == 0 else val


def simpson_weights(x):
    """Composite Simpson weights for a uniform grid with an odd number of points."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if x.ndim != 1 or n < 3 or n % 2 == 0:
        raise InvalidInputError("Simpson quadrature needs an odd number (>= 3) of points")
    h = (x[-1] - x[0]) / (n - 1)
    if not h > 0 or np.max(np.abs(np.diff(x) - h)) > 1e-9 * abs(h):
        raise InvalidInputError("frequency grid must be uniform and increasing")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def _packet_weights(wp, omegas, check_norm=True):
    """Simpson weights and |xi|^2 after checking grid coverage and normalisation."""
    w = np.asarray(omegas, dtype=float)
    span = GRID_HALF_WIDTH * wp.sigma * (1 - 1e-9)
    if w[0] > wp.center - span or w[-1] < wp.center + span:
        raise InvalidInputError("frequency grid must cover center +- 8 sigma")
    q = simpson_weights(w)
    xi = gaussian_amplitude(wp, w)
    if check_norm:
        norm = q @ np.abs(xi) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidInputError(f"wavepacket norm {norm:.12g} on this grid is not 1; "
                                    "refine the grid")
    return q, xi


def _abs_T(T, omegas):
    t = np.abs(np.asarray(T))
    if t.shape != np.shape(omegas):
        raise InvalidInputError("transmission samples must match the frequency grid")
    if np.any(t > 1 + 1e-12):
        raise InvalidInputError("|T| must not exceed 1")
    return np.minimum(t, 1.0)


def _moments(wp, omegas, T):
    q, xi = _packet_weights(wp, omegas)
    t = _abs_T(T, omegas)
    rho = q * np.abs(xi) ** 2
    m1 = rho @ t
    mid = rho @ (1 - t**2 + 2 * t)
    return m1, mid


def delayed_wavepacket(wp: GaussianWavepacket, delta_t, t_grid, points=DEFAULT_POINTS):
    """Time-domain packet after a pure delay, by quadrature of ``xi(w) e^{i w dt}``.

    Uses ``xi(t) = (2 pi)^{-1/2} int xi(w) e^{-i w t} dw``. The carrier
    ``e^{-i center (t - dt)}`` is factored out of the integral so the
    quadrature only resolves the envelope.
    """
    t = np.asarray(t_grid, dtype=float)
    span = GRID_HALF_WIDTH / wp.sigma * (1 - 1e-9)
    if t.ndim != 1 or t.size < 2 or t.min() > delta_t - span or t.max() < delta_t + span:
        raise InvalidInputError("t_grid must span delta_t +- 8/sigma")
    omegas = wp.grid(points)
    q, xi = _packet_weights(wp, omegas)
    u = omegas - wp.center
    tau = t - delta_t
    envelope = np.exp(-1j * np.outer(tau, u)) @ (q * xi) / np.sqrt(2 * np.pi)
    return envelope * np.exp(-1j * wp.center * tau)


def shifted_gaussian(wp: GaussianWavepacket, delta_t, t):
    """Analytic delayed packet ``(2 sigma^2/pi)^{1/4} exp(-sigma^2 tau^2 - i w0 tau)``."""
    tau = np.asarray(t, dtype=float) - delta_t
    return ((2 * wp.sigma**2 / np.pi) ** 0.25
            * np.exp(-(wp.sigma * tau) ** 2 - 1j * wp.center * tau))


def output_density_matrix(qubit: QubitState, wp: GaussianWavepacket, omegas, T) -> OutputQubitDensity:
    """Drain-side density matrix after tracing out the source and the bath modes."""
    w = np.asarray(omegas, dtype=float)
    q, xi = _packet_weights(wp, w)
    T = np.asarray(T, dtype=complex)
    _abs_T(T, w)
    amp = np.sqrt(q) * xi * T
    a, b = qubit.a, qubit.b
    p_vac = abs(a) ** 2 + abs(b) ** 2 * float(q @ (np.abs(xi) ** 2 * (1 - np.abs(T) ** 2)))
    coherence = a * np.conj(b) * np.conj(amp)
    block = abs(b) ** 2 * np.outer(amp, np.conj(amp))
    return OutputQubitDensity(omega_grid=w, p_vac=p_vac, coherence=coherence,
                              one_particle_block=block)


def ideal_output_state(qubit: QubitState, wp: GaussianWavepacket, omegas, T):
    """Ideal drain state vector: the input profile carrying the phase of T."""
    q, xi = _packet_weights(wp, omegas)
    phase = np.exp(1j * np.angle(np.asarray(T, dtype=complex)))
    return np.concatenate(([qubit.a], qubit.b * np.sqrt(q) * xi * phase))


def contracted_fidelity(qubit, wp, omegas, T):
    """``<psi'|rho_d|psi'>`` by explicit contraction (cross-check of qubit_fidelity)."""
    rho = output_density_matrix(qubit, wp, omegas, T).matrix()
    psi = ideal_output_state(qubit, wp, omegas, T)
    return float(np.real(np.conj(psi) @ rho @ psi))


def qubit_fidelity(qubit: QubitState, wp: GaussianWavepacket, omegas, T) -> float:
    """Transfer fidelity of ``a|0> + b|1_xi>``; depends on |T| only."""
    m1, mid = _moments(wp, omegas, T)
    a2, b2 = abs(qubit.a) ** 2, abs(qubit.b) ** 2
    return float(a2**2 + a2 * b2 * mid + b2**2 * m1**2)


def average_fidelity(wp: GaussianWavepacket, omegas, T) -> float:
    """Bloch-sphere average of :func:`qubit_fidelity`."""
    m1, mid = _moments(wp, omegas, T)
    return float(1 / 3 + mid / 6 + m1**2 / 3)


def single_photon_fidelity(wp: GaussianWavepacket, omegas, T) -> float:
    m1, _ = _moments(wp, omegas, T)
    return float(m1**2)


def coherent_fidelity(alpha, omegas, T) -> float:
    """Fidelity of a continuous-mode coherent state with profile ``alpha(omega)``."""
    w = np.asarray(omegas, dtype=float)
    alpha = np.asarray(alpha)
    if alpha.shape != w.shape:
        raise InvalidInputError("alpha samples must match the frequency grid")
    t = _abs_T(T, w)
    q = simpson_weights(w)
    return float(np.exp(-(q @ (np.abs(alpha) ** 2 * (t - 1) ** 2))))


def mean_output_flux(profile, omegas, T) -> float:
    """Mean drain excitation number ``int |profile|^2 |T|^2``.

    ``profile`` is either a :class:`GaussianWavepacket` or sampled amplitudes.
    """
    w = np.asarray(omegas, dtype=float)
    if isinstance(profile, GaussianWavepacket):
        q, amp = _packet_weights(profile, w)
    else:
        amp = np.asarray(profile)
        if amp.shape != w.shape:
            raise InvalidInputError("profile samples must match the frequency grid")
        q = simpson_weights(w)
    t = _abs_T(T, w)
    return float(q @ (np.abs(amp) ** 2 * t**2))


# fidelity maps ---------------------------------------------------------------

@dataclass(frozen=True)
class FidelityMap:
    """Average fidelity sampled on ``sigmas`` x ``g_ins`` (rows follow sigma)."""

    sigmas: np.ndarray
    g_ins: np.ndarray
    values: np.ndarray
    linear_bound: np.ndarray = None

    def rows(self):
        for i, s in enumerate(self.sigmas):
            for j, g in enumerate(self.g_ins):
                yield s, g, self.values[i, j]


def worker_count(default=None):
    """Thread count from ``PLASMON_CHAIN_THREADS`` (falls back to ``default`` or 1)."""
    raw = os.environ.get("PLASMON_CHAIN_THREADS")
    if raw is None:
        return default or 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"PLASMON_CHAIN_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidInputError("PLASMON_CHAIN_THREADS must be >= 1")
    return n


def _column(template: ChainConfig, center, sigmas, g_in, points):
    cfg = template.with_ports(g_in)
    out = np.empty(len(sigmas))
    for i, s in enumerate(sigmas):
        wp = GaussianWavepacket(center, s)
        w = wp.grid(points)
        out[i] = average_fidelity(wp, w, solve_scattering(cfg, w).t_s)
    return out


def _bandwidth(template: ChainConfig, center, g_in, width, points, tolerance):
    cfg = template.with_ports(g_in)
    w = np.linspace(center - width, center + width, points)
    coeffs = solve_scattering(cfg, w)
    curve = effective_wavenumber(w, np.angle(coeffs.t_s), cfg.n, cfg.spacing, center)
    return linear_dispersion_bandwidth(group_velocity(curve), tolerance)


def fidelity_map(template: ChainConfig, center, sigmas, g_ins, points=DEFAULT_POINTS,
                 workers=None, with_linear_bound=False, bound_tolerance=0.05,
                 bound_points=4001):
    """Average fidelity over a (sigma, g_in = g_out) grid.

    Columns (one per ``g_in``) run on a thread pool of ``workers`` threads,
    defaulting to :func:`worker_count`; results are assembled in grid order
    so the output does not depend on scheduling. With ``with_linear_bound``
    the half-width of the linear-dispersion band is also returned per g_in,
    which is the sigma below which the delay picture applies.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    g_ins = np.asarray(g_ins, dtype=float)
    if sigmas.ndim != 1 or g_ins.ndim != 1 or sigmas.size < 2 or g_ins.size < 2:
        raise InvalidInputError("sigma and g_in axes need at least 2 points each")
    if np.any(sigmas <= 0) or np.any(g_ins <= 0):
        raise InvalidInputError("sigma and g_in values must be positive")
    workers = workers or worker_count()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        cols = list(pool.map(lambda g: _column(template, center, sigmas, g, points), g_ins))
        bound = None
        if with_linear_bound:
            width = GRID_HALF_WIDTH * sigmas.max()
            bound = np.array(list(pool.map(
                lambda g: _bandwidth(template, center, g, width, bound_points, bound_tolerance),
                g_ins)))
    return FidelityMap(sigmas=sigmas, g_ins=g_ins, values=np.column_stack(cols),
                       linear_bound=bound)


def fidelity_contours(fmap: FidelityMap, level=CLASSICAL_THRESHOLD, log_g=True):
    """Iso-fidelity lines by marching squares, as arrays of ``(sigma, g_in)`` points."""
    lines = measure.find_contours(fmap.values, level)
    i_axis = np.arange(fmap.sigmas.size)
    j_axis = np.arange(fmap.g_ins.size)
    g_axis = np.log(fmap.g_ins) if log_g else fmap.g_ins
    out = []
    for line in lines:
        s = np.interp(line[:, 0], i_axis, fmap.sigmas)
        g = np.interp(line[:, 1], j_axis, g_axis)
        out.append(np.column_stack((s, np.exp(g) if log_g else g)))
    return out
