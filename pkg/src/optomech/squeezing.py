"""Ponderomotive squeezing spectra of the light reflected by a resonantly
driven (Delta = 0) one-sided cavity with a movable mirror.

Spectra here use the shot-noise = 1 normalization (S_X^in = S_Y^in = 1),
twice the internal vacuum variance of 1/2.  The cavity linewidth entering
the formulas is the full width k = 2 * cavity_decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDetuning, ParameterError
from .params import C_LIGHT, HBAR, KB, SystemParams, steady_amplitude

__all__ = [
    "MechanicalSusceptibility",
    "SqueezingSpectra",
    "compute_spectra",
    "coupling_strength",
    "default_grid",
    "optimal_phase",
    "optimal_spectrum",
    "quadrature_spectrum",
    "squeezing_figure_of_merit",
    "squeezing_scaling_estimate",
    "steady_amplitude",
    "to_db",
]


@dataclass(frozen=True)
class MechanicalSusceptibility:
    mass: float
    mech_freq: float
    mech_damping: float

    @classmethod
    def from_params(cls, p: SystemParams) -> "MechanicalSusceptibility":
        return cls(p.mass, p.mech_freq, p.mech_damping)

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        return 1.0 / (self.mass * (self.mech_freq**2 - w**2 - 1j * self.mech_damping * w))


def coupling_strength(p: SystemParams) -> float:
    """hbar G^2 alpha_s^2 (N/m) with G = omega_L / L the per-length coupling.

    Equivalently m Omega_M g^2 with g = g0 alpha_s the linearized coupling in
    rad/s, which is how a caption coupling override enters.
    """
    if p.coupling is not None:
        return p.mass * p.mech_freq * p.coupling**2
    return HBAR * p.length_coupling**2 * steady_amplitude(p) ** 2


def _thermal_factor(omega, temperature):
    if temperature == 0:
        return np.ones_like(omega)
    return 1.0 / np.tanh(HBAR * omega / (2.0 * KB * temperature))


def quadrature_spectrum(s_x, s_y, s_xy, phi):
    """S_phi = S_X cos^2 phi + S_Y sin^2 phi + S_XY sin 2 phi."""
    return s_x * np.cos(phi) ** 2 + s_y * np.sin(phi) ** 2 + s_xy * np.sin(2 * phi)


def optimal_spectrum(s_x, s_y, s_xy):
    """Minimum over phi of S_phi, written in the cancellation-free form."""
    return (2 * s_x * s_y - 2 * s_xy**2) / (s_x + s_y + np.sqrt((s_x - s_y) ** 2 + 4 * s_xy**2))


def optimal_phase(s_x, s_y, s_xy):
    """phi_opt = (1/2) arctan[2 S_XY / (S_X - S_Y)] on the branch with smaller S_phi.

    The arctan fixes phi only modulo pi/2; both candidates are evaluated and
    the one with the lower noise is kept.  Returned in (-pi/2, pi/2].
    """
    s_x, s_y, s_xy = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (s_x, s_y, s_xy)))
    diff = s_x - s_y
    num = 2.0 * s_xy
    with np.errstate(divide="ignore", invalid="ignore"):
        phi0 = 0.5 * np.arctan(num / diff)
    phi0 = np.where(diff == 0, np.where(num == 0, 0.0, np.sign(num) * np.pi / 4), phi0)
    phi1 = phi0 + np.pi / 2
    phi1 = np.where(phi1 > np.pi / 2, phi1 - np.pi, phi1)
    pick1 = quadrature_spectrum(s_x, s_y, s_xy, phi1) < quadrature_spectrum(s_x, s_y, s_xy, phi0)
    return np.where(pick1, phi1, phi0)


def to_db(s):
    return 10.0 * np.log10(s)


@dataclass(frozen=True, eq=False)
class SqueezingSpectra:
    omega: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray
    s_xy: np.ndarray
    s_r: np.ndarray
    s_opt: np.ndarray
    phi_opt: np.ndarray

    def s_phi(self, phi):
        return quadrature_spectrum(self.s_x, self.s_y, self.s_xy, phi)

    @property
    def s_opt_db(self):
        return to_db(self.s_opt)


def default_grid(p: SystemParams, n: int = 2000, lo: float = 1e-3, hi: float = 3.0) -> np.ndarray:
    """Logarithmic grid in [lo, hi] * Omega_M.  Zero is excluded (coth diverges)."""
    return p.mech_freq * np.logspace(np.log10(lo), np.log10(hi), n)


def _validate_grid(grid):
    w = np.asarray(grid, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError("frequency grid must be a non-empty 1-d array")
    if np.any(w <= 0):
        raise ParameterError("frequency grid must be strictly positive")
    if np.any(np.diff(w) <= 0):
        raise ParameterError("frequency grid must be strictly increasing")
    return w


def _raw_terms(p: SystemParams, w):
    k = 2.0 * p.cavity_decay
    chi = MechanicalSusceptibility.from_params(p)(w)
    lorentz = k * coupling_strength(p) / (k**2 / 4.0 + w**2)
    return lorentz * chi.real, lorentz * chi.imag


def compute_spectra(p: SystemParams, grid=None) -> SqueezingSpectra:
    if p.detuning != 0:
        raise InvalidDetuning(f"squeezing spectra require Delta = 0, got {p.detuning}")
    w = _validate_grid(default_grid(p) if grid is None else grid)
    s_xy, im_term = _raw_terms(p, w)
    s_r = im_term**2 + im_term * _thermal_factor(w, p.temperature)
    s_x = np.ones_like(w)
    s_y = 1.0 + s_xy**2 + s_r
    return SqueezingSpectra(
        omega=w,
        s_x=s_x,
        s_y=s_y,
        s_xy=s_xy,
        s_r=s_r,
        s_opt=optimal_spectrum(s_x, s_y, s_xy),
        phi_opt=optimal_phase(s_x, s_y, s_xy),
    )


def squeezing_figure_of_merit(p: SystemParams, omega: float) -> float:
    """(S_XY)^2 / S_r at a single frequency; +inf when S_r vanishes.

    Large values put the output in the ideal limit S_opt ~ S_XY^-2.
    """
    sp = compute_spectra(p, np.array([float(omega)]))
    s_r = float(sp.s_r[0])
    if s_r == 0:
        return float("inf")
    return float(sp.s_xy[0] ** 2 / s_r)


def squeezing_scaling_estimate(p: SystemParams) -> float:
    """Order-of-magnitude estimate P omega_L F^2 Q / (m c^2 Omega_M^2 n_th)."""
    if p.finesse is None:
        raise ParameterError("finesse is required for the scaling estimate")
    n = p.n_th
    if n == 0:
        return float("inf")
    return (
        p.input_power * p.laser_freq * p.finesse**2 * p.mech_Q
        / (p.mass * C_LIGHT**2 * p.mech_freq**2 * n)
    )
