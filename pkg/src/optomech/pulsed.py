"""Pulsed optomechanical entanglement, read-out by state swap, and
teleportation onto the mechanics.

Quadrature ordering is (x_m, p_m, x_l, p_l): mode 0 is the mechanical mode B,
mode 1 the exponentially shaped light mode A.  Vacuum variance is 1/2.
Blue-detuned pulses give the two-mode-squeezing map

    B_out = e^r B + i s A^dag,   A_out = -e^r A - i s B^dag,   s = sqrt(e^{2r} - 1)

and red-detuned pulses the beam-splitter map

    B_out = e^-r B - i t A,      A_out = -e^-r A + i t B,      t = sqrt(1 - e^{-2r}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ParameterError
from .gaussian import CovarianceMatrix, simon_ppt_entangled, symplectic_form
from .params import HBAR, KB, bose_occupation


@dataclass(frozen=True)
class PulseParams:
    g: float
    kappa: float
    mech_freq: float
    tau: float
    n0: float = 0.0
    n_th: float = 0.0
    mech_damping: float = 0.0
    n_photons: float | None = None

    def __post_init__(self):
        if min(self.g, self.kappa, self.mech_freq, self.tau) <= 0:
            raise ParameterError("g, kappa, mech_freq and tau must be positive")
        if min(self.n0, self.n_th, self.mech_damping) < 0:
            raise ParameterError("occupations and damping must be non-negative")

    @classmethod
    def from_photons(cls, g0: float, n_photons: float, kappa: float, mech_freq: float, tau: float, detuning=None, **kw):
        """g = g0 sqrt(2 kappa N_ph / tau / (Delta^2 + kappa^2)); Delta defaults to -Omega_M."""
        delta = -mech_freq if detuning is None else detuning
        g = g0 * math.sqrt(2 * kappa * n_photons / tau / (delta**2 + kappa**2))
        return cls(g, kappa, mech_freq, tau, n_photons=n_photons, **kw)

    @property
    def G(self) -> float:
        return self.g**2 / self.kappa

    @property
    def r(self) -> float:
        return self.G * self.tau

    @property
    def mech_Q(self) -> float:
        return math.inf if self.mech_damping == 0 else self.mech_freq / self.mech_damping


@dataclass(frozen=True, eq=False)
class TwoModeMoments:
    mean: np.ndarray
    cov: CovarianceMatrix

    def __post_init__(self):
        m = np.asarray(self.mean, dtype=float).reshape(4)
        object.__setattr__(self, "mean", m)
        if not isinstance(self.cov, CovarianceMatrix):
            object.__setattr__(self, "cov", CovarianceMatrix(np.asarray(self.cov, dtype=float)))

    @classmethod
    def product(cls, n_mech: float = 0.0, n_light: float = 0.0, mean=None) -> "TwoModeMoments":
        """Thermal mechanics (n0) times thermal light; vacuum by default."""
        V = np.diag([n_mech + 0.5, n_mech + 0.5, n_light + 0.5, n_light + 0.5])
        return cls(np.zeros(4) if mean is None else mean, CovarianceMatrix(V))

    def transform(self, S: np.ndarray) -> "TwoModeMoments":
        return TwoModeMoments(S @ self.mean, CovarianceMatrix(S @ self.cov.matrix @ S.T))


def entangling_matrix(r: float) -> np.ndarray:
    if r < 0:
        raise ParameterError("r must be non-negative")
    c, s = math.exp(r), math.sqrt(math.expm1(2 * r))
    return np.array(
        [
            [c, 0, 0, s],
            [0, c, s, 0],
            [0, -s, -c, 0],
            [-s, 0, 0, -c],
        ],
        dtype=float,
    )


def swap_matrix(r: float) -> np.ndarray:
    if r < 0:
        raise ParameterError("r must be non-negative")
    c, t = math.exp(-r), math.sqrt(-math.expm1(-2 * r))
    return np.array(
        [
            [c, 0, 0, t],
            [0, c, -t, 0],
            [0, -t, -c, 0],
            [t, 0, 0, -c],
        ],
        dtype=float,
    )


def symplectic_residual(S: np.ndarray) -> float:
    J = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S @ J @ S.T - J)))


def entangling_transform(moments: TwoModeMoments, r: float) -> TwoModeMoments:
    return moments.transform(entangling_matrix(r))


def state_swap_transform(moments: TwoModeMoments, r: float) -> TwoModeMoments:
    return moments.transform(swap_matrix(r))


def _excess(r: float) -> float:
    """e^r - sqrt(e^{2r} - 1), written without cancellation."""
    return 1.0 / (math.exp(r) + math.sqrt(math.expm1(2 * r)))


def epr_variance(n0: float, r: float) -> float:
    """2 (n0 + 1)(e^r - sqrt(e^{2r} - 1))^2; entangled iff below 2."""
    if n0 < 0 or r < 0:
        raise ParameterError("need n0 >= 0 and r >= 0")
    return 2 * (n0 + 1) * _excess(r) ** 2


def epr_variance_from_moments(moments: TwoModeMoments) -> float:
    """[Delta(x_m + p_l)]^2 + [Delta(p_m + x_l)]^2 from the covariance."""
    V = moments.cov.matrix
    u = np.array([1.0, 0.0, 0.0, 1.0])
    v = np.array([0.0, 1.0, 1.0, 0.0])
    return float(u @ V @ u + v @ V @ v)


def entanglement_threshold(n0: float) -> float:
    """r0 = 1/2 ln((n0 + 2)^2 / (4 (n0 + 1)))."""
    if n0 < 0:
        raise ParameterError("n0 must be non-negative")
    return 0.5 * (2 * math.log(n0 + 2) - math.log(4 * (n0 + 1)))


def threshold_by_bisection(n0: float) -> float:
    """Solve epr_variance(n0, r) = 2 numerically."""
    if n0 == 0:
        return 0.0
    hi = 1.0
    while epr_variance(n0, hi) > 2:
        hi *= 2
    return brentq(lambda r: epr_variance(n0, r) - 2, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def is_entangled(moments: TwoModeMoments) -> bool:
    return simon_ppt_entangled(moments.cov)


# ------------------------------------------------------------ teleportation


def teleportation_noise(n0: float, r: float) -> tuple[float, float]:
    """Variance added to each quadrature: (e^r - sqrt(e^{2r}-1))^2 (n0 + 1)."""
    a = epr_variance(n0, r) / 2
    return a, a


@dataclass(frozen=True, eq=False)
class TeleportationResult:
    mean: np.ndarray
    cov: np.ndarray
    fidelity: float
    added_variance: tuple


def _rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def _beam_splitter():
    h = 1 / math.sqrt(2)
    # c = (a + v)/sqrt2, d = (a - v)/sqrt2 acting on (x_a, p_a, x_v, p_v)
    return np.array([[h, 0, h, 0], [0, h, 0, h], [h, 0, -h, 0], [0, h, 0, -h]])


def gaussian_fidelity(mean1, cov1, mean2, cov2) -> float:
    """Overlap Tr(rho1 rho2) of two Gaussian states, one of which is pure."""
    S = np.asarray(cov1) + np.asarray(cov2)
    d = np.asarray(mean1) - np.asarray(mean2)
    return float(np.exp(-0.5 * d @ np.linalg.solve(S, d)) / math.sqrt(np.linalg.det(S)))


def teleport(
    input_mean,
    input_cov,
    n0: float,
    r: float,
) -> TeleportationResult:
    """Propagate mechanics B, light A and input pulse V through the protocol.

    After the entangling pulse, A is rotated by pi/2 and mixed with V on a
    50/50 beam splitter; homodyning x of one port and p of the other gives
    m_X = p_l + x_v and m_P = x_l + p_v.  The mechanics is conditioned on the
    outcomes (Schur complement) and displaced by (m_X, m_P); averaging the
    displaced conditional state over outcomes yields the output.
    """
    input_mean = np.asarray(input_mean, dtype=float)
    input_cov = np.asarray(input_cov, dtype=float)
    # order: x_m p_m x_l p_l x_v p_v
    mean = np.concatenate([np.zeros(4), input_mean])
    V = np.zeros((6, 6))
    V[:4, :4] = np.diag([n0 + 0.5, n0 + 0.5, 0.5, 0.5])
    V[4:, 4:] = input_cov
    S = np.eye(6)
    S[:4, :4] = entangling_matrix(r)
    R = np.eye(6)
    R[2:4, 2:4] = _rotation(math.pi / 2)
    BS = np.eye(6)
    BS[2:, 2:] = _beam_splitter()
    T = BS @ R @ S
    mean, V = T @ mean, T @ V @ T.T
    # measured: m_X = sqrt2 x_c, m_P = -sqrt2 p_d
    Mrow = np.zeros((2, 6))
    Mrow[0, 2] = math.sqrt(2)
    Mrow[1, 5] = -math.sqrt(2)
    Krow = np.zeros((2, 6))
    Krow[0, 0] = Krow[1, 1] = 1.0
    V_mm = Mrow @ V @ Mrow.T
    V_bm = Krow @ V @ Mrow.T
    V_bb = Krow @ V @ Krow.T
    gain = V_bm @ np.linalg.inv(V_mm)
    V_cond = V_bb - gain @ V_bm.T
    # displaced mean given m: mu_b + gain (m - mu_m) + m
    L = gain + np.eye(2)
    out_cov = V_cond + L @ V_mm @ L.T
    out_mean = Krow @ mean + Mrow @ mean
    fid = gaussian_fidelity(input_mean, input_cov, out_mean, out_cov)
    added = (float(out_cov[0, 0] - input_cov[0, 0]), float(out_cov[1, 1] - input_cov[1, 1]))
    return TeleportationResult(out_mean, out_cov, fid, added)


def teleport_coherent(alpha: complex, n0: float, r: float) -> TeleportationResult:
    m = math.sqrt(2) * np.array([alpha.real, alpha.imag])
    return teleport(m, 0.5 * np.eye(2), n0, r)


# ------------------------------------------------------------ mode shapes


@dataclass(frozen=True)
class ModeEnvelopes:
    """Normalizations of A_in ~ e^{-G t} and A_out ~ e^{G t} on [0, tau]."""

    G: float
    tau: float

    @property
    def input_norm(self) -> float:
        return math.sqrt(2 * self.G / -math.expm1(-2 * self.G * self.tau))

    @property
    def output_norm(self) -> float:
        return math.sqrt(2 * self.G / math.expm1(2 * self.G * self.tau))

    def input_envelope(self, t):
        return self.input_norm * np.exp(-self.G * np.asarray(t))

    def output_envelope(self, t):
        return self.output_norm * np.exp(self.G * np.asarray(t))


# ---------------------------------------------------------------- regime


def thermal_frequency(temperature: float) -> float:
    """k_B T / hbar in rad/s."""
    return KB * temperature / HBAR


@dataclass(frozen=True)
class RegimeReport:
    margins: dict
    min_margin: float
    flags: tuple
    thermal_frequency: float
    q_omega: float
    q_omega_margin: float

    @property
    def ok(self) -> bool:
        return not self.flags

    def as_text(self) -> str:
        lines = [f"{k:<24} {v:.4g}" for k, v in self.margins.items()]
        lines.append(f"{'min margin':<24} {self.min_margin:.4g}")
        lines.append(f"{'k_B T / hbar [rad/s]':<24} {self.thermal_frequency:.4g}")
        lines.append(f"{'Q Omega_M [rad/s]':<24} {self.q_omega:.4g}")
        lines.append(f"flags: {', '.join(self.flags) or 'none'}")
        return "\n".join(lines)


def regime_validator(p: PulseParams, temperature: float | None = None) -> RegimeReport:
    """Margins of n_th Gamma_M << 1/tau << g << kappa << Omega_M.

    Each margin is the ratio of the larger to the smaller side; a link is
    flagged when its margin does not exceed 1.
    """
    dec = p.n_th * p.mech_damping * p.tau
    margins = {
        "decoherence (1/(nGt))": math.inf if dec == 0 else 1 / dec,
        "interaction (g tau)": p.g * p.tau,
        "weak coupling (k/g)": p.kappa / p.g,
        "sideband (W/k)": p.mech_freq / p.kappa,
    }
    names = {
        "decoherence (1/(nGt))": "decoherence",
        "interaction (g tau)": "short_pulse",
        "weak coupling (k/g)": "strong_coupling",
        "sideband (W/k)": "unresolved_sideband",
    }
    flags = tuple(names[k] for k, v in margins.items() if not v > 1)
    if temperature is None:
        tf = p.n_th * HBAR * p.mech_freq / HBAR
    else:
        tf = thermal_frequency(temperature)
    q_omega = p.mech_Q * p.mech_freq
    return RegimeReport(
        margins=margins,
        min_margin=min(margins.values()),
        flags=flags,
        thermal_frequency=tf,
        q_omega=q_omega,
        q_omega_margin=math.inf if tf == 0 else q_omega / tf,
    )


def bath_occupation(mech_freq: float, temperature: float) -> float:
    return bose_occupation(mech_freq, temperature)
