"""Single-photon Michelson interferometer with one arm ending on a movable
micromirror.

A photon in arm A kicks the mirror into |beta e^{-i W t} + eta (1 - e^{-i W t})>
(up to a phase) while the arm-B mirror state just rotates.  The photon's
off-diagonal element is the overlap of the two mirror states; visibility is
twice its modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .params import C_LIGHT, HBAR, KB, bose_occupation


@dataclass(frozen=True)
class InterferometerParams:
    eta: float
    mech_freq: float
    n_bar: float = 0.0
    beta: complex = 0.0
    mech_damping: float | None = None
    temperature: float | None = None
    mass: float | None = None
    delta_x: float | None = None

    def __post_init__(self):
        if self.eta < 0 or self.n_bar < 0:
            raise ParameterError("need eta >= 0 and n_bar >= 0")
        if not self.mech_freq > 0:
            raise ParameterError("mech_freq must be positive")

    @classmethod
    def thermal(cls, eta: float, mech_freq: float, temperature: float, **kw) -> "InterferometerParams":
        return cls(eta, mech_freq, bose_occupation(mech_freq, temperature), temperature=temperature, **kw)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.mech_freq


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ParameterError("t must be non-negative")
    return t


def _kerr_phase(p: InterferometerParams, t):
    wt = p.mech_freq * t
    return p.eta**2 * (wt - np.sin(wt))


def coherence_pure(p: InterferometerParams, beta: complex | None, t):
    """Off-diagonal element for an initial coherent mirror state |beta>.

    1/2 exp(-eta^2 (1 - cos W t)) exp(i eta^2 (W t - sin W t))
        * exp(2 i eta Im[beta (1 - e^{-i W t})])

    The beta-dependent phase collects one contribution from the displacement
    operator and one from the coherent-state overlap.
    """
    beta = p.beta if beta is None else beta
    t = _check_t(t)
    wt = p.mech_freq * t
    mod = 0.5 * np.exp(-p.eta**2 * (1 - np.cos(wt)))
    beta_phase = 2 * p.eta * np.imag(beta * (1 - np.exp(-1j * wt)))
    return mod * np.exp(1j * (_kerr_phase(p, t) + beta_phase))


def visibility_thermal(p: InterferometerParams, t):
    """Thermal average of ``coherence_pure``; visibility is 2|value|."""
    t = _check_t(t)
    wt = p.mech_freq * t
    mod = 0.5 * np.exp(-p.eta**2 * (2 * p.n_bar + 1) * (1 - np.cos(wt)))
    return mod * np.exp(1j * _kerr_phase(p, t))


def visibility(p: InterferometerParams, t):
    return 2 * np.abs(visibility_thermal(p, t))


def monte_carlo_thermal(p: InterferometerParams, t, samples: int = 100_000, seed: int = 0):
    """Average coherence_pure over beta ~ (1/pi n) exp(-|beta|^2/n).

    Returns (mean, standard error of the real and imaginary parts combined
    as a complex number).
    """
    t = np.atleast_1d(_check_t(t))
    rng = np.random.default_rng(seed)
    s = math.sqrt(p.n_bar / 2)
    beta = s * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
    mean = np.empty(t.size, dtype=complex)
    err = np.empty(t.size, dtype=complex)
    for k, tk in enumerate(t):
        v = coherence_pure(p, beta, tk)
        mean[k] = v.mean()
        err[k] = complex(v.real.std(ddof=1), v.imag.std(ddof=1)) / math.sqrt(samples)
    return mean, err


def decoherence_factor(mech_damping: float, temperature: float, mass: float, delta_x: float, mech_freq: float, t):
    """exp[-(Gamma k T m dx^2 / hbar^2)(t + sin W t cos W t / W)]."""
    if min(mech_damping, temperature, mass, delta_x, mech_freq) < 0 or mech_freq == 0:
        raise ParameterError("decoherence inputs must be non-negative with mech_freq > 0")
    t = _check_t(t)
    rate = mech_damping * KB * temperature * mass * delta_x**2 / HBAR**2
    wt = mech_freq * t
    return np.exp(-rate * (t + np.sin(wt) * np.cos(wt) / mech_freq))


def revival_fwhm(p: InterferometerParams, rtol: float = 1e-6) -> float:
    """Full width at half maximum of the visibility peak at t = 2 pi / W.

    Bisection on the modulus over the half-period before the revival.
    """
    T = p.period
    peak = float(visibility(p, T))
    half = 0.5 * peak
    floor = float(visibility(p, T / 2))
    if floor >= half:
        return math.inf
    lo, hi = 0.0, T / 2  # offset from the revival
    while hi - lo > rtol * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if visibility(p, T - mid) > half:
            lo = mid
        else:
            hi = mid
    return 2 * 0.5 * (lo + hi)


def revival_width_estimate(p: InterferometerParams) -> float:
    """2 / (eta W sqrt(n))."""
    if p.eta == 0 or p.n_bar == 0:
        return math.inf
    return 2 / (p.eta * p.mech_freq * math.sqrt(p.n_bar))


# -------------------------------------------------------------- feasibility


@dataclass(frozen=True)
class FeasibilityReport:
    roundtrips: float
    condition_value: float
    mech_freq: float
    q_margin: float
    revival_width: float
    required_loss: float
    survival: float
    condition_ok: bool
    q_ok: bool

    def as_text(self) -> str:
        lines = [
            f"roundtrips N            {self.roundtrips:.4g}",
            f"condition value         {self.condition_value:.4f} ({'ok' if self.condition_ok else 'below 1'})",
            f"mech_freq / 2pi [Hz]    {self.mech_freq / (2 * math.pi):.4g}",
            f"Q / n_th                {self.q_margin:.4g} ({'ok' if self.q_ok else 'below 1'})",
            f"revival width [s]       {self.revival_width:.4g}",
            f"max loss per reflection {self.required_loss:.3g} (survival {self.survival:.2g})",
        ]
        return "\n".join(lines)


def roundtrips_for_frequency(mech_freq: float, cavity_length: float) -> float:
    """N with 2 N L / c = 2 pi / W."""
    return math.pi * C_LIGHT / (mech_freq * cavity_length)


def feasibility(
    cavity_length: float,
    wavelength: float,
    mass: float,
    roundtrips: float,
    survival: float = 0.01,
    transmission: float = 1e-7,
    mech_Q: float | None = None,
    temperature: float | None = None,
    eta: float = 1.0,
) -> FeasibilityReport:
    """Evaluate the superposition requirement 2 hbar N^3 L / (pi c m lambda^2) >= 1.

    W follows from 2 N L / c = 2 pi / W.  A photon meets 2N mirror
    reflections per mechanical period, so keeping a fraction ``survival``
    bounds the total loss per reflection by 1 - survival^(1/2N); the part
    left after ``transmission`` is the allowed absorption and scatter.
    """
    if min(cavity_length, wavelength, mass, roundtrips) <= 0 or not 0 < survival < 1:
        raise ParameterError("feasibility inputs must be positive and 0 < survival < 1")
    N = roundtrips
    cond = 2 * HBAR * N**3 * cavity_length / (math.pi * C_LIGHT * mass * wavelength**2)
    w = math.pi * C_LIGHT / (N * cavity_length)
    per_reflection = -math.expm1(math.log(survival) / (2 * N))
    loss = per_reflection - transmission
    if temperature is not None and temperature > 0:
        n_th = KB * temperature / (HBAR * w)
        n_bar = bose_occupation(w, temperature)
    else:
        n_th = n_bar = 0.0
    q_margin = math.inf if (mech_Q is None or n_th == 0) else mech_Q / n_th
    width = 2 / (eta * w * math.sqrt(n_bar)) if n_bar > 0 and eta > 0 else math.inf
    return FeasibilityReport(
        roundtrips=N,
        condition_value=cond,
        mech_freq=w,
        q_margin=q_margin,
        revival_width=width,
        required_loss=loss,
        survival=survival,
        condition_ok=cond >= 1,
        q_ok=q_margin >= 1,
    )
