"""Parameter records and unit adapters.

Internal conventions
--------------------
* Frequencies and rates are angular (rad/s).
* ``cavity_decay`` is the field amplitude decay rate: without drive the
  intracavity amplitude decays as exp(-kappa t).  The full width at half
  maximum of the cavity line (in rad/s) is therefore ``2 * cavity_decay``.
* Quadratures are x = (b + b^dag)/sqrt(2), so the vacuum variance is 1/2.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from scipy import constants as _const

from .errors import ParameterError

HBAR = _const.hbar
KB = _const.k
C_LIGHT = _const.c
TWO_PI = 2.0 * math.pi


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal occupation 1/(exp(hbar omega / kT) - 1); zero at T = 0."""
    if temperature < 0:
        raise ParameterError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (KB * temperature))


def decay_from_finesse(length: float, finesse: float) -> float:
    """Amplitude decay rate of a Fabry-Perot cavity, pi c / (L F).

    The free spectral range is pi c / L (rad/s) and the full linewidth is
    FSR / F; the amplitude decay rate is half of that.
    """
    return math.pi * C_LIGHT / (length * finesse)


def decay_from_bandwidth_hz(bandwidth_hz: float) -> float:
    """Amplitude decay rate for a quoted full cavity bandwidth in Hz."""
    return math.pi * bandwidth_hz


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Optomechanical parameter record (SI units, angular frequencies).

    ``coupling`` optionally fixes the linearized coupling g directly; when
    omitted it is derived from the drive as g0 * alpha_s.
    """

    mass: float
    mech_freq: float
    mech_Q: float
    temperature: float
    cavity_decay: float
    cavity_length: float
    wavelength: float
    input_power: float
    detuning: float = 0.0
    finesse: float | None = None
    coupling: float | None = None

    def __post_init__(self):
        for name in ("mass", "mech_freq", "mech_Q", "cavity_decay", "cavity_length", "wavelength"):
            _positive(name, getattr(self, name))
        if not (self.temperature >= 0 and math.isfinite(self.temperature)):
            raise ParameterError("temperature must be non-negative")
        if not (self.input_power >= 0 and math.isfinite(self.input_power)):
            raise ParameterError("input_power must be non-negative")
        if not math.isfinite(self.detuning):
            raise ParameterError("detuning must be finite")
        if self.finesse is not None:
            _positive("finesse", self.finesse)
        if self.coupling is not None and not (self.coupling >= 0 and math.isfinite(self.coupling)):
            raise ParameterError("coupling must be non-negative")

    @classmethod
    def from_finesse(cls, *, finesse: float, cavity_length: float, **kw) -> "SystemParams":
        kappa = decay_from_finesse(cavity_length, finesse)
        return cls(cavity_decay=kappa, cavity_length=cavity_length, finesse=finesse, **kw)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    @property
    def mech_damping(self) -> float:
        return self.mech_freq / self.mech_Q

    @property
    def n_th(self) -> float:
        return bose_occupation(self.mech_freq, self.temperature)

    @property
    def laser_freq(self) -> float:
        return TWO_PI * C_LIGHT / self.wavelength

    @property
    def x_zpf(self) -> float:
        """sqrt(hbar / (m Omega_M)); position unit of the dimensionless quadrature."""
        return math.sqrt(HBAR / (self.mass * self.mech_freq))

    @property
    def length_coupling(self) -> float:
        """Frequency pull per unit displacement, omega_L / L (rad s^-1 m^-1)."""
        return self.laser_freq / self.cavity_length

    @property
    def single_photon_coupling(self) -> float:
        """g0 = (omega_L / L) sqrt(hbar / (m Omega_M))."""
        return self.length_coupling * self.x_zpf

    @property
    def steady_amplitude(self) -> float:
        return steady_amplitude(self)

    @property
    def linearized_coupling(self) -> float:
        if self.coupling is not None:
            return self.coupling
        return self.single_photon_coupling * steady_amplitude(self)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def steady_amplitude(p: SystemParams) -> float:
    """Stationary intracavity amplitude alpha_s for the drive ``p.input_power``.

    alpha_s = sqrt(2 k P / (hbar omega_L)) / sqrt(k^2/4 + Delta^2) with
    k = 2 * cavity_decay the full linewidth.  Equivalently alpha_s is the
    fixed point of d(alpha)/dt = -(k/2 + i Delta) alpha + sqrt(2 k P / hbar omega_L),
    with the phase reference chosen so that alpha_s is real.
    """
    k_full = 2.0 * p.cavity_decay
    flux = p.input_power / (HBAR * p.laser_freq)
    return math.sqrt(2.0 * k_full * flux) / math.sqrt(k_full**2 / 4.0 + p.detuning**2)
