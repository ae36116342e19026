"""Named parameter sets for the figures and worked examples.

Every value is stored with its unit so ``optomech presets`` can print the
full table.  Frequencies quoted as Omega/2pi are stored in Hz and converted
when the parameter objects are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .fock_sme import SMEParams
from .interference import InterferometerParams
from .params import TWO_PI, SystemParams, bose_occupation, decay_from_bandwidth_hz
from .pulsed import PulseParams


@dataclass(frozen=True)
class Preset:
    name: str
    source: str
    protocol: str
    values: dict = field(default_factory=dict)  # name -> (value, unit)

    def value(self, key):
        return self.values[key][0]

    def table(self) -> str:
        rows = [f"{self.name}  [{self.protocol}]  {self.source}"]
        for k, (v, unit) in self.values.items():
            rows.append(f"    {k:<18} {_fmt(v):>24} {unit}")
        return "\n".join(rows)


def _fmt(v):
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


_PRESETS = [
    Preset(
        "fig1",
        "Fig. 1: ponderomotive squeezing, resonant drive",
        "squeeze",
        {
            "cavity_bandwidth": (1e6, "Hz"),
            "cavity_length": (1e-2, "m"),
            "wavelength": (1064e-9, "m"),
            "input_power": (10e-3, "W"),
            "mech_freq": (1e6, "Hz"),
            "mass": (100e-12, "kg"),
            "mech_Q": (1e4, ""),
            "temperature": (4.0, "K"),
            "detuning": (0.0, "rad/s"),
        },
    ),
    Preset(
        "fig2",
        "Fig. 2: Stokes/anti-Stokes output-mode entanglement (base of Figs. 6, 7)",
        "sidebands",
        {
            "mech_freq": (10e6, "Hz"),
            "mech_Q": (1e5, ""),
            "mass": (50e-12, "kg"),
            "cavity_length": (1e-3, "m"),
            "finesse": (2e4, ""),
            "detuning": (1.0, "Omega_M"),
            "input_power": (30e-3, "W"),
            "wavelength": (810e-9, "m"),
            "temperature": (0.4, "K"),
            "epsilon": (10 * math.pi, ""),
            "temperatures": ([0.4, 2.0, 5.0, 10.0, 20.0], "K"),
        },
    ),
    Preset(
        "fig5",
        "Fig. 5: intracavity mirror-light entanglement vs power and detuning",
        "steady",
        {
            "mech_freq": (10e6, "Hz"),
            "mech_Q": (1e5, ""),
            "mass": (10e-12, "kg"),
            "cavity_length": (1e-3, "m"),
            "finesse": (1.67e4, ""),
            "detuning": (1.0, "Omega_M"),
            "input_power": (50e-3, "W"),
            "wavelength": (810e-9, "m"),
            "temperature": (0.4, "K"),
        },
    ),
]

for _tag, _rate in (("a", 0.5), ("b", 5.0), ("c", 50.0)):
    _PRESETS.append(
        Preset(
            f"fig4{_tag}",
            f"Fig. 4({_tag}): conditional phonon number, chi^2/kappa = {_rate:g} gamma",
            "jumps",
            {
                "gamma": (1.0, "1/time unit"),
                "n_th": (0.5, ""),
                "kappa": (5e3, "gamma"),
                "measurement_rate": (_rate, "gamma"),
                "efficiency": (1.0, ""),
                "dim": (14, ""),
                "t_final": (20.0, "1/gamma"),
            },
        )
    )

_PRESETS += [
    Preset(
        "fig8",
        "Fig. 8: single-photon visibility over one mechanical period",
        "interference",
        {
            "eta": (1.0, ""),
            "mech_freq": (500.0, "Hz"),
            "temperatures": ([1e-3, 100e-6, 10e-6], "K"),
        },
    ),
    Preset(
        "feasibility",
        "Superposition workpoint: 5 cm cavity, 10 um mirror (T, Q illustrative)",
        "interference",
        {
            "cavity_length": (0.05, "m"),
            "wavelength": (630e-9, "m"),
            "mass": (5e-12, "kg"),
            "roundtrips": (5.6e6, ""),
            "survival": (0.01, ""),
            "transmission": (1e-7, ""),
            "temperature": (1e-3, "K"),
            "mech_Q": (1e5, ""),
        },
    ),
    Preset(
        "pulsed",
        "Pulsed scheme: illustrative workpoint obeying the regime chain; 100 mK bath",
        "pulsed",
        {
            "mech_freq": (10e6, "Hz"),
            "mech_Q": (1e7, ""),
            "temperature": (0.1, "K"),
            "kappa": (1e6, "Hz"),
            "g": (200e3, "Hz"),
            "tau": (10e-6, "s"),
            "n0": (1.0, ""),
        },
    ),
]

PRESETS = {p.name: p for p in _PRESETS}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None


def list_presets() -> str:
    return "\n\n".join(p.table() for p in _PRESETS)


# ------------------------------------------------------------- builders


def system_params(name: str, **overrides) -> SystemParams:
    pr = get_preset(name)
    v = {k: x for k, (x, _) in pr.values.items()}
    v.update(overrides)
    w = TWO_PI * v["mech_freq"] if "mech_freq" not in overrides else v["mech_freq"]
    det = v.get("detuning", 0.0)
    if pr.values.get("detuning", (0, ""))[1] == "Omega_M" and "detuning" not in overrides:
        det = det * w
    common = dict(
        mass=v["mass"],
        mech_freq=w,
        mech_Q=v["mech_Q"],
        temperature=v["temperature"],
        wavelength=v["wavelength"],
        input_power=v["input_power"],
        detuning=det,
        coupling=v.get("coupling"),
    )
    if "cavity_decay" in overrides:
        return SystemParams(cavity_decay=v["cavity_decay"], cavity_length=v["cavity_length"], **common)
    if "finesse" in v:
        return SystemParams.from_finesse(finesse=v["finesse"], cavity_length=v["cavity_length"], **common)
    return SystemParams(
        cavity_decay=decay_from_bandwidth_hz(v["cavity_bandwidth"]),
        cavity_length=v["cavity_length"],
        **common,
    )


def sme_params(name: str, seed: int = 0, **overrides) -> SMEParams:
    pr = get_preset(name)
    v = {k: x for k, (x, _) in pr.values.items()}
    v.update(overrides)
    return SMEParams.from_rates(
        v["measurement_rate"],
        v["kappa"],
        v["gamma"],
        v["n_th"],
        efficiency=v["efficiency"],
        dim=int(v["dim"]),
        seed=seed,
    )


def interferometer_params(name: str = "fig8", temperature: float | None = None) -> list[InterferometerParams]:
    pr = get_preset(name)
    w = TWO_PI * pr.value("mech_freq")
    temps = pr.value("temperatures") if temperature is None else [temperature]
    return [InterferometerParams.thermal(pr.value("eta"), w, T) for T in temps]


def pulse_params(name: str = "pulsed") -> tuple[PulseParams, float]:
    pr = get_preset(name)
    w = TWO_PI * pr.value("mech_freq")
    T = pr.value("temperature")
    p = PulseParams(
        g=TWO_PI * pr.value("g"),
        kappa=TWO_PI * pr.value("kappa"),
        mech_freq=w,
        tau=pr.value("tau"),
        n0=pr.value("n0"),
        n_th=bose_occupation(w, T),
        mech_damping=w / pr.value("mech_Q"),
    )
    return p, T
