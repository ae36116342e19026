"""Command-line front end.

    optomech squeeze --preset fig1 --out runs/fig1
    optomech jumps --preset fig4c --trajectories 16 --seed 7
    optomech pulsed --n0 0 --r 0
    optomech presets

Overrides use ``--set key=value``; frequencies need a unit suffix
(Hz, kHz, MHz, GHz are cycles per second and become 2 pi nu; rad/s is taken
as is).  Exit codes: 0 ok, 1 domain error, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fock_sme, interference, output_modes, presets, pulsed, squeezing, transfer
from .errors import ConfigError, OptomechError, UnstableSystem
from .gaussian import build_drift_diffusion, check_stable, log_negativity, solve_lyapunov
from .io import svg_plot, write_csv, write_manifest, write_text
from .params import TWO_PI, bose_occupation

PROTOCOLS = ("squeeze", "sidebands", "steady", "transfer", "jumps", "interference", "pulsed")
DEFAULT_PRESET = {
    "squeeze": "fig1",
    "sidebands": "fig2",
    "steady": "fig5",
    "transfer": "fig2",
    "jumps": "fig4c",
    "interference": "fig8",
    "pulsed": "pulsed",
}
FORMATS = ("csv", "svg", "both")

_UNITS = {"hz": TWO_PI, "khz": TWO_PI * 1e3, "mhz": TWO_PI * 1e6, "ghz": TWO_PI * 1e9, "rad/s": 1.0}
_QTY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/]+)?\s*$")

# override key -> kind; "freq" values need a unit suffix
OVERRIDES = {
    "squeeze": {
        "mech_freq": "freq", "cavity_decay": "freq", "detuning": "freq", "coupling": "freq",
        "mass": "float", "mech_Q": "float", "temperature": "float", "input_power": "float",
        "cavity_length": "float", "wavelength": "float",
    },
    "sidebands": {
        "mech_freq": "freq", "cavity_decay": "freq", "detuning": "freq", "coupling": "freq",
        "mass": "float", "mech_Q": "float", "temperature": "float", "input_power": "float",
        "cavity_length": "float", "wavelength": "float", "epsilon": "float", "half_span": "float",
    },
    "steady": {
        "mech_freq": "freq", "cavity_decay": "freq", "detuning": "freq",
        "mass": "float", "mech_Q": "float", "temperature": "float", "input_power": "float",
        "cavity_length": "float", "wavelength": "float", "max_power_ratio": "float",
    },
    "transfer": {
        "mech_freq": "freq", "cavity_decay": "freq", "detuning": "freq", "coupling": "freq",
        "mass": "float", "mech_Q": "float", "temperature": "float", "input_power": "float",
        "cavity_length": "float", "wavelength": "float",
        "N": "float", "bandwidth": "freq", "center_detuning": "freq",
    },
    "jumps": {
        "measurement_rate": "float", "kappa": "float", "gamma": "float", "n_th": "float",
        "efficiency": "float", "dim": "int", "t_final": "float",
    },
    "interference": {"eta": "float", "mech_freq": "freq", "temperature": "float", "roundtrips": "float"},
    "pulsed": {
        "g": "freq", "kappa": "freq", "mech_freq": "freq", "tau": "float",
        "n0": "float", "r": "float", "temperature": "float", "mech_Q": "float",
    },
}


def parse_frequency(text) -> float:
    """'10 MHz' -> 2 pi 1e7 rad/s; '3.2e6 rad/s' -> 3.2e6.  A unit is required."""
    m = _QTY.match(str(text))
    if not m or not m.group(2):
        raise ConfigError(f"frequency {text!r} needs a unit (Hz, kHz, MHz, GHz or rad/s)")
    unit = m.group(2).lower()
    if unit not in _UNITS:
        raise ConfigError(f"unknown frequency unit {m.group(2)!r}")
    try:
        return float(m.group(1)) * _UNITS[unit]
    except ValueError:
        raise ConfigError(f"bad number in {text!r}") from None


def parse_override(protocol: str, key: str, raw: str):
    kinds = OVERRIDES[protocol]
    if key not in kinds:
        raise ConfigError(f"unknown parameter {key!r} for {protocol}; allowed: {', '.join(sorted(kinds))}")
    kind = kinds[key]
    if kind == "freq":
        return parse_frequency(raw)
    try:
        return int(raw) if kind == "int" else float(raw)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    preset: str | None = None
    overrides: dict = field(default_factory=dict)
    out: str = "runs"
    seed: int = 0
    grid_points: int | None = None
    format: str = "csv"
    trajectories: int = 16
    workers: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.preset is not None:
            presets.get_preset(self.preset)
        if self.grid_points is not None and self.grid_points < 2:
            raise ConfigError("grid_points must be at least 2")
        if self.trajectories < 1:
            raise ConfigError("trajectories must be positive")
        for k in self.overrides:
            if k not in OVERRIDES[self.protocol]:
                raise ConfigError(f"unknown parameter {k!r} for {self.protocol}")

    @property
    def preset_name(self) -> str:
        return self.preset or DEFAULT_PRESET[self.protocol]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(exc)) from exc
        return cls.from_dict(d)


# ----------------------------------------------------------- protocols


def _header(cfg: RunConfig, **extra) -> dict:
    h = {"protocol": cfg.protocol, "preset": cfg.preset_name, "seed": cfg.seed}
    for k, v in sorted(cfg.overrides.items()):
        h[f"override {k}"] = v
    h.update(extra)
    return h


def _emit(cfg, out, stem, columns, header, plot=None):
    files = []
    if cfg.format in ("csv", "both"):
        files.append(write_csv(out / f"{stem}.csv", columns, header))
    if plot is not None and cfg.format in ("svg", "both"):
        files.append(write_text(out / f"{stem}.svg", svg_plot(**plot)))
    return files


def _system(cfg: RunConfig):
    ov = {k: v for k, v in cfg.overrides.items() if k in {
        "mech_freq", "cavity_decay", "detuning", "coupling", "mass", "mech_Q",
        "temperature", "input_power", "cavity_length", "wavelength"}}
    return presets.system_params(cfg.preset_name, **ov)


def run_squeeze(cfg: RunConfig, out: Path):
    p = _system(cfg)
    grid = squeezing.default_grid(p, n=cfg.grid_points or 2000)
    sp = squeezing.compute_spectra(p, grid)
    x = sp.omega / p.mech_freq
    cols = {
        "omega_over_Omega_M": x,
        "S_opt_dB": sp.s_opt_db,
        "phi_opt_rad": sp.phi_opt,
        "S_X": sp.s_x,
        "S_Y": sp.s_y,
        "S_XY": sp.s_xy,
    }
    head = _header(cfg, units="spectra in shot-noise units; phi in rad", g_rad_s=p.linearized_coupling)
    plot = dict(series=[("S_opt [dB]", x, sp.s_opt_db)], title="optimal squeezing", xlabel="omega / Omega_M",
                ylabel="dB", logx=True)
    files = _emit(cfg, out, "squeeze", cols, head, plot)
    if cfg.format in ("svg", "both"):
        files.append(write_text(out / "phi_opt.svg", svg_plot(
            [("phi_opt", x, sp.phi_opt)], title="optimal phase", xlabel="omega / Omega_M", ylabel="rad", logx=True)))
    return files


def run_sidebands(cfg: RunConfig, out: Path):
    p = _system(cfg)
    eps = cfg.overrides.get("epsilon", presets.get_preset(cfg.preset_name).value("epsilon"))
    half = cfg.overrides.get("half_span", 0.6) * p.mech_freq
    grid = output_modes.sideband_scan_grid(p, eps, half)
    if cfg.grid_points:
        grid = grid[:: max(1, len(grid) // cfg.grid_points)]
    scan = output_modes.sideband_entanglement_scan(p, grid, eps, workers=cfg.workers)
    x = scan.parameter / p.mech_freq
    head = _header(cfg, epsilon=eps, omega1="-Omega_M")
    plot = dict(series=[("E_N", x, scan.log_negativity)], title=f"sideband entanglement, eps = {eps:.4g}",
                xlabel="Omega_2 / Omega_M", ylabel="E_N")
    return _emit(cfg, out, "sidebands", {"omega2_over_Omega_M": x, "E_N": scan.log_negativity}, head, plot)


def run_steady(cfg: RunConfig, out: Path):
    p = _system(cfg)
    n = cfg.grid_points or 41
    top = cfg.overrides.get("max_power_ratio", 2.0)
    ratios = np.linspace(0.0, top, n)
    en = np.empty(n)
    stable = np.empty(n, dtype=int)
    for i, r in enumerate(ratios):
        q = p.replace(input_power=p.input_power * r)
        dd = build_drift_diffusion(q)
        try:
            check_stable(dd.drift)
        except UnstableSystem:
            en[i], stable[i] = 0.0, 0
            continue
        V = solve_lyapunov(dd.drift, dd.diffusion)
        en[i], stable[i] = log_negativity(V), 1
    head = _header(cfg, reference_power_W=p.input_power, detuning_over_Omega_M=p.detuning / p.mech_freq)
    plot = dict(series=[("E_N", ratios, en)], title="intracavity entanglement", xlabel="P / P0", ylabel="E_N")
    return _emit(cfg, out, "steady", {"power_ratio": ratios, "E_N": en, "stable": stable}, head, plot)


def run_transfer(cfg: RunConfig, out: Path):
    p = _system(cfg)
    N = cfg.overrides.get("N", 1.0)
    bw = cfg.overrides.get("bandwidth", math.inf)
    ds = cfg.overrides.get("center_detuning", -p.mech_freq)
    sq = transfer.SqueezedInputParams.pure(N, b_x=bw, center_detuning=ds)
    g_eff = transfer.effective_damping(p)
    phis = np.linspace(-math.pi / 2, math.pi / 2, cfg.grid_points or 181)
    white = np.array([transfer.transferred_variance(sq, f, p.mech_damping, g_eff, p.n_th) for f in phis])
    col = transfer.colored_transferred_variance(p, sq, 0.0)
    colored = np.array([col.variance_at(f) for f in phis])
    rep = transfer.squeezing_condition_report(p, sq)
    head = _header(cfg, gamma_eff_rad_s=g_eff, flags=" ".join(rep.flags) or "none",
                   bandwidth_regime=rep.bandwidth_regime, recommendation=rep.recommendation)
    plot = dict(series=[("white", phis, white), ("colored", phis, colored)], title="mechanical quadrature variance",
                xlabel="phi [rad]", ylabel="variance (ground = 1/2)")
    return _emit(cfg, out, "transfer", {"phi_rad": phis, "variance_white": white, "variance_colored": colored},
                 head, plot)


def run_jumps(cfg: RunConfig, out: Path):
    ov = {k: v for k, v in cfg.overrides.items() if k != "t_final"}
    p = presets.sme_params(cfg.preset_name, seed=cfg.seed, **ov)
    t_final = cfg.overrides.get("t_final", presets.get_preset(cfg.preset_name).value("t_final"))
    n_steps = int(round(t_final / p.time_step))
    target = cfg.grid_points or 2000
    every = max(1, n_steps // target)
    recs = fock_sme.run_ensemble(p, t_final, fock_sme.TruncatedState.fock(0, p.dim), cfg.trajectories, every)
    files = []
    head = _header(cfg, measurement_rate=p.measurement_rate, dt=p.time_step, record_every=every,
                   time_unit="1/gamma")
    width = len(str(cfg.trajectories - 1))
    for j, r in enumerate(recs):
        cols = {"t": r.t, "dW": r.dW, "n_cond": r.n_cond, "level": r.level}
        h = dict(head, trajectory=j, plateau_fraction=r.plateau_fraction())
        files += _emit(cfg, out, f"trajectory_{j:0{width}d}", cols, h)
    t, mean, se = fock_sme.ensemble_statistics(recs)
    plot = dict(series=[(f"traj {j}", r.t, r.n_cond) for j, r in enumerate(recs[:3])] + [("mean", t, mean)],
                title="conditional phonon number", xlabel="gamma t", ylabel="<n>")
    files += _emit(cfg, out, "ensemble", {"t": t, "mean": mean, "stderr": se}, head, plot)
    return files


def run_interference(cfg: RunConfig, out: Path):
    pr = presets.get_preset(cfg.preset_name)
    if cfg.preset_name == "feasibility":
        N = cfg.overrides.get("roundtrips", pr.value("roundtrips"))
        rep = interference.feasibility(pr.value("cavity_length"), pr.value("wavelength"), pr.value("mass"), N,
                                       pr.value("survival"), pr.value("transmission"), pr.value("mech_Q"),
                                       cfg.overrides.get("temperature", pr.value("temperature")))
        return [write_text(out / "feasibility.txt", rep.as_text() + "\n")]
    eta = cfg.overrides.get("eta", pr.value("eta"))
    w = cfg.overrides.get("mech_freq", TWO_PI * pr.value("mech_freq"))
    temps = [cfg.overrides["temperature"]] if "temperature" in cfg.overrides else pr.value("temperatures")
    n = cfg.grid_points or 2001
    cols, series = {}, []
    for T in temps:
        ip = interference.InterferometerParams.thermal(eta, w, T)
        t = np.linspace(0, ip.period, n)
        v = interference.visibility_thermal(ip, t)
        cols.setdefault("t_over_period", t / ip.period)
        cols[f"visibility_T{T:g}"] = 2 * np.abs(v)
        cols[f"phase_T{T:g}"] = np.angle(v)
        series.append((f"T = {T:g} K", t / ip.period, 2 * np.abs(v)))
    head = _header(cfg, eta=eta, mech_freq_rad_s=w)
    plot = dict(series=series, title="single-photon visibility", xlabel="t / period", ylabel="visibility")
    return _emit(cfg, out, "interference", cols, head, plot)


def run_pulsed(cfg: RunConfig, out: Path):
    p, T = presets.pulse_params(cfg.preset_name)
    ov = cfg.overrides
    T = ov.get("temperature", T)
    w = ov.get("mech_freq", p.mech_freq)
    p = pulsed.PulseParams(
        g=ov.get("g", p.g), kappa=ov.get("kappa", p.kappa), mech_freq=w,
        tau=ov.get("tau", p.tau), n0=ov.get("n0", p.n0),
        n_th=bose_occupation(w, T), mech_damping=w / ov.get("mech_Q", p.mech_Q),
    )
    r = ov.get("r", p.r)
    n0 = p.n0
    files = []
    row = {
        "n0": [n0], "r": [r], "Delta_EPR": [pulsed.epr_variance(n0, r)],
        "r0": [pulsed.entanglement_threshold(n0)], "added_variance": [pulsed.teleportation_noise(n0, r)[0]],
    }
    files += _emit(cfg, out, "pulsed", row, _header(cfg))
    rs = np.linspace(0, max(3.0, 1.5 * r), cfg.grid_points or 301)
    curve = np.array([pulsed.epr_variance(n0, x) for x in rs])
    plot = dict(series=[("Delta_EPR", rs, curve), ("threshold", rs, np.full_like(rs, 2.0))],
                title=f"EPR variance, n0 = {n0:g}", xlabel="r", ylabel="Delta_EPR")
    files += _emit(cfg, out, "epr_curve", {"r": rs, "Delta_EPR": curve}, _header(cfg, n0=n0), plot)
    rep = pulsed.regime_validator(p, T)
    files.append(write_text(out / "regime.txt", rep.as_text() + "\n"))
    return files


RUNNERS = {
    "squeeze": run_squeeze,
    "sidebands": run_sidebands,
    "steady": run_steady,
    "transfer": run_transfer,
    "jumps": run_jumps,
    "interference": run_interference,
    "pulsed": run_pulsed,
}


def run(cfg: RunConfig) -> list[Path]:
    out = Path(cfg.out)
    files = RUNNERS[cfg.protocol](cfg, out)
    # the output location is not an input: leave it out so reruns elsewhere hash the same
    inputs = {k: v for k, v in cfg.to_dict().items() if k != "out"}
    files.append(write_manifest(out, inputs, files))
    return files


# -------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optomech", description="Optomechanics protocol calculators.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("presets", help="list parameter presets")
    for name in PROTOCOLS:
        sp = sub.add_parser(name)
        sp.add_argument("--preset")
        sp.add_argument("--out", default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--grid-points", type=int)
        sp.add_argument("--format", choices=FORMATS, default="csv")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        sp.add_argument("--workers", type=int, default=0)
        if name == "jumps":
            sp.add_argument("--trajectories", type=int, default=16)
        if name == "pulsed":
            sp.add_argument("--n0")
            sp.add_argument("--r")
    return ap


def config_from_args(ns) -> RunConfig:
    overrides = {}
    for item in ns.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = parse_override(ns.command, k.strip(), v)
    for k in ("n0", "r"):
        if getattr(ns, k, None) is not None:
            overrides[k] = parse_override(ns.command, k, getattr(ns, k))
    return RunConfig(
        protocol=ns.command,
        preset=ns.preset,
        overrides=overrides,
        out=ns.out or f"runs/{ns.command}",
        seed=ns.seed,
        grid_points=ns.grid_points,
        format=ns.format,
        trajectories=getattr(ns, "trajectories", 16),
        workers=ns.workers,
    )


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.command == "presets":
        print(presets.list_presets())
        return 0
    try:
        cfg = config_from_args(ns)
        files = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OptomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
