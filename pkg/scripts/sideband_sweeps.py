"""Output-mode entanglement at the Stokes/anti-Stokes pair versus filter length and temperature.

Writes sweeps/epsilon.csv and sweeps/temperature.csv (plus SVGs).
"""

from __future__ import annotations

import argparse
import math
from pathlib import Path

import numpy as np

from optomech import output_modes as om
from optomech import presets
from optomech.io import svg_plot, write_csv, write_text


def pair_entanglement(p, eps):
    W = p.mech_freq
    return float(om.sideband_entanglement_scan(p, [W], eps).log_negativity[0])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="sweeps")
    ap.add_argument("--eps-points", type=int, default=8)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    p = presets.system_params("fig2")

    # eps on multiples of 2 pi keeps the -W / +W pair orthogonal
    eps = 2 * math.pi * np.unique(np.round(np.geomspace(1, 50, args.eps_points)))
    en_eps = np.array([pair_entanglement(p, e) for e in eps])
    write_csv(out / "epsilon.csv", {"epsilon": eps, "E_N": en_eps}, {"preset": "fig2", "T_K": p.temperature})
    write_text(out / "epsilon.svg", svg_plot([("E_N", eps, en_eps)], title="E_N vs filter length",
                                             xlabel="log10 epsilon", ylabel="E_N", logx=True))

    temps = np.array(presets.get_preset("fig2").value("temperatures"))
    en_T = np.array([pair_entanglement(p.replace(temperature=T), 10 * math.pi) for T in temps])
    write_csv(out / "temperature.csv", {"T_K": temps, "E_N": en_T}, {"preset": "fig2", "epsilon": 10 * math.pi})
    write_text(out / "temperature.svg", svg_plot([("E_N", temps, en_T)], title="E_N vs temperature",
                                                 xlabel="T [K]", ylabel="E_N"))
    for e, v in zip(eps, en_eps):
        print(f"eps = {e:8.3f}   E_N = {v:.4f}")
    for T, v in zip(temps, en_T):
        print(f"T = {T:5.1f} K   E_N = {v:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
