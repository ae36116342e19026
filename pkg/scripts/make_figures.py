"""Regenerate every figure dataset (CSV + SVG) through the optomech CLI."""

from __future__ import annotations

import argparse
from pathlib import Path

from optomech.cli import main as optomech

JOBS = {
    "fig1": ["squeeze", "--preset", "fig1"],
    "fig2": ["sidebands", "--preset", "fig2"],
    "fig5": ["steady", "--preset", "fig5"],
    "transfer": ["transfer", "--preset", "fig2"],
    "fig4a": ["jumps", "--preset", "fig4a"],
    "fig4b": ["jumps", "--preset", "fig4b"],
    "fig4c": ["jumps", "--preset", "fig4c"],
    "fig8": ["interference", "--preset", "fig8"],
    "feasibility": ["interference", "--preset", "feasibility"],
    "pulsed": ["pulsed", "--preset", "pulsed"],
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--outdir", default="figures", help="root output directory (default: figures)")
    p.add_argument("--only", nargs="*", choices=sorted(JOBS), help="subset of jobs to run")
    p.add_argument("--trajectories", type=int, default=8, help="trajectories per fig4 panel")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--workers", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    root = Path(args.outdir)
    status = 0
    for name in args.only or JOBS:
        cmd = JOBS[name] + ["--out", str(root / name), "--format", "both", "--seed", str(args.seed)]
        if cmd[0] == "jumps":
            cmd += ["--trajectories", str(args.trajectories)]
        if cmd[0] == "sidebands":
            cmd += ["--workers", str(args.workers)]
        print(f"[{name}] optomech {' '.join(cmd)}")
        code = optomech(cmd)
        status = max(status, code)
        if code:
            print(f"[{name}] failed with exit code {code}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
