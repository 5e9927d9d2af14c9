"""Logical error rate versus distance for each flag count, with fitted suppression factor.

    python3 scripts/suppression_sweep.py --scale 0.3 --shots 10000
"""

import argparse
import json
import time
from dataclasses import asdict, dataclass, field
from typing import List

from flagrep import analysis
from flagrep.noise import load_bundled, load_calibration
from flagrep.pipeline import run_memory


@dataclass
class SweepConfig:
    distances: List[int] = field(default_factory=lambda: [3, 5, 7, 9])
    flags: List[int] = field(default_factory=lambda: [0, 1, 2])
    states: List[str] = field(default_factory=lambda: ["0", "1", "+", "-"])
    rounds: int = 10
    shots: int = 10_000
    scale: float = 0.3
    seed: int = 0
    calib: str = ""
    backend: str = "hardware"


def run(cfg: SweepConfig) -> dict:
    calib = load_calibration(cfg.calib) if cfg.calib else load_bundled()
    calib = calib.scaled(cfg.scale)
    rows = []
    for f in cfg.flags:
        fails = []
        for d in cfg.distances:
            t0 = time.time()
            k = sum(int(run_memory(d, f, s, cfg.rounds, cfg.shots, cfg.seed, calib,
                                   cfg.backend).decoded["failure"].sum()) for s in cfg.states)
            n = cfg.shots * len(cfg.states)
            lo, hi = analysis.wilson_interval(k, n)
            rows.append({"flags": f, "distance": d, "failures": k, "shots": n, "rate": k / n,
                         "wilson_95": [lo, hi]})
            fails.append(k)
            print(f"f={f} d={d}: {k}/{n} = {k / n:.2e}  [{lo:.1e}, {hi:.1e}]  "
                  f"({time.time() - t0:.0f}s)", flush=True)
        try:
            lam = analysis.fit_suppression(cfg.distances, fails, [n] * len(fails))
            print(f"f={f}: Lambda = {lam:.3g}")
        except ValueError as exc:
            lam = None
            print(f"f={f}: {exc}")
        rows.append({"flags": f, "suppression_factor": lam})
    return {"config": asdict(cfg), "results": rows}


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in asdict(SweepConfig()).items():
        kind = type(default[0]) if isinstance(default, list) else type(default)
        p.add_argument("--" + name, type=kind, default=default,
                       nargs="+" if isinstance(default, list) else None)
    p.add_argument("--json", help="write results here")
    args = vars(p.parse_args())
    out = args.pop("json")
    result = run(SweepConfig(**args))
    if out:
        with open(out, "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
