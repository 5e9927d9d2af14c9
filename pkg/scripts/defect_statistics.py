"""Defect-count histogram, per-round defect rate and decoding categories per flag count.

    python3 scripts/defect_statistics.py --distance 3 --shots 10000
"""

import argparse
from dataclasses import dataclass

import numpy as np

from flagrep import analysis
from flagrep.noise import load_bundled
from flagrep.pipeline import run_memory


@dataclass
class DefectConfig:
    distance: int = 3
    rounds: int = 10
    shots: int = 10_000
    state: str = "0"
    seed: int = 0
    scale: float = 1.0


def main(cfg: DefectConfig):
    calib = load_bundled().scaled(cfg.scale)
    for f in (0, 1, 2):
        res = run_memory(cfg.distance, f, cfg.state, cfg.rounds, cfg.shots, cfg.seed, calib)
        hist = analysis.defect_histogram(res.syndromes)
        counts = analysis.defect_counts(res.syndromes)
        _, per_round = analysis.defect_rate_per_round(res.syndromes)
        cats = analysis.category_ratios(res.decoded["category"])
        print(f"\n[[{cfg.distance},1,{cfg.distance}]]_f={f}")
        print(f"  P(0 defects) = {hist.get(0, 0.0):.4f}   P(even) = {np.mean(counts % 2 == 0):.4f}")
        print("  histogram:", {k: round(v, 4) for k, v in list(hist.items())[:12]})
        print("  defect rate per round:", np.round(per_round, 4).tolist())
        print("  categories:", {k: round(v, 4) for k, v in cats.items()})


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(DefectConfig()).items():
        p.add_argument("--" + name, type=type(default), default=default)
    main(DefectConfig(**vars(p.parse_args())))
