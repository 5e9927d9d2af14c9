"""Mean S / T / ST edge weights of hardware-based and sample-based graphs.

    python3 scripts/weight_table.py --distance 9 --rounds 10 --shots 20000
"""

import argparse
from dataclasses import dataclass

from flagrep.graph import build_sample_graph, edge_weight_summary
from flagrep.noise import load_bundled
from flagrep.pipeline import run_memory


@dataclass
class WeightConfig:
    distance: int = 9
    rounds: int = 10
    shots: int = 20_000
    state: str = "0"
    seed: int = 0
    scale: float = 1.0


def main(cfg: WeightConfig):
    calib = load_bundled().scaled(cfg.scale)
    print(f"d={cfg.distance} R={cfg.rounds} state={cfg.state} scale={cfg.scale}")
    print(f"{'f':>2} {'graph':>9} {'S':>7} {'T':>7} {'ST':>7}")
    for f in (0, 1, 2):
        res = run_memory(cfg.distance, f, cfg.state, cfg.rounds, cfg.shots, cfg.seed, calib)
        sampled = build_sample_graph(res.syndromes, res.layout, cfg.rounds)
        for name, g in (("hardware", res.graph), ("sample", sampled)):
            w = edge_weight_summary(g)
            print(f"{f:>2} {name:>9} " + " ".join(f"{w.get(k, float('nan')):7.3f}"
                                                 for k in ("S", "T", "ST")))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(WeightConfig()).items():
        p.add_argument("--" + name, type=type(default), default=default)
    main(WeightConfig(**vars(p.parse_args())))
