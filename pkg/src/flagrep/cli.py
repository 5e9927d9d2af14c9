"""Command-line entry point: ``flagrep <subcommand> [options]``.

Each subcommand reads its inputs from and writes its outputs to ``--out``::

    build-circuit -> meta.json, circuit.txt
    sample        -> shots.txt
    syndromes     -> syndromes.csv
    graph         -> edges.csv
    decode        -> decode.csv
    analyze       -> report.json, histogram.csv, defect_rates.csv, correlation_*.csv
    sweep         -> one directory per configuration plus report.json and
                     logical_error_rates.csv at the top level
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analysis
from .chain import InfeasibleChainError
from .circuit import (STATE_BASIS, STATES, CircuitError, data_measurement_slots, normalize_state,
                      parse_circuit)
from .decoder import CATEGORIES, decode_batch
from .frame import read_shots, sample, write_shots
from .graph import (ModelError, build_hardware_graph, build_sample_graph, edge_weight_summary,
                    read_edges_csv, write_edges_csv)
from .noise import CalibrationError, MappingError, bundled_calibration_path, load_calibration
from .pauli import ParameterError, build_layout
from .pipeline import config_seed, noisy_circuit
from .syndrome import compute_syndromes, read_syndromes_csv, write_syndromes_csv

log = logging.getLogger("flagrep")


class UsageError(RuntimeError):
    pass


@dataclass
class RunConfig:
    distances: List[int] = field(default_factory=lambda: [3, 5, 7, 9])
    flags: List[int] = field(default_factory=lambda: [0, 1, 2])
    states: List[str] = field(default_factory=lambda: list(STATES))
    rounds: int = 10
    shots: int = 1000
    seed: int = 0
    calib: Optional[str] = None
    scale: float = 1.0
    backend: str = "hardware"
    out: Optional[str] = None
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.shots < 1:
            raise ParameterError("shots must be >= 1")
        if self.rounds < 1:
            raise ParameterError("rounds must be >= 1")
        if self.backend not in ("hardware", "sample"):
            raise ParameterError(f"backend must be hardware or sample, got {self.backend!r}")
        self.states = [normalize_state(s) for s in self.states]
        for f in self.flags:
            if f not in (0, 1, 2):
                raise ParameterError(f"flag count must be 0, 1 or 2, got {f}")
        for d in self.distances:
            if d < 3:
                raise ParameterError(f"distance must be >= 3, got {d}")
        if self.out is None:
            self.out = os.environ.get("FLAGREP_OUT", "flagrep_out")
        return self


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def _str_list(text: str) -> List[str]:
    return [x for x in text.replace(",", " ").split()]


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    values = asdict(RunConfig())
    values["out"] = None
    if args.config:
        data = json.loads(Path(args.config).read_text())
        unknown = set(data) - set(values)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for name in [f.name for f in fields(RunConfig)]:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values).validate()


def _calibration(cfg: RunConfig):
    path = cfg.calib or bundled_calibration_path()
    calib = load_calibration(path)
    return calib.scaled(cfg.scale) if cfg.scale != 1.0 else calib


def _dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _need(path: Path, producer: str) -> Path:
    if not path.exists():
        raise UsageError(f"missing {path}; run `{producer}` first")
    return path


def _meta(out: Path) -> dict:
    return json.loads(_need(out / "meta.json", "build-circuit").read_text())


def _layout(meta: dict):
    return build_layout(meta["distance"], meta["flags"], meta["basis"])


# subcommands --------------------------------------------------------------

def cmd_build_circuit(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    state = normalize_state(args.state or cfg.states[0])
    d, f = cfg.distances[0], cfg.flags[0]
    layout = build_layout(d, f, STATE_BASIS[state])
    circ, mapping = noisy_circuit(layout, cfg.rounds, state, _calibration(cfg))
    (out / "circuit.txt").write_text(circ.to_text())
    _dump_json(out / "meta.json", {
        "distance": d, "flags": f, "basis": layout.basis, "rounds": cfg.rounds, "state": state,
        "mapping": [mapping[q] for q in range(layout.n_qubits)],
        "calib": str(cfg.calib) if cfg.calib else "bundled:kyoto_avg.json", "scale": cfg.scale,
        "seed": cfg.seed, "shots": cfg.shots, "circuit_sha256": circ.digest(),
    })


def cmd_sample(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    meta = _meta(out)
    circ = parse_circuit(_need(out / "circuit.txt", "build-circuit").read_text())
    seed = config_seed(cfg.seed, meta["distance"], meta["flags"], meta["state"])
    write_shots(out / "shots.txt", sample(circ, cfg.shots, seed, threads=cfg.threads))


def cmd_syndromes(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    meta = _meta(out)
    bits = read_shots(_need(out / "shots.txt", "sample"))
    layout = _layout(meta)
    syn = compute_syndromes(bits, layout, meta["rounds"], meta["state"])
    write_syndromes_csv(out / "syndromes.csv", syn, layout, meta["rounds"])


def cmd_graph(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    meta = _meta(out)
    layout = _layout(meta)
    if cfg.backend == "hardware":
        circ = parse_circuit(_need(out / "circuit.txt", "build-circuit").read_text())
        g = build_hardware_graph(circ, layout, meta["rounds"])
    else:
        syn = read_syndromes_csv(_need(out / "syndromes.csv", "syndromes"), layout, meta["rounds"])
        g = build_sample_graph(syn, layout, meta["rounds"])
    write_edges_csv(out / "edges.csv", g)


def _write_decode(path: Path, res: Dict[str, np.ndarray]) -> None:
    lines = ["shot,defect_count,category,failure"]
    for i, (c, k, f) in enumerate(zip(res["defect_count"], res["category"], res["failure"])):
        lines.append(f"{i},{int(c)},{k},{int(bool(f))}")
    path.write_text("\n".join(lines) + "\n")


def _read_decode(path: Path) -> Dict[str, np.ndarray]:
    rows = [ln.split(",") for ln in path.read_text().splitlines()[1:] if ln]
    return {"defect_count": np.array([int(r[1]) for r in rows]),
            "category": np.array([r[2] for r in rows]),
            "failure": np.array([r[3] == "1" for r in rows])}


def cmd_decode(cfg: RunConfig, args) -> None:
    out = Path(cfg.out)
    meta = _meta(out)
    g = read_edges_csv(_need(out / "edges.csv", "graph"))
    layout = _layout(meta)
    syn = read_syndromes_csv(_need(out / "syndromes.csv", "syndromes"), layout, meta["rounds"])
    bits = read_shots(_need(out / "shots.txt", "sample"))
    data = bits[:, data_measurement_slots(layout, meta["rounds"])]
    _write_decode(out / "decode.csv", decode_batch(g, syn, data, meta["state"], cfg.threads))


def _matrix_csv(path: Path, mat: np.ndarray, labels: List[str], ordering: str) -> None:
    lines = [f"# ordering={ordering}", "node," + ",".join(labels)]
    for lab, row in zip(labels, mat):
        lines.append(lab + "," + ",".join(repr(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def analyze_dir(out: Path) -> dict:
    meta = _meta(out)
    layout = _layout(meta)
    rounds = meta["rounds"]
    syn = read_syndromes_csv(_need(out / "syndromes.csv", "syndromes"), layout, rounds)
    dec = _read_decode(_need(out / "decode.csv", "decode"))
    g = read_edges_csv(_need(out / "edges.csv", "graph"))
    hist = analysis.defect_histogram(syn)
    rates, avg = analysis.defect_rate_per_round(syn)
    fails = int(dec["failure"].sum())
    p, se = analysis.binomial_rate(fails, len(dec["failure"]))
    (out / "histogram.csv").write_text(
        "defect_count,probability\n" + "".join(f"{k},{v!r}\n" for k, v in hist.items()))
    lines = ["t," + ",".join(f"s{s + 1}" for s in range(layout.n_synd)) + ",average"]
    for t in range(rounds + 1):
        lines.append(f"{t}," + ",".join(repr(float(v)) for v in rates[t]) + f",{float(avg[t])!r}")
    (out / "defect_rates.csv").write_text("\n".join(lines) + "\n")
    if len(syn) >= 2:
        for ordering in ("space-time", "time-space"):
            mat, _ = analysis.correlation_matrix(syn, ordering)
            _matrix_csv(out / f"correlation_{ordering}.csv", mat,
                        analysis.node_labels(rounds, layout.n_synd, ordering), ordering)
    report = {
        "config": {k: meta[k] for k in ("distance", "flags", "basis", "rounds", "state")},
        "shots": int(len(dec["failure"])),
        "failures": fails,
        "logical_error_rate": p,
        "stderr": se,
        "defect_histogram": {str(k): v for k, v in hist.items()},
        "category_ratios": analysis.category_ratios(dec["category"]),
        "edge_weight_summary": edge_weight_summary(g),
        "graph_warnings": g.warnings,
    }
    _dump_json(out / "report.json", report)
    return report


def cmd_analyze(cfg: RunConfig, args) -> None:
    analyze_dir(Path(cfg.out))


def run_sweep(cfg: RunConfig) -> dict:
    root = Path(cfg.out)
    root.mkdir(parents=True, exist_ok=True)
    calib = _calibration(cfg)
    summary = []
    for f in cfg.flags:
        for d in cfg.distances:
            per_state = {}
            for state in cfg.states:
                sub = root / f"d{d}_f{f}_{'plus' if state == '+' else 'minus' if state == '-' else state}"
                sub.mkdir(exist_ok=True)
                log.info("d=%d f=%d state=%s", d, f, state)
                sub_cfg = RunConfig(**{**asdict(cfg), "out": str(sub), "distances": [d],
                                       "flags": [f], "states": [state]})
                layout = build_layout(d, f, STATE_BASIS[state])
                circ, mapping = noisy_circuit(layout, cfg.rounds, state, calib)
                (sub / "circuit.txt").write_text(circ.to_text())
                _dump_json(sub / "meta.json", {
                    "distance": d, "flags": f, "basis": layout.basis, "rounds": cfg.rounds,
                    "state": state, "mapping": [mapping[q] for q in range(layout.n_qubits)],
                    "calib": str(cfg.calib) if cfg.calib else "bundled:kyoto_avg.json",
                    "scale": cfg.scale, "seed": cfg.seed, "shots": cfg.shots,
                    "circuit_sha256": circ.digest()})
                seed = config_seed(cfg.seed, d, f, state)
                bits = sample(circ, cfg.shots, seed, threads=cfg.threads)
                write_shots(sub / "shots.txt", bits)
                syn = compute_syndromes(bits, layout, cfg.rounds, state)
                write_syndromes_csv(sub / "syndromes.csv", syn, layout, cfg.rounds)
                g = (build_hardware_graph(circ, layout, cfg.rounds) if cfg.backend == "hardware"
                     else build_sample_graph(syn, layout, cfg.rounds))
                write_edges_csv(sub / "edges.csv", g)
                data = bits[:, data_measurement_slots(layout, cfg.rounds)]
                res = decode_batch(g, syn, data, state, cfg.threads)
                _write_decode(sub / "decode.csv", res)
                analyze_dir(sub)
                per_state[state] = res["failure"]
            rate, se = analysis.logical_error_rate(per_state)
            summary.append({"distance": d, "flags": f, "rounds": cfg.rounds,
                            "states": list(per_state), "shots_per_state": cfg.shots,
                            "failures": int(sum(int(v.sum()) for v in per_state.values())),
                            "logical_error_rate": rate, "stderr": se})
    lines = ["distance,flags,rounds,shots_per_state,failures,logical_error_rate,stderr"]
    for r in summary:
        lines.append(f"{r['distance']},{r['flags']},{r['rounds']},{r['shots_per_state']},"
                     f"{r['failures']},{r['logical_error_rate']!r},{r['stderr']!r}")
    (root / "logical_error_rates.csv").write_text("\n".join(lines) + "\n")
    for r in summary:
        n = r["shots_per_state"] * len(r["states"])
        r["wilson_95"] = list(analysis.wilson_interval(r["failures"], n))
    suppression = {}
    for f in cfg.flags:
        rows = [r for r in summary if r["flags"] == f]
        try:
            lam = analysis.fit_suppression([r["distance"] for r in rows],
                                           [r["failures"] for r in rows],
                                           [r["shots_per_state"] * len(r["states"]) for r in rows])
        except ValueError:
            lam = None
        suppression[str(f)] = lam
    report = {"config": {k: v for k, v in asdict(cfg).items() if k not in ("out", "threads")},
              "logical_error_rates": summary, "suppression_factor": suppression}
    _dump_json(root / "report.json", report)
    return report


def cmd_sweep(cfg: RunConfig, args) -> None:
    run_sweep(cfg)


COMMANDS = {
    "build-circuit": cmd_build_circuit,
    "sample": cmd_sample,
    "syndromes": cmd_syndromes,
    "graph": cmd_graph,
    "decode": cmd_decode,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--distance", dest="distances", type=_int_list,
                        help="code distance(s), e.g. '3,5,7,9'")
    common.add_argument("--flags", type=_int_list, help="flag counts, e.g. '0,1,2'")
    common.add_argument("--states", type=_str_list, help="logical states among 0,1,+,-")
    common.add_argument("--state", help="single logical state for build-circuit")
    common.add_argument("--rounds", type=int)
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--calib", help="calibration JSON (default: bundled kyoto_avg.json)")
    common.add_argument("--scale", type=float, help="multiply every error rate")
    common.add_argument("--backend", choices=["hardware", "sample"])
    common.add_argument("--out", help="output directory (fallback: $FLAGREP_OUT)")
    common.add_argument("--threads", type=int)
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="flagrep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg, args)
    except (UsageError, ParameterError, CalibrationError, MappingError, CircuitError,
            InfeasibleChainError, ModelError, FileNotFoundError, ValueError) as exc:
        print(f"flagrep {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
