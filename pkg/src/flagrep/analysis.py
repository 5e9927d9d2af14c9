"""Summary statistics over sampled and decoded shots."""

from __future__ import annotations

import math
from collections import Counter
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, stats

from .decoder import CATEGORIES
from .graph import node_moments, pair_probability
from .noise import CalibrationModel

DISPLAY_MAX = 0.2
HISTOGRAM_FLOOR = 1e-5


def binomial_rate(failures: int, shots: int) -> Tuple[float, float]:
    if shots < 1:
        raise ValueError("empty group")
    p = failures / shots
    return p, math.sqrt(p * (1 - p) / shots)


def logical_error_rate(groups: Mapping[str, Sequence[bool]]) -> Tuple[float, float]:
    """Mean failure rate over prepared states, with binomial standard error.

    ``groups`` maps a prepared state to its per-shot failure flags.
    """
    if not groups:
        raise ValueError("empty group")
    rates, errs = [], []
    for flags in groups.values():
        flags = np.asarray(flags, dtype=bool)
        p, se = binomial_rate(int(flags.sum()), flags.size)
        rates.append(p)
        errs.append(se)
    k = len(rates)
    return float(np.mean(rates)), math.sqrt(sum(e * e for e in errs)) / k


def wilson_interval(failures: int, shots: int, confidence: float = 0.95) -> Tuple[float, float]:
    z = stats.norm.ppf(0.5 + confidence / 2)
    p = failures / shots
    den = 1 + z * z / shots
    centre = (p + z * z / (2 * shots)) / den
    half = z * math.sqrt(p * (1 - p) / shots + z * z / (4 * shots * shots)) / den
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == shots else min(1.0, centre + half)
    return lo, hi


def fit_suppression(distances: Sequence[int], failures: Sequence[int], shots: Sequence[int],
                    max_lambda: float = 1e6) -> float:
    """Suppression factor from a binomial maximum-likelihood fit.

    Model: ``p(d) = A * Lambda ** (-(d + 1) / 2)``. Zero-failure points enter
    the likelihood like any other; the estimate is capped at ``max_lambda``.
    """
    x = (np.asarray(distances, dtype=float) + 1) / 2
    k = np.asarray(failures, dtype=float)
    n = np.asarray(shots, dtype=float)
    if k.sum() == 0:
        raise ValueError("no failures at any distance; suppression is not identifiable")

    def nll(params):
        log_a, log_lam = params
        p = np.clip(np.exp(log_a - log_lam * x), 1e-300, 1 - 1e-12)
        return -np.sum(k * np.log(p) + (n - k) * np.log1p(-p))

    p0 = np.clip(k / n, 1e-6, None)
    slope = -np.polyfit(x, np.log(p0), 1)[0]
    start = [math.log(p0[0]) + slope * x[0], max(slope, 0.1)]
    res = optimize.minimize(nll, start, method="L-BFGS-B",
                            bounds=[(-60, 5), (-10, math.log(max_lambda))])
    return float(math.exp(res.x[1]))


def defect_counts(syndromes: np.ndarray) -> np.ndarray:
    s = np.asarray(syndromes)
    return s.reshape(len(s), -1).sum(axis=1)


def defect_histogram(syndromes: np.ndarray, floor: float = HISTOGRAM_FLOOR) -> Dict[int, float]:
    """Fraction of shots per defect count, keeping counts above ``floor``."""
    counts = defect_counts(syndromes)
    n = len(counts)
    hist = Counter(int(c) for c in counts)
    return {c: hist[c] / n for c in sorted(hist) if hist[c] / n > floor}


def defect_rate_per_round(syndromes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Mean defect rate as (R+1, d-1) per syndrome and its per-round average."""
    rates = np.asarray(syndromes, dtype=float).mean(axis=0)
    return rates, rates.mean(axis=1)


def _order(rounds_plus_one: int, ns: int, ordering: str) -> np.ndarray:
    nodes = np.arange(rounds_plus_one * ns)
    if ordering == "space-time":
        return nodes
    if ordering == "time-space":
        t, s = np.divmod(nodes, ns)
        return nodes[np.lexsort((t, s))]
    raise ValueError(f"unknown ordering {ordering!r}")


def correlation_matrix(syndromes: np.ndarray, ordering: str = "space-time"
                       ) -> Tuple[np.ndarray, np.ndarray]:
    """Pairwise edge probabilities for all node pairs.

    Returns ``(matrix, above_display)``: negative estimates are clipped to 0,
    the diagonal is 0, and ``above_display`` marks entries over 0.2 (kept raw).
    """
    s = np.asarray(syndromes)
    if len(s) < 2:
        raise ValueError("need at least 2 shots")
    mean, pair = node_moments(s)
    p, _ = pair_probability(mean[:, None], mean[None, :], pair)
    np.fill_diagonal(p, 0.0)
    idx = _order(s.shape[1], s.shape[2], ordering)
    p = p[np.ix_(idx, idx)]
    return p, p > DISPLAY_MAX


def node_labels(rounds: int, ns: int, ordering: str) -> List[str]:
    idx = _order(rounds + 1, ns, ordering)
    return [f"t{i // ns}_s{i % ns + 1}" for i in idx]


def category_ratios(categories: Iterable[str]) -> Dict[str, float]:
    cats = list(categories)
    if not cats:
        raise ValueError("no decode results")
    c = Counter(cats)
    return {k: c[k] / len(cats) for k in CATEGORIES}


def ecdf(values: Sequence[float]) -> List[Tuple[float, float]]:
    v = np.sort(np.asarray(values, dtype=float))
    n = len(v)
    pts: List[Tuple[float, float]] = []
    for i, x in enumerate(v):
        if pts and pts[-1][0] == x:
            pts[-1] = (float(x), (i + 1) / n)
        else:
            pts.append((float(x), (i + 1) / n))
    return pts


def gate_error_ecdf(calib: CalibrationModel, qubits: Iterable[int]) -> Dict[str, dict]:
    """ECDF points and mean of ECR, sqrt(X) and readout errors over ``qubits``.

    ECR entries cover couplers with both ends inside the subset.
    """
    qs = sorted(set(qubits))
    if not qs:
        raise ValueError("empty qubit subset")
    chosen = set(qs)
    values = {
        "ecr": [p for pair, p in sorted(calib.pairs.items(), key=lambda kv: sorted(kv[0]))
                if pair <= chosen],
        "sx": [calib.qubit(q).sx_error for q in qs],
        "readout": [calib.qubit(q).readout_error for q in qs],
    }
    out = {}
    for kind, vals in values.items():
        if vals:
            out[kind] = {"points": ecdf(vals), "mean": float(np.mean(vals))}
    return out
