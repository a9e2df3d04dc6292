"""Lower bounds on the sample-driven selection ratio alpha(p).

alpha(p) is the best achievable ratio E[accepted value] / E[max online value]
when each of n items is independently pre-observed ("sampled") with
probability p and the rest arrive online in uniform random order. For
p <= 1/e the value is exactly 1/(e*(1-p)). Above 1/e only tabulated anchor
values are available; alpha_lower interpolates them left-constant, which is
safe because alpha is nondecreasing in p.

estimate_alpha_by_simulation cross-checks a threshold schedule empirically by
running the sampled process on a small calibration set of instances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError, InvalidParameterError
from .strategies import ThresholdSchedule

E = math.e
ALPHA_AT_1_OVER_E = 1.0 / (E - 1.0)
ALPHA_CEILING = 0.7452  # known limit value at p -> 1, no anchor may exceed it
ALPHA_AT_HALF = 0.671

_BLOCK = 4096  # replications per RNG block; part of the deterministic contract


@dataclass(frozen=True)
class Anchor:
    p: float
    alpha_lb: float
    source: str = ""


@dataclass(frozen=True)
class AlphaTable:
    """Certified anchors (p_k, alpha_lb_k), p strictly increasing, values nondecreasing."""

    anchors: tuple[Anchor, ...]

    def __post_init__(self):
        prev_p, prev_a = -1.0, 0.0
        for a in self.anchors:
            if not 0.0 < a.p <= 1.0:
                raise ConfigurationError("anchor p must lie in (0, 1]")
            if not 0.0 <= a.alpha_lb <= ALPHA_CEILING:
                raise ConfigurationError(f"anchor alpha_lb must lie in [0, {ALPHA_CEILING}]")
            if a.p <= prev_p:
                raise ConfigurationError("anchor p values must be strictly increasing")
            if a.alpha_lb < prev_a:
                raise ConfigurationError("anchor alpha_lb values must be nondecreasing")
            prev_p, prev_a = a.p, a.alpha_lb


def default_table() -> AlphaTable:
    """The shipped two-anchor table: the closed-form value at 1/e and the p=1/2 anchor."""
    return AlphaTable(
        anchors=(
            Anchor(p=1.0 / E, alpha_lb=ALPHA_AT_1_OVER_E, source="closed form at p = 1/e"),
            Anchor(p=0.5, alpha_lb=ALPHA_AT_HALF, source="reported value for half-sampled instances"),
        )
    )


def alpha_lower(p: float, table: AlphaTable) -> float:
    """Certified lower bound on alpha(p).

    Closed form below 1/e; above it, the largest tabulated anchor with
    p_k <= p, clamped to at least alpha(1/e) = 1/(e-1).
    """
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError("p must lie in [0, 1]")
    if p <= 1.0 / E:
        return 1.0 / (E * (1.0 - p))
    best = None
    for a in table.anchors:
        if a.p <= p + 1e-15:
            best = a.alpha_lb
    if best is None:
        raise ConfigurationError(f"alpha table has no anchor at or below p = {p}")
    return max(best, ALPHA_AT_1_OVER_E)


def load_alpha_table(path: str) -> AlphaTable:
    """Read anchors from JSON {"anchors": [{"p": .., "alpha_lb": .., "source": ..}, ...]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read alpha table: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"alpha table is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("anchors"), list) or not raw["anchors"]:
        raise ConfigurationError('alpha table must be an object with a nonempty "anchors" list')
    anchors = []
    for entry in raw["anchors"]:
        if not isinstance(entry, dict) or "p" not in entry or "alpha_lb" not in entry:
            raise ConfigurationError('each anchor needs "p" and "alpha_lb"')
        anchors.append(Anchor(p=float(entry["p"]), alpha_lb=float(entry["alpha_lb"]), source=str(entry.get("source", ""))))
    return AlphaTable(anchors=tuple(anchors))


@dataclass(frozen=True)
class AlphaEstimate:
    value: float
    ci_halfwidth: float
    by_instance: tuple[tuple[str, float, float], ...]  # (name, ratio, ci_halfwidth)


def _calibration_instances(n: int, seed: int) -> list[tuple[str, np.ndarray]]:
    gen = np.random.Generator(np.random.Philox(key=np.array([seed & (2**64 - 1), 0xCA11], dtype=np.uint64)))
    dirac = np.zeros(n)
    dirac[0] = 1.0
    uniform = np.sort(gen.random(n))[::-1].copy()
    geometric = 0.9 ** np.arange(n)
    return [("dirac", dirac), ("uniform", uniform), ("geometric", geometric)]


def _online_max_mean(values: np.ndarray, p: float) -> float:
    # best online item is the first index not sampled: P = (1-p) * p**(i-1)
    weights = (1.0 - p) * p ** np.arange(len(values))
    return float(values @ weights)


def _sampled_block(values, p, cutoffs, rows, seed, block_index):
    """One RNG block of the sampled process; returns (sum, sum_sq, accept_count)."""
    n = len(values)
    K = len(cutoffs)
    gen = np.random.Generator(
        np.random.Philox(key=np.array([seed & (2**64 - 1), block_index], dtype=np.uint64))
    )
    U = gen.random((rows, n))
    is_sample = gen.random((rows, n)) < p
    sample_count = is_sample.sum(axis=1)

    # K smallest sampled u-values are the standing record board before any arrival
    masked = np.where(is_sample, U, np.inf)
    board = np.sort(np.partition(masked, K - 1, axis=1)[:, :K], axis=1) if K > 1 else masked.min(axis=1)[:, None]

    cut = np.asarray(cutoffs, dtype=np.int64)
    done = np.zeros(rows, dtype=bool)
    accepted_u = np.zeros(rows)
    accepted = np.zeros(rows, dtype=bool)
    online_seen = np.zeros(rows, dtype=np.int64)

    for q in range(n):
        u = U[:, q]
        online = ~is_sample[:, q]
        online_seen += online
        seen_total = sample_count + online_seen
        better = (board < u[:, None]).sum(axis=1)
        eligible = online & ~done & (better < K)
        take = eligible & (seen_total > cut[np.minimum(better, K - 1)])
        accepted_u = np.where(take, u, accepted_u)
        accepted |= take
        done |= take
        # samples sit on the board already; merge only online arrivals
        carry = np.where(online, u, np.inf)
        for col in range(K):
            lo = np.minimum(board[:, col], carry)
            carry = np.maximum(board[:, col], carry)
            board[:, col] = lo
        if done.all():
            break

    payoff = np.zeros(rows)
    if accepted.any():
        rows_idx = np.nonzero(accepted)[0]
        rank = (U[rows_idx] < accepted_u[rows_idx, None]).sum(axis=1)
        payoff[rows_idx] = np.asarray(values)[rank]
    return float(payoff.sum()), float((payoff * payoff).sum()), int(accepted.sum())


def estimate_alpha_by_simulation(
    p: float,
    schedule: ThresholdSchedule,
    n: int = 1000,
    reps: int = 20000,
    seed: int = 1,
) -> AlphaEstimate:
    """Monte-Carlo ratio estimate for a threshold schedule on the sampled process.

    Runs the schedule on a calibration set (dirac, uniform, geometric) and
    returns the smallest per-instance ratio estimate. Denominators are exact,
    E[max online] = sum_i v_i (1-p) p^(i-1). Deterministic in (p, schedule,
    n, reps, seed): replications are generated in fixed blocks of 4096 keyed
    by (seed, block index) and reduced in index order.
    """
    if not 0.0 <= p < 1.0:
        raise InvalidParameterError("p must lie in [0, 1)")
    if n < 2 or reps < 1:
        raise InvalidParameterError("need n >= 2 and reps >= 1")
    if len(schedule.thresholds) >= n:
        raise InvalidParameterError("schedule has more ranks than items")
    cutoffs = schedule.cutoffs(n)

    results = []
    for name, values in _calibration_instances(n, seed):
        denom = _online_max_mean(values, p)
        total = total_sq = 0.0
        block = 0
        left = reps
        while left > 0:
            rows = min(_BLOCK, left)
            s, sq, _ = _sampled_block(values, p, cutoffs, rows, seed, block)
            total += s
            total_sq += sq
            block += 1
            left -= rows
        mean = total / reps
        var = max(total_sq / reps - mean * mean, 0.0)
        ratio = mean / denom
        ci = 1.96 * math.sqrt(var / reps) / denom
        results.append((name, ratio, ci))

    worst = min(results, key=lambda r: r[1])
    return AlphaEstimate(value=worst[1], ci_halfwidth=worst[2], by_instance=tuple(results))
