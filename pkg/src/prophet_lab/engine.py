"""Simulation engines: vectorized Monte-Carlo and exact small-n enumeration.

Monte-Carlo determinism contract: replications are generated in fixed blocks
of 1024 by a counter-based generator (numpy Philox) keyed by (seed, block
index), and block results are reduced in block order. Outputs are therefore
bit-identical for any worker count and any scheduling; the PROPHET_LAB_THREADS
environment variable only caps the thread pool.

Ranks are simulated through one uniform draw per item: relative ranks of the
draws match relative ranks of the items, so every record and rank statistic
is available without sorting, and the accepted item's identity is recovered
as the rank of its draw within the row.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations

import numpy as np

from .alpha import AlphaEstimate, estimate_alpha_by_simulation
from .errors import ConfigurationError, InvalidParameterError
from .model import ArrivalOrder, Instance, expected_phase_max, run_two_phase
from .strategies import PolicySpec, SingleThresholdFamily, TableScheduleFamily, ThresholdSchedule, ceil_frac

BLOCK = 1024  # replications per RNG block; part of the deterministic contract


def _worker_count(requested: int | None) -> int:
    count = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("PROPHET_LAB_THREADS")
    if cap is not None:
        try:
            count = min(count, int(cap))
        except ValueError as exc:
            raise ConfigurationError("PROPHET_LAB_THREADS must be an integer") from exc
    return max(1, count)


def _first_true(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    idx = mask.argmax(axis=1)
    has = mask[np.arange(mask.shape[0]), idx]
    return has, idx


def _phase1_sec(U: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accept the first Phase-1 record after position m. Returns (pm1, acc1, t)."""
    rows = U.shape[0]
    pm1 = np.minimum.accumulate(U[:, :n], axis=1)
    if m < n:
        rec = U[:, m:n] == pm1[:, m:n]
        has, idx = _first_true(rec)
        acc1 = np.where(has, m + idx, -1)
    else:
        acc1 = np.full(rows, -1, dtype=np.int64)
    t = np.where(acc1 >= 0, acc1 + 1, n).astype(np.int64)
    return pm1, acc1.astype(np.int64), t


def _kernel_sec(U, n, m):
    _, acc1, t = _phase1_sec(U, n, m)
    return acc1, np.full(U.shape[0], -1, dtype=np.int64), t


def _kernel_sop(U, n, m):
    rows = U.shape[0]
    if m == 0:
        # empty window: take the first item of each phase
        acc1 = np.zeros(rows, dtype=np.int64)
        acc2 = np.full(rows, n, dtype=np.int64)
        return acc1, acc2, np.ones(rows, dtype=np.int64)
    obs_min = np.minimum.accumulate(U[:, :m], axis=1)[:, -1]
    if m < n:
        has1, idx1 = _first_true(U[:, m:n] < obs_min[:, None])
        acc1 = np.where(has1, m + idx1, -1).astype(np.int64)
    else:
        acc1 = np.full(rows, -1, dtype=np.int64)
    t = np.where(acc1 >= 0, acc1 + 1, n).astype(np.int64)
    has2, idx2 = _first_true(U[:, n:] < obs_min[:, None])
    acc2 = np.where(has2, n + idx2, -1).astype(np.int64)
    return acc1, acc2, t


def _kernel_tps(U, n, m):
    _, acc1, t = _phase1_sec(U, n, m)
    rows = U.shape[0]
    if m < n:
        pm2 = np.minimum.accumulate(U[:, n:], axis=1)
        rec = U[:, n + m :] == pm2[:, m:]
        has2, idx2 = _first_true(rec)
        acc2 = np.where(has2, n + m + idx2, -1).astype(np.int64)
    else:
        acc2 = np.full(rows, -1, dtype=np.int64)
    return acc1, acc2, t


def _kernel_wai(U, n, m):
    """Waiting Phase 2; also the single-threshold rank policy, which coincides."""
    rows = U.shape[0]
    pm1, acc1, t = _phase1_sec(U, n, m)
    pm1_at_t = pm1[np.arange(rows), t - 1]
    pm2 = np.minimum.accumulate(U[:, n:], axis=1)
    rec_all = U[:, n:] == np.minimum(pm2, pm1_at_t[:, None])
    cutoff = np.ceil((n + t) / math.e - 1e-9).astype(np.int64)
    start = np.maximum(cutoff - t, 0)  # 0-based Phase-2 column where k > cutoff begins
    eligible = np.arange(n)[None, :] >= start[:, None]
    has2, idx2 = _first_true(rec_all & eligible)
    acc2 = np.where(has2, n + idx2, -1).astype(np.int64)
    return acc1, acc2, t


def _kernel_rpi_table(U, n, m, family: TableScheduleFamily):
    rows = U.shape[0]
    _, acc1, t = _phase1_sec(U, n, m)

    schedules = [list(s.thresholds) for s in family.schedules]
    K = max(len(s) for s in schedules)
    padded = np.array([s + [1.0] * (K - len(s)) for s in schedules])  # threshold 1 never fires
    p_grid = np.asarray(family.p_grid)
    p_row = t / (n + t)
    grid_idx = np.searchsorted(p_grid, p_row + 1e-12, side="right") - 1
    if (grid_idx < 0).any():
        raise ConfigurationError(f"no schedule tabulated for p <= {float(p_row.min())}")
    cut = np.ceil(padded[grid_idx] * (n + t)[:, None] - 1e-9).astype(np.int64)

    # standing board: K best Phase-1 draws actually revealed (positions < t)
    masked = np.where(np.arange(n)[None, :] < t[:, None], U[:, :n], np.inf)
    if K > n:  # fewer candidates than board slots; pad so the partition is defined
        masked = np.hstack([masked, np.full((rows, K - n), np.inf)])
    board = np.sort(np.partition(masked, K - 1, axis=1)[:, :K], axis=1)

    acc2 = np.full(rows, -1, dtype=np.int64)
    done = np.zeros(rows, dtype=bool)
    row_ix = np.arange(rows)
    for jj in range(n):
        u = U[:, n + jj]
        better = (board < u[:, None]).sum(axis=1)
        take = ~done & (better < K) & (t + jj + 1 > cut[row_ix, np.minimum(better, K - 1)])
        acc2 = np.where(take, n + jj, acc2)
        done |= take
        if done.all():
            break
        carry = u.copy()
        for col in range(K):
            lo = np.minimum(board[:, col], carry)
            carry = np.maximum(board[:, col], carry)
            board[:, col] = lo
    return acc1, acc2, t


def _dispatch(spec: PolicySpec, U: np.ndarray, n: int):
    m = ceil_frac(spec.x, n)
    if spec.kind == "sec":
        return _kernel_sec(U, n, m)
    if spec.kind == "sop":
        return _kernel_sop(U, n, m)
    if spec.kind == "tps":
        return _kernel_tps(U, n, m)
    if spec.kind == "wai":
        return _kernel_wai(U, n, m)
    if isinstance(spec.family, SingleThresholdFamily):
        return _kernel_wai(U, n, m)
    return _kernel_rpi_table(U, n, m, spec.family)


def _accepted_values(U, values, acc):
    """Payoff and top-item flag for accepted positions (-1 = none)."""
    rows = U.shape[0]
    payoff = np.zeros(rows)
    top = np.zeros(rows, dtype=bool)
    got = acc >= 0
    if got.any():
        ix = np.nonzero(got)[0]
        u = U[ix, acc[ix]]
        rank = (U[ix] < u[:, None]).sum(axis=1)  # 0-based identity of the accepted item
        payoff[ix] = values[rank]
        top[ix] = rank == 0
    return payoff, top


@dataclass(frozen=True)
class SimulationReport:
    """Aggregate of one Monte-Carlo run; all floats are full precision."""

    strategy: dict
    instance: str
    n: int
    reps: int
    seed: int
    lam: float
    mean_phase1: float
    mean_phase2: float
    prophet_mean: float
    ratio: float
    ratio_ci_halfwidth: float
    accept_v1_prob: float
    accept_v1_phase1_prob: float
    accept_v1_phase2_prob: float

    def to_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "instance": self.instance,
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "lambda": self.lam,
            "mean_phase1": self.mean_phase1,
            "mean_phase2": self.mean_phase2,
            "prophet_mean": self.prophet_mean,
            "ratio": self.ratio,
            "ratio_ci_halfwidth": self.ratio_ci_halfwidth,
            "accept_v1_prob": self.accept_v1_prob,
            "accept_v1_phase1_prob": self.accept_v1_phase1_prob,
            "accept_v1_phase2_prob": self.accept_v1_phase2_prob,
        }
        return out

    @staticmethod
    def from_dict(d: dict) -> "SimulationReport":
        return SimulationReport(
            strategy=d["strategy"],
            instance=d["instance"],
            n=d["n"],
            reps=d["reps"],
            seed=d["seed"],
            lam=d["lambda"],
            mean_phase1=d["mean_phase1"],
            mean_phase2=d["mean_phase2"],
            prophet_mean=d["prophet_mean"],
            ratio=d["ratio"],
            ratio_ci_halfwidth=d["ratio_ci_halfwidth"],
            accept_v1_prob=d["accept_v1_prob"],
            accept_v1_phase1_prob=d["accept_v1_phase1_prob"],
            accept_v1_phase2_prob=d["accept_v1_phase2_prob"],
        )


def monte_carlo(
    spec: PolicySpec,
    instance: Instance,
    reps: int,
    seed: int,
    lam: float = 0.5,
    threads: int | None = None,
    label: str = "custom",
    return_stop_times: bool = False,
):
    """Monte-Carlo estimate of the lambda-weighted performance ratio.

    ratio = (1-lam) * E[Phase-1 payoff]/E[max Phase 1]
          +    lam  * E[Phase-2 payoff]/E[max Phase 2],
    with exact combinatorial denominators; on a one-hot instance at lam = 1/2
    the ratio therefore equals accept_v1_prob exactly. The confidence
    half-width is the plug-in normal approximation 1.96 * sd / sqrt(reps) of
    the lambda-weighted payoff, denominators treated as constants.
    """
    if reps < 1:
        raise InvalidParameterError("reps must be >= 1")
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError("lambda must lie in [0, 1]")
    n = instance.n
    values = np.asarray(instance.values)
    seed64 = seed & (2**64 - 1)

    def run_block(block_index: int):
        lo = block_index * BLOCK
        rows = min(BLOCK, reps - lo)
        gen = np.random.Generator(np.random.Philox(key=np.array([seed64, block_index], dtype=np.uint64)))
        U = gen.random((rows, 2 * n))
        acc1, acc2, t = _dispatch(spec, U, n)
        y1, top1 = _accepted_values(U, values, acc1)
        y2, top2 = _accepted_values(U, values, acc2)
        return (
            float(y1.sum()),
            float(y2.sum()),
            float((y1 * y1).sum()),
            float((y2 * y2).sum()),
            float((y1 * y2).sum()),
            int(top1.sum()),
            int(top2.sum()),
            np.bincount(t, minlength=n + 1),
        )

    nblocks = -(-reps // BLOCK)
    workers = _worker_count(threads)
    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run_block, range(nblocks)))
    else:
        parts = [run_block(b) for b in range(nblocks)]

    s1 = s2 = q1 = q2 = q12 = 0.0
    c1 = c2 = 0
    stop_counts = np.zeros(n + 1, dtype=np.int64)
    for part in parts:  # fixed reduction order keeps float sums bit-stable
        s1 += part[0]
        s2 += part[1]
        q1 += part[2]
        q2 += part[3]
        q12 += part[4]
        c1 += part[5]
        c2 += part[6]
        stop_counts += part[7]

    phase_max = expected_phase_max(instance)
    mean1 = s1 / reps
    mean2 = s2 / reps
    var1 = max(q1 / reps - mean1 * mean1, 0.0)
    var2 = max(q2 / reps - mean2 * mean2, 0.0)
    cov = q12 / reps - mean1 * mean2
    w_var = ((1 - lam) ** 2 * var1 + lam**2 * var2 + 2 * lam * (1 - lam) * cov) / phase_max**2
    # raw-sum form keeps the Dirac lam=1/2 identity ratio == accept_v1_prob
    # exact in floating point (payoff sums are integers there)
    ratio = ((1 - lam) * s1 + lam * s2) / (phase_max * reps)

    report = SimulationReport(
        strategy=spec.descriptor(),
        instance=label,
        n=n,
        reps=reps,
        seed=seed,
        lam=lam,
        mean_phase1=mean1,
        mean_phase2=mean2,
        prophet_mean=2.0 * phase_max,
        ratio=ratio,
        ratio_ci_halfwidth=1.96 * math.sqrt(max(w_var, 0.0) / reps),
        accept_v1_prob=(c1 + c2) / reps,
        accept_v1_phase1_prob=c1 / reps,
        accept_v1_phase2_prob=c2 / reps,
    )
    if return_stop_times:
        return report, stop_counts
    return report


@dataclass(frozen=True)
class ExactReport:
    """Exact expectations over every arrival order; probabilities are Fractions."""

    n: int
    lam: Fraction
    expected_phase1: Fraction
    expected_phase2: Fraction
    prophet_mean: Fraction
    ratio: Fraction
    accept_v1_prob: Fraction
    accept_v1_phase1_prob: Fraction
    accept_v1_phase2_prob: Fraction
    stop_time: tuple[Fraction, ...]


def exhaustive(spec: PolicySpec, instance: Instance, lam: float = 0.5) -> ExactReport:
    """Enumerate all (2n)! arrival orders through the reference process.

    Exact rational arithmetic end to end (floats are dyadic, so Fraction
    conversion is lossless). Refuses n > 4.
    """
    n = instance.n
    if n > 4:
        raise InvalidParameterError("exhaustive enumeration is limited to n <= 4")
    if not 0.0 <= lam <= 1.0:
        raise InvalidParameterError("lambda must lie in [0, 1]")
    values = instance.values
    lam_f = Fraction(lam)

    total = 0
    sum1 = Fraction(0)
    sum2 = Fraction(0)
    prophet1 = Fraction(0)
    prophet2 = Fraction(0)
    top1 = top2 = 0
    stop_counts = [0] * (n + 1)

    for perm in permutations(range(2 * n)):
        order = ArrivalOrder(sigma=perm)
        outcome = run_two_phase(instance, order, spec.build(n))
        total += 1
        sum1 += Fraction(outcome.phase1_value)
        sum2 += Fraction(outcome.phase2_value)
        prophet1 += Fraction(max(values[i] for i in perm[:n]))
        prophet2 += Fraction(max(values[i] for i in perm[n:]))
        stop_counts[outcome.phase1_stop] += 1
        for pos in outcome.accepted_positions:
            if perm[pos - 1] == 0:
                if pos <= n:
                    top1 += 1
                else:
                    top2 += 1

    m1 = prophet1 / total
    m2 = prophet2 / total
    e1 = sum1 / total
    e2 = sum2 / total
    return ExactReport(
        n=n,
        lam=lam_f,
        expected_phase1=e1,
        expected_phase2=e2,
        prophet_mean=m1 + m2,
        ratio=(1 - lam_f) * e1 / m1 + lam_f * e2 / m2,
        accept_v1_prob=Fraction(top1 + top2, total),
        accept_v1_phase1_prob=Fraction(top1, total),
        accept_v1_phase2_prob=Fraction(top2, total),
        stop_time=tuple(Fraction(c, total) for c in stop_counts),
    )


def stop_time_histogram(x: float, n: int, reps: int, seed: int) -> np.ndarray:
    """Counts of the Phase-1 stop position for the record rule with window ceil(x*n)."""
    if n < 1 or reps < 1:
        raise InvalidParameterError("need n >= 1 and reps >= 1")
    m = ceil_frac(x, n)
    seed64 = seed & (2**64 - 1)
    counts = np.zeros(n + 1, dtype=np.int64)
    nblocks = -(-reps // BLOCK)
    for b in range(nblocks):
        rows = min(BLOCK, reps - b * BLOCK)
        gen = np.random.Generator(np.random.Philox(key=np.array([seed64, b], dtype=np.uint64)))
        U = gen.random((rows, n))
        pm = np.minimum.accumulate(U, axis=1)
        if m < n:
            has, idx = _first_true(U[:, m:] == pm[:, m:])
            t = np.where(has, m + idx + 1, n)
        else:
            t = np.full(rows, n)
        counts += np.bincount(t, minlength=n + 1)
    return counts


@dataclass(frozen=True)
class TuneResult:
    schedule: ThresholdSchedule
    estimate: AlphaEstimate
    candidates: int


def tune_schedule(
    p: float,
    K: int,
    grid_step: float,
    n: int = 400,
    reps: int = 4000,
    seed: int = 7,
) -> TuneResult:
    """Exhaustive grid search over nondecreasing threshold vectors.

    Every candidate is scored with estimate_alpha_by_simulation under common
    random numbers (same seed), so the search is deterministic in its inputs.
    """
    if not 1 <= K <= 4:
        raise InvalidParameterError("K must lie in 1..4")
    if not 0.01 <= grid_step <= 1.0:
        raise InvalidParameterError("grid_step must lie in [0.01, 1]")
    points = [round(i * grid_step, 9) for i in range(int(1.0 / grid_step) + 1)]
    if points[-1] < 1.0:
        points.append(1.0)
    # thresholds below p cannot fire before the samples run out; drop them
    points = [q for q in points if q >= p - 1e-12]
    if not points:
        raise InvalidParameterError("infeasible grid: no threshold reaches p")

    best: tuple[ThresholdSchedule, AlphaEstimate] | None = None
    count = 0
    for combo in combinations_with_replacement(points, K):
        schedule = ThresholdSchedule(thresholds=combo)
        est = estimate_alpha_by_simulation(p, schedule, n=n, reps=reps, seed=seed)
        count += 1
        if best is None or est.value > best[1].value:
            best = (schedule, est)
    assert best is not None
    return TuneResult(schedule=best[0], estimate=best[1], candidates=count)
