"""Rank-based stopping policies for the two-phase process.

Five families, all value-oblivious (decisions depend only on reveal positions
and relative ranks):

- sec: observe the first ceil(x*n) Phase-1 items, then accept any Phase-1
  record; never accepts in Phase 2.
- sop: one shared observation window of ceil(x*n) items; each phase accepts
  the first item that beats everything in that window.
- tps: an independent sec run in each phase; Phase-2 records are judged
  against Phase-2 items only.
- wai: sec in Phase 1; in Phase 2, wait until ceil((n+t)/e) items have been
  seen in total, then accept any record against everything seen.
- rpi: sec in Phase 1; in Phase 2, a rank-dependent threshold schedule chosen
  from the fraction p = t/(n+t) of pre-observed items.

A rank-i threshold t_i admits an item once the global seen-count k satisfies
k > ceil(t_i * N), N being the total items of the combined problem. With the
default single-threshold family t_1 = max(p, 1/e) this reduces to
k > max(t, ceil((n+t)/e)), which makes rpi coincide with wai exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError, InvalidParameterError
from .model import RevealEvent

_DECIMAL_SCALE = 10**9


def ceil_frac(x: float, n: int) -> int:
    """Exact ceil(x*n) for x given with at most 9 fractional digits.

    The fraction is rationalized as round(x*1e9)/1e9 before the ceiling, so
    boundary cases like x=0.5, n=2 cannot drift across an integer.
    """
    if not 0.0 <= x <= 1.0:
        raise InvalidParameterError("x must lie in [0, 1]")
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    num = round(x * _DECIMAL_SCALE)
    if num == 0 and x > 0.0:
        # below the decimal grid, but a positive fraction still opens a window
        return min(n, math.ceil(x * n))
    return -(-num * n // _DECIMAL_SCALE)


def count_cutoff(threshold: float, total: int) -> int:
    """Global-count cutoff for a fractional threshold: ceil(threshold*total).

    A 1e-9 nudge keeps clean rationals (0.5 * 4) from drifting upward through
    float noise; thresholds are meaningful to far fewer than 9 digits.
    """
    return max(0, math.ceil(threshold * total - 1e-9))


def e_window_cutoff(total: int) -> int:
    """ceil(total/e), the classical waiting window on `total` items."""
    return math.ceil(total / math.e - 1e-9)


@dataclass(frozen=True)
class ThresholdSchedule:
    """Nondecreasing per-rank thresholds t_1 <= t_2 <= ... in [0, 1]."""

    thresholds: tuple[float, ...]

    def __post_init__(self):
        t = self.thresholds
        if len(t) == 0:
            raise InvalidParameterError("schedule needs at least one threshold")
        for i, v in enumerate(t):
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError("thresholds must lie in [0, 1]")
            if i and v < t[i - 1]:
                raise InvalidParameterError("thresholds must be nondecreasing")

    def cutoffs(self, total: int) -> tuple[int, ...]:
        return tuple(count_cutoff(v, total) for v in self.thresholds)


class SingleThresholdFamily:
    """t_1 = max(p, 1/e) and nothing beyond rank 1; coincides with wai."""

    kind = "single-threshold"

    def schedule_for(self, p: float) -> ThresholdSchedule:
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError("p must lie in [0, 1]")
        return ThresholdSchedule(thresholds=(max(p, 1.0 / math.e),))

    def cutoffs(self, t: int, n: int) -> tuple[int, ...]:
        # max(p, 1/e) * (n+t) with p = t/(n+t) gives max(t, ceil((n+t)/e)).
        return (max(t, e_window_cutoff(n + t)),)

    def descriptor(self) -> str:
        return self.kind


class TableScheduleFamily:
    """Schedules tabulated on a p-grid; lookup takes the largest grid p <= query."""

    kind = "table"

    def __init__(self, p_grid, schedules, origin: str = "table"):
        if len(p_grid) != len(schedules) or not p_grid:
            raise ConfigurationError("p_grid and schedules must be equal-length and nonempty")
        for i, p in enumerate(p_grid):
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError("grid p values must lie in [0, 1]")
            if i and p <= p_grid[i - 1]:
                raise ConfigurationError("p_grid must be strictly increasing")
        self.p_grid = tuple(float(p) for p in p_grid)
        self.schedules = tuple(
            s if isinstance(s, ThresholdSchedule) else ThresholdSchedule(thresholds=tuple(float(v) for v in s))
            for s in schedules
        )
        self.origin = origin

    def schedule_for(self, p: float) -> ThresholdSchedule:
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError("p must lie in [0, 1]")
        idx = None
        for i, g in enumerate(self.p_grid):
            if g <= p + 1e-12:
                idx = i
        if idx is None:
            raise ConfigurationError(f"no schedule tabulated for p <= {p}")
        return self.schedules[idx]

    def cutoffs(self, t: int, n: int) -> tuple[int, ...]:
        return self.schedule_for(t / (n + t)).cutoffs(n + t)

    def descriptor(self) -> str:
        return f"{self.kind}:{self.origin}"


def load_schedule_family(path: str) -> TableScheduleFamily:
    """Read a schedule table from JSON {"p_grid": [...], "schedules": [[...], ...]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read schedule file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"schedule file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "p_grid" not in raw or "schedules" not in raw:
        raise ConfigurationError('schedule file must be an object with "p_grid" and "schedules"')
    try:
        return TableScheduleFamily(raw["p_grid"], raw["schedules"], origin=path)
    except InvalidParameterError as exc:
        raise ConfigurationError(f"schedule file invalid: {exc}") from exc


class Policy:
    """Stateful single-replication policy; engine calls decide() per reveal."""

    def __init__(self, x: float, n: int):
        self.x = x
        self.n = n
        self.window = ceil_frac(x, n)
        self.phase1_seen = 0
        self.phase2_seen = 0

    def _note(self, event: RevealEvent) -> None:
        if event.phase == 1:
            self.phase1_seen += 1
        else:
            self.phase2_seen += 1

    def decide(self, event: RevealEvent) -> bool:
        raise NotImplementedError


class SecPolicy(Policy):
    def decide(self, event: RevealEvent) -> bool:
        self._note(event)
        if event.phase != 1:
            return False
        return event.position > self.window and event.is_record


class _OrderBook:
    """Arrival numbers ordered by current rank (best first).

    Sequential insertion ranks pin down the full relative order of everything
    seen, which is what lets sop and tps compare against specific subsets
    without ever seeing values.
    """

    def __init__(self):
        self._by_rank: list[int] = []

    def better_than(self, rank: int) -> list[int]:
        return self._by_rank[: rank - 1]

    def insert(self, rank: int, arrival_no: int) -> None:
        self._by_rank.insert(rank - 1, arrival_no)


class SopPolicy(Policy):
    """Single observation period shared by both phases."""

    def __init__(self, x: float, n: int):
        super().__init__(x, n)
        self._book = _OrderBook()
        self._arrivals = 0

    def decide(self, event: RevealEvent) -> bool:
        self._note(event)
        self._arrivals += 1
        better = self._book.better_than(event.relative_rank)
        self._book.insert(event.relative_rank, self._arrivals)
        beats_window = all(a > self.window for a in better)
        if event.phase == 1:
            return event.position > self.window and beats_window
        return beats_window


class TpsPolicy(Policy):
    """Independent secretary run per phase; Phase 2 ignores Phase-1 ranks."""

    def __init__(self, x: float, n: int):
        super().__init__(x, n)
        self._book = _OrderBook()
        self._arrivals = 0

    def decide(self, event: RevealEvent) -> bool:
        self._note(event)
        self._arrivals += 1
        better = self._book.better_than(event.relative_rank)
        self._book.insert(event.relative_rank, self._arrivals)
        if event.phase == 1:
            return event.position > self.window and event.is_record
        # Record within Phase 2: everything ranked above arrived in Phase 1.
        t = self.phase1_seen
        record_in_phase2 = all(a <= t for a in better)
        return self.phase2_seen > self.window and record_in_phase2


class WaiPolicy(Policy):
    """sec in Phase 1, then wait out ceil((n+t)/e) total items before accepting records."""

    def __init__(self, x: float, n: int):
        super().__init__(x, n)
        self._cutoff: Optional[int] = None

    def decide(self, event: RevealEvent) -> bool:
        self._note(event)
        if event.phase == 1:
            return event.position > self.window and event.is_record
        if self._cutoff is None:
            self._cutoff = e_window_cutoff(self.n + self.phase1_seen)
        seen_total = self.phase1_seen + self.phase2_seen
        return event.is_record and seen_total > self._cutoff


class RpiPolicy(Policy):
    """sec in Phase 1, rank-threshold schedule in Phase 2."""

    def __init__(self, x: float, n: int, family):
        super().__init__(x, n)
        self.family = family
        self._cutoffs: Optional[tuple[int, ...]] = None

    def decide(self, event: RevealEvent) -> bool:
        self._note(event)
        if event.phase == 1:
            return event.position > self.window and event.is_record
        if self._cutoffs is None:
            self._cutoffs = self.family.cutoffs(self.phase1_seen, self.n)
        r = event.relative_rank
        if r > len(self._cutoffs):
            return False
        seen_total = self.phase1_seen + self.phase2_seen
        return seen_total > self._cutoffs[r - 1]


def sec_policy(x: float, n: int) -> SecPolicy:
    return SecPolicy(x, n)


def sop_policy(x: float, n: int) -> SopPolicy:
    return SopPolicy(x, n)


def tps_policy(x: float, n: int) -> TpsPolicy:
    return TpsPolicy(x, n)


def wai_policy(x: float, n: int) -> WaiPolicy:
    return WaiPolicy(x, n)


def rpi_policy(x: float, n: int, family=None) -> RpiPolicy:
    return RpiPolicy(x, n, family if family is not None else SingleThresholdFamily())


_KINDS = ("sec", "sop", "tps", "wai", "rpi")


@dataclass(frozen=True)
class PolicySpec:
    """Reusable policy description; build() makes the per-replication object."""

    kind: str
    x: float
    family: object = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidParameterError(f"unknown strategy kind {self.kind!r}")
        if not 0.0 <= self.x <= 1.0:
            raise InvalidParameterError("x must lie in [0, 1]")
        if self.kind == "rpi" and self.family is None:
            object.__setattr__(self, "family", SingleThresholdFamily())

    def build(self, n: int) -> Policy:
        if self.kind == "sec":
            return sec_policy(self.x, n)
        if self.kind == "sop":
            return sop_policy(self.x, n)
        if self.kind == "tps":
            return tps_policy(self.x, n)
        if self.kind == "wai":
            return wai_policy(self.x, n)
        return rpi_policy(self.x, n, self.family)

    def descriptor(self) -> dict:
        out = {"kind": self.kind, "x": self.x}
        if self.kind == "rpi":
            out["schedule"] = self.family.descriptor()
        return out
