"""Core data model for the two-phase stopping process.

An adversary fixes 2n nonnegative values in nonincreasing order; a uniformly
random arrival order presents the first n of them in Phase 1 and the rest in
Phase 2. A policy observes only relative ranks and may accept at most one item
per phase. Accepting during Phase 1 ends that phase's reveals; Phase 2 always
runs. Phase-2 ranks are computed against every item revealed so far in either
phase, including an accepted one.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, insort
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InvalidParameterError

# Ties between equal values are broken in favor of the lower index, so item
# index doubles as the item's rank: index i beats index j exactly when i < j.
TIE_BREAK = "lower-index-wins"


@dataclass(frozen=True)
class Instance:
    """Adversary's value vector: 2n values, nonincreasing, nonnegative."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = self.values
        if len(v) == 0 or len(v) % 2 != 0:
            raise InvalidParameterError("instance needs an even, positive number of values")
        for i, x in enumerate(v):
            if not math.isfinite(x) or x < 0:
                raise InvalidParameterError(f"value at index {i} is not finite and nonnegative")
            if i and x > v[i - 1]:
                raise InvalidParameterError("values must be nonincreasing")

    @property
    def n(self) -> int:
        return len(self.values) // 2


@dataclass(frozen=True)
class ArrivalOrder:
    """A permutation of item indices; sigma[k] is the item revealed at position k+1."""

    sigma: tuple[int, ...]
    tie_break: str = TIE_BREAK

    def __post_init__(self):
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise InvalidParameterError("sigma must be a permutation of 0..2n-1")


@dataclass(frozen=True)
class RevealEvent:
    """What a policy sees for one arrival.

    position is the global reveal position (1-based, Phase 2 starts at n+1),
    relative_rank is the item's rank among everything revealed so far
    (1 = best), and is_record flags relative_rank == 1.
    """

    position: int
    phase: int
    relative_rank: int
    is_record: bool


@dataclass(frozen=True)
class ProcessOutcome:
    phase1_value: float
    phase2_value: float
    phase1_stop: int
    accepted_positions: tuple[int, ...]


def draw_arrival_order(n: int, seed: int) -> ArrivalOrder:
    """Draw a uniform arrival order of 2n items, deterministic in (n, seed)."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    gen = np.random.Generator(np.random.Philox(key=np.array([seed & (2**64 - 1), 0], dtype=np.uint64)))
    return ArrivalOrder(sigma=tuple(int(i) for i in gen.permutation(2 * n)))


def run_two_phase(instance: Instance, order: ArrivalOrder, policy) -> ProcessOutcome:
    """Drive one replication of the two-phase process.

    The policy's decide() is called once per revealed item with a RevealEvent
    and must return True to accept. Phase-1 reveals stop at the first Phase-1
    acceptance; the remaining Phase-1 items are never shown to the policy.
    """
    n = instance.n
    if len(order.sigma) != 2 * n:
        raise InvalidParameterError("order length does not match instance size")

    revealed: list[int] = []  # item indices seen so far, ascending = best first
    values = instance.values
    accepted: list[int] = []
    phase_value = [0.0, 0.0]
    phase1_stop = n

    pos = 0
    for phase, stop in ((1, n), (2, 2 * n)):
        while pos < stop:
            item = order.sigma[pos]
            pos += 1
            rank = bisect_left(revealed, item) + 1
            insort(revealed, item)
            event = RevealEvent(position=pos, phase=phase, relative_rank=rank, is_record=rank == 1)
            if policy.decide(event):
                accepted.append(pos)
                phase_value[phase - 1] = values[item]
                if phase == 1:
                    phase1_stop = pos
                break
        if phase == 1:
            pos = n  # Phase 2 starts at position n+1 regardless of where Phase 1 stopped

    return ProcessOutcome(
        phase1_value=phase_value[0],
        phase2_value=phase_value[1],
        phase1_stop=phase1_stop,
        accepted_positions=tuple(accepted),
    )


def prophet_value(instance: Instance, order: ArrivalOrder) -> float:
    """Benchmark payoff: best Phase-1 value plus best Phase-2 value."""
    n = instance.n
    v = instance.values
    return max(v[i] for i in order.sigma[:n]) + max(v[i] for i in order.sigma[n:])


def expected_phase_max(instance: Instance) -> float:
    """Exact E[max of one phase] under a uniform arrival order.

    The best item landing in a given phase is index min(S) for a uniform
    n-subset S of 2n positions, so P(best in phase = item i) follows the
    hypergeometric tail ratio C(2n-i, n-1)/C(2n, n), evaluated by recurrence.
    """
    n = instance.n
    v = instance.values
    w = 0.5  # P(item 1 in the phase) = C(2n-1, n-1)/C(2n, n)
    total = 0.0
    for i in range(1, n + 2):
        total += v[i - 1] * w
        if i <= n:  # the update past the last term would divide 0/0 at n=1
            w *= (n + 1 - i) / (2 * n - i)
    return total


def dirac_instance(n: int) -> Instance:
    """One unit-value item, everything else worthless."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    return Instance(values=(1.0,) + (0.0,) * (2 * n - 1))


def uniform_instance(n: int, seed: int) -> Instance:
    """2n i.i.d. Uniform(0,1) draws, sorted nonincreasing; fixed by seed."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    gen = np.random.Generator(np.random.Philox(key=np.array([seed & (2**64 - 1), 0xA5A5], dtype=np.uint64)))
    draws = np.sort(gen.random(2 * n))[::-1]
    return Instance(values=tuple(float(x) for x in draws))


def geometric_instance(n: int, ratio: float) -> Instance:
    """Values ratio**i for i = 0..2n-1."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if not 0.0 < ratio <= 1.0:
        raise InvalidParameterError("ratio must be in (0, 1]")
    return Instance(values=tuple(ratio**i for i in range(2 * n)))


def load_instance(path: str) -> Instance:
    """Read an instance from a JSON file {"n": int, "values": [...]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read instance file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"instance file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "n" not in raw or "values" not in raw:
        raise ConfigurationError('instance file must be an object with "n" and "values"')
    n = raw["n"]
    values = raw["values"]
    if not isinstance(n, int) or not isinstance(values, list):
        raise ConfigurationError('"n" must be an integer and "values" a list')
    if len(values) != 2 * n:
        raise InvalidParameterError(f'"values" must hold exactly 2n = {2 * n} entries')
    return Instance(values=tuple(float(x) for x in values))


def make_instance(spec: str, n: int, seed: int) -> Instance:
    """Build an instance from a CLI-style descriptor.

    Accepts "dirac", "uniform", "geometric[:ratio]", or a path to a JSON file.
    """
    if spec == "dirac":
        return dirac_instance(n)
    if spec == "uniform":
        return uniform_instance(n, seed)
    if spec == "geometric" or spec.startswith("geometric:"):
        ratio = 0.9
        if ":" in spec:
            try:
                ratio = float(spec.split(":", 1)[1])
            except ValueError as exc:
                raise InvalidParameterError(f"bad geometric ratio in {spec!r}") from exc
        return geometric_instance(n, ratio)
    instance = load_instance(spec)
    if instance.n != n:
        raise InvalidParameterError(f"instance file has n={instance.n}, expected n={n}")
    return instance


def instance_label(spec: str) -> str:
    return spec if spec in ("dirac", "uniform") or spec.startswith("geometric") else "file"
