"""Exact one-step transition law and small-scale samplers.

At each step a voter move is chosen with probability ``beta`` and an
exclusion move otherwise; then one of the ``2N+1`` unlike pairs is picked
uniformly. A voter move turns the pair into ``00`` or ``11`` with equal
chance. An exclusion move swaps a ``10`` with probability ``1-p`` and a ``01``
with probability ``p``; a refused swap leaves the state unchanged.

Laws are exact when ``beta`` and ``p`` are rationals (``Fraction``/``int``)
and floating point otherwise.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Iterable, Mapping

import numpy as np

from .config import (
    GROUND,
    OH_ONE,
    TEN,
    Configuration,
    apply_exclusion,
    apply_voter,
    from_blocks,
)


def parse_number(text):
    """``"4/7"`` -> ``Fraction(4, 7)``, ``"0.25"`` -> ``0.25``, ``"1"`` -> ``Fraction(1)``."""
    if isinstance(text, (int, float, Fraction)):
        return Fraction(text) if isinstance(text, int) else text
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)


def exact_number(text) -> Fraction:
    """Parse as an exact rational; decimals are read digit for digit."""
    if isinstance(text, Fraction):
        return text
    return Fraction(str(text).strip())


@dataclass(frozen=True)
class Params:
    beta: float | Fraction
    p: float | Fraction

    def __post_init__(self):
        for name in ("beta", "p"):
            v = getattr(self, name)
            if isinstance(v, int) and not isinstance(v, bool):
                v = Fraction(v)
                object.__setattr__(self, name, v)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @classmethod
    def parse(cls, beta, p) -> "Params":
        return cls(parse_number(beta), parse_number(p))

    @property
    def exact(self) -> bool:
        return isinstance(self.beta, Rational) and isinstance(self.p, Rational)

    @property
    def q(self):
        return 1 - self.p

    def as_float(self) -> "Params":
        return Params(float(self.beta), float(self.p))

    def to_dict(self) -> dict:
        return {"beta": _num_str(self.beta), "p": _num_str(self.p)}


def _num_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


# --- move table --------------------------------------------------------


@dataclass(frozen=True)
class MoveTable:
    """Parameter-free description of every move from a configuration.

    ``counts[succ] = (voter, swap10, swap01)`` counts how many voter outcomes,
    accepted 10->01 swaps and accepted 01->10 swaps lead to ``succ``.
    """

    state: Configuration
    counts: Mapping[Configuration, tuple[int, int, int]]

    @property
    def pairs(self) -> int:
        return 2 * self.state.N + 1


@lru_cache(maxsize=1 << 16)
def move_table(S: Configuration) -> MoveTable:
    counts: dict[Configuration, list[int]] = {}
    for pr in S.pairs:
        for target in ("00", "11"):
            counts.setdefault(apply_voter(S, pr, target), [0, 0, 0])[0] += 1
        nxt = apply_exclusion(S, pr)
        slot = 1 if pr.kind == TEN else 2
        counts.setdefault(nxt, [0, 0, 0])[slot] += 1
    return MoveTable(S, {k: tuple(v) for k, v in counts.items()})


@dataclass(frozen=True)
class TransitionLaw:
    state: Configuration
    params: Params
    entries: tuple[tuple[Configuration, object], ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def as_dict(self) -> dict:
        return dict(self.entries)

    def prob(self, succ: Configuration):
        return self.as_dict().get(succ, 0)

    def total(self):
        return sum(p for _, p in self.entries)

    def expectation(self, fn: Callable[[Configuration], object]):
        return sum(p * fn(s) for s, p in self.entries)

    def pushforward(self, fn: Callable[[Configuration], object]) -> dict:
        """Law of ``fn(successor)``."""
        out: dict = {}
        for s, p in self.entries:
            k = fn(s)
            out[k] = out.get(k, 0) + p
        return out

    def to_json(self) -> str:
        rows = []
        for s, p in self.entries:
            fr = p if isinstance(p, Fraction) else Fraction(p)
            rows.append({
                "successor_blocks": list(s.blocks),
                "prob_num": fr.numerator,
                "prob_den": fr.denominator,
            })
        return json.dumps(rows)

    @classmethod
    def from_json(cls, text: str, state: Configuration, params: Params):
        rows = json.loads(text)
        entries = tuple(
            (from_blocks(r["successor_blocks"]), Fraction(r["prob_num"], r["prob_den"]))
            for r in rows
        )
        return cls(state, params, entries)


def _weights(S: Configuration, params: Params):
    M = 2 * S.N + 1
    beta, p = params.beta, params.p
    if params.exact:
        beta, p = Fraction(beta), Fraction(p)
        voter = beta / (2 * M)
        swap10 = (1 - beta) * (1 - p) / M
        swap01 = (1 - beta) * p / M
    else:
        beta, p = float(beta), float(p)
        voter = beta / (2 * M)
        swap10 = (1 - beta) * (1 - p) / M
        swap01 = (1 - beta) * p / M
    # refused swaps: N+1 tens refuse w.p. p, N oh-ones refuse w.p. 1-p
    stay = (1 - beta) * (p * (S.N + 1) + (1 - p) * S.N) / M
    return voter, swap10, swap01, stay


def step_distribution(S: Configuration, params: Params) -> TransitionLaw:
    """Exact law of the successor of ``S``; duplicate successors are merged."""
    table = move_table(S)
    voter, swap10, swap01, stay = _weights(S, params)
    entries = []
    seen_self = False
    for succ, (cv, c10, c01) in table.counts.items():
        w = cv * voter + c10 * swap10 + c01 * swap01
        if succ == S:
            w += stay
            seen_self = True
        if w > 0:
            entries.append((succ, w))
    if not seen_self and stay > 0:
        entries.append((S, stay))
    return TransitionLaw(S, params, tuple(entries))


# --- sampling ----------------------------------------------------------


def _float_law(S, params):
    law = step_distribution(S, params.as_float() if params.exact else params)
    states = [s for s, _ in law.entries]
    probs = np.array([float(p) for _, p in law.entries])
    return states, probs / probs.sum()


def sample_step(S: Configuration, params: Params, rng: np.random.Generator) -> Configuration:
    states, probs = _float_law(S, params)
    return states[int(rng.choice(len(states), p=probs))]


def sample_steps(
    S: Configuration, params: Params, rng: np.random.Generator, size: int
) -> list[Configuration]:
    """``size`` independent one-step draws from ``S``."""
    states, probs = _float_law(S, params)
    idx = rng.choice(len(states), size=size, p=probs)
    return [states[i] for i in idx]


def continuous_time_step(
    S: Configuration, params: Params, rng: np.random.Generator
) -> tuple[float, Configuration]:
    """Holding time and next state of the continuous-time chain.

    Every unlike pair carries an independent unit-rate clock, so the holding
    time is exponential with rate ``2N+1`` and the jump chain is exactly the
    discrete chain, null steps included.
    """
    rate = 2 * S.N + 1
    hold = float(rng.exponential(1.0 / rate))
    return hold, sample_step(S, params, rng)


@dataclass
class PathRecord:
    states: list[Configuration]
    observations: dict[str, list] = field(default_factory=dict)
    clock: list[float] | None = None

    @property
    def horizon(self) -> int:
        return len(self.states) - 1


def sample_path(
    S0: Configuration,
    params: Params,
    horizon: int,
    rng: np.random.Generator,
    observers: Mapping[str, Callable[[Configuration], object]] | None = None,
    stop: Callable[[Configuration], bool] | None = None,
    continuous: bool = False,
) -> PathRecord:
    """Run the chain for ``horizon`` steps, or until ``stop(state)`` holds at t >= 1.

    This is the readable reference sampler; bulk Monte Carlo goes through
    :mod:`evlab.experiments`.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    observers = dict(observers or {})
    rec = PathRecord([S0], {k: [fn(S0)] for k, fn in observers.items()},
                     [0.0] if continuous else None)
    S = S0
    for _ in range(horizon):
        if continuous:
            hold, S = continuous_time_step(S, params, rng)
            rec.clock.append(rec.clock[-1] + hold)
        else:
            S = sample_step(S, params, rng)
        rec.states.append(S)
        for k, fn in observers.items():
            rec.observations[k].append(fn(S))
        if stop is not None and stop(S):
            break
    return rec


# --- reachability ------------------------------------------------------


def _support(S: Configuration, params: Params) -> Iterable[Configuration]:
    return (s for s, p in step_distribution(S, params) if p > 0)


def reachable_set(S: Configuration, params: Params, size_limit: int):
    """Breadth-first closure of ``S`` through positive-probability moves.

    Returns ``(seen, closed)``; ``closed`` is False when some move left the
    size window and was cut off.
    """
    seen = {S}
    closed = True
    queue = deque([S])
    while queue:
        cur = queue.popleft()
        for nxt in _support(cur, params):
            if nxt.size > size_limit:
                closed = False
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen, closed


@dataclass(frozen=True)
class Reachability:
    forward: bool | None   # S1 -> S2; None means undecided at the size cap
    backward: bool | None

    @property
    def verdict(self) -> str:
        if self.forward and self.backward:
            return "mutual"
        if self.forward and self.backward is False:
            return "one-way"
        if self.backward and self.forward is False:
            return "one-way-reverse"
        if self.forward is False and self.backward is False:
            return "none"
        return "unknown-at-cap"


def communication_check(
    S1: Configuration, S2: Configuration, params: Params, size_cap: int, slack: int = 2
) -> Reachability:
    limit = size_cap + slack
    if max(S1.size, S2.size) > size_cap:
        raise ValueError("both configurations must fit within size_cap")

    def reach(a, b):
        seen, closed = reachable_set(a, params, limit)
        if b in seen:
            return True
        return False if closed else None

    return Reachability(reach(S1, S2), reach(S2, S1))


def communicating_class_check(states, params: Params, size_cap: int, slack: int = 2) -> bool:
    """True iff every state in ``states`` reaches and is reached from the first one.

    Mutual reachability with a common root implies all pairs communicate.
    """
    states = list(states)
    root = states[0]
    limit = size_cap + slack
    fwd, _ = reachable_set(root, params, limit)
    if not all(s in fwd for s in states):
        return False
    return all(root in reachable_set(s, params, limit)[0] for s in states)


def is_absorbing(S: Configuration, params: Params) -> bool:
    law = step_distribution(S, params)
    return len(law) == 1 and law.entries[0][0] == S


__all__ = [
    "GROUND", "OH_ONE", "TEN", "Params", "TransitionLaw", "MoveTable", "move_table",
    "step_distribution", "sample_step", "sample_steps", "continuous_time_step",
    "sample_path", "PathRecord", "communication_check", "communicating_class_check",
    "reachable_set", "Reachability", "is_absorbing", "parse_number", "exact_number",
]
