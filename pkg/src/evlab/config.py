"""Configurations of the exclusion-voter model.

A configuration is an infinite run of 1's, a finite disordered word, then an
infinite run of 0's, taken modulo translation. Only the disordered word (the
hybrid zone) is stored, as alternating block lengths
``(n_1, m_1, ..., n_N, m_N)``: ``n_i`` is the length of the i-th block of 0's
and ``m_i`` the length of the i-th block of 1's. The ground state
``...111000...`` has no blocks at all.

Positions inside the hybrid zone are numbered 1..|S| from the left. Position 0
is the last site of the left infinite 1-block and position |S|+1 the first site
of the right infinite 0-block; the outermost unlike pairs straddle them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

TEN = "10"
OH_ONE = "01"


class ConfigurationError(ValueError):
    """Raised for malformed block sequences or words."""


class PairIndex(NamedTuple):
    """An unlike adjacent pair.

    ``kind`` is ``"10"`` or ``"01"``; ``j`` numbers pairs of that kind
    left-to-right (10's from 0, 01's from 1); ``pos`` is the hybrid-zone
    position of the pair's left site (0 for the leftmost 10).
    """

    kind: str
    j: int
    pos: int


@dataclass(frozen=True)
class Configuration:
    blocks: tuple[int, ...] = ()

    def __post_init__(self):
        blocks = self.blocks
        if not isinstance(blocks, tuple):
            blocks = tuple(blocks)
            object.__setattr__(self, "blocks", blocks)
        if len(blocks) % 2:
            raise ConfigurationError(
                f"block sequence must have even length, got {len(blocks)}"
            )
        for i, b in enumerate(blocks):
            if isinstance(b, bool) or not isinstance(b, int) or b < 1:
                if isinstance(b, float) and b.is_integer() and b >= 1:
                    continue
                raise ConfigurationError(
                    f"block {i} must be a positive integer, got {b!r}"
                )
        if any(not isinstance(b, int) for b in blocks):
            object.__setattr__(self, "blocks", tuple(int(b) for b in blocks))

    # --- basic shape ---------------------------------------------------

    @property
    def N(self) -> int:
        """Number of finite 1-blocks (equivalently finite 0-blocks)."""
        return len(self.blocks) // 2

    @cached_property
    def size(self) -> int:
        """Length |S| of the hybrid zone."""
        return sum(self.blocks)

    def __len__(self) -> int:
        return self.size

    @property
    def is_ground(self) -> bool:
        return not self.blocks

    @property
    def n(self) -> tuple[int, ...]:
        return self.blocks[0::2]

    @property
    def m(self) -> tuple[int, ...]:
        return self.blocks[1::2]

    @cached_property
    def word(self) -> str:
        """The hybrid-zone word, e.g. ``"0010011"``."""
        return "".join(
            ("0" if i % 2 == 0 else "1") * b for i, b in enumerate(self.blocks)
        )

    def render(self) -> str:
        return "...111" + self.word + "000..."

    def __str__(self) -> str:
        return self.render()

    def to_csv_field(self) -> str:
        return ",".join(str(b) for b in self.blocks)

    @cached_property
    def padded(self) -> str:
        """Hybrid zone flanked by one site of each infinite block."""
        return "1" + self.word + "0"

    @cached_property
    def _prefix_sums(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        R = tuple(itertools.accumulate(self.n))
        T = tuple(itertools.accumulate(reversed(self.m)))[::-1]
        return R, T

    @cached_property
    def pairs(self) -> tuple[PairIndex, ...]:
        return tuple(_scan_pairs(self.padded))


def _scan_pairs(padded: str) -> Iterator[PairIndex]:
    tens = 0
    oh_ones = 1
    for i in range(len(padded) - 1):
        a, b = padded[i], padded[i + 1]
        if a == b:
            continue
        if a == "1":
            yield PairIndex(TEN, tens, i)
            tens += 1
        else:
            yield PairIndex(OH_ONE, oh_ones, i)
            oh_ones += 1


GROUND = Configuration(())
D1 = Configuration((1, 1))


def from_blocks(seq: Sequence[int]) -> Configuration:
    """Build a configuration from ``(n_1, m_1, ..., n_N, m_N)``."""
    return Configuration(tuple(seq))


def from_string(word: str) -> Configuration:
    """Canonicalise an arbitrary finite 0/1 word.

    Leading 1's merge into the left infinite block and trailing 0's into the
    right one, so ``"111000"`` is the ground state.
    """
    for i, ch in enumerate(word):
        if ch not in "01":
            raise ConfigurationError(
                f"invalid character {ch!r} at position {i}; expected 0 or 1"
            )
    core = word.lstrip("1").rstrip("0")
    if not core:
        return GROUND
    return Configuration(tuple(len(list(g)) for _, g in itertools.groupby(core)))


def parse(text: str) -> Configuration:
    """Parse user input: a 0/1 word, or comma-separated block lengths.

    ``""`` and ``"()"`` denote the ground state.
    """
    text = text.strip()
    if text in ("", "()", "D0"):
        return GROUND
    if "," in text or text.startswith("("):
        inner = text.strip("()").strip()
        if not inner:
            return GROUND
        parts = [s.strip() for s in inner.split(",")]
        try:
            values = [int(s) for s in parts if s]
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse block list {text!r}") from exc
        return from_blocks(values)
    return from_string(text)


def prefix_sums(S: Configuration) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(R, T)`` with ``R_i = n_1+...+n_i`` and ``T_i = m_i+...+m_N``."""
    return S._prefix_sums


class StaircasePath(NamedTuple):
    points: tuple[tuple[int, int], ...]

    @property
    def steps(self) -> int:
        return max(len(self.points) - 1, 0)

    def area(self) -> int:
        """Lattice area under the right-down path."""
        total = 0
        for (x0, y0), (x1, _) in zip(self.points, self.points[1:]):
            total += (x1 - x0) * y0
        return total


def staircase_path(S: Configuration) -> StaircasePath:
    """Right-down lattice path from ``(0, T_1)`` to ``(R_N, 0)``.

    Each 0 of the hybrid zone is a unit step right, each 1 a unit step down.
    """
    if S.is_ground:
        return StaircasePath(())
    x, y = 0, sum(S.m)
    pts = [(x, y)]
    for ch in S.word:
        if ch == "0":
            x += 1
        else:
            y -= 1
        pts.append((x, y))
    return StaircasePath(tuple(pts))


def enumerate_pairs(S: Configuration) -> list[PairIndex]:
    """All 2N+1 unlike pairs, left to right, alternating 10/01."""
    return list(S.pairs)


def _resolve_pair(S: Configuration, pair) -> PairIndex:
    if isinstance(pair, PairIndex):
        kind, j = pair.kind, pair.j
    else:
        kind, j = pair
    kind = str(kind)
    if kind == TEN:
        idx = 2 * j
        valid = 0 <= j <= S.N
    elif kind == OH_ONE:
        idx = 2 * j - 1
        valid = 1 <= j <= S.N
    else:
        raise IndexError(f"unknown pair kind {kind!r}")
    if not valid:
        raise IndexError(f"pair {kind}#{j} out of range for N={S.N}")
    return S.pairs[idx]


def apply_voter(S: Configuration, pair, target: str) -> Configuration:
    """Voter move: the chosen unlike pair becomes ``"00"`` or ``"11"``."""
    if target not in ("00", "11"):
        raise ValueError(f"voter target must be '00' or '11', got {target!r}")
    pr = _resolve_pair(S, pair)
    w = S.padded
    i = pr.pos
    return from_string(w[:i] + target + w[i + 2:])


def apply_exclusion(S: Configuration, pair) -> Configuration:
    """Exclusion move: swap the two particles of the chosen pair."""
    pr = _resolve_pair(S, pair)
    w = S.padded
    i = pr.pos
    return from_string(w[:i] + w[i + 1] + w[i] + w[i + 2:])


def all_configurations(max_size: int) -> Iterator[Configuration]:
    """Every configuration with ``|S| <= max_size``, ground state first.

    Non-ground words start with 0 and end with 1, so there are
    ``2**(max_size-1)`` configurations in total.
    """
    yield GROUND
    for length in range(2, max_size + 1):
        for middle in itertools.product("01", repeat=length - 2):
            yield from_string("0" + "".join(middle) + "1")


def random_configuration(rng, max_size: int, min_size: int = 2) -> Configuration:
    """Uniform-ish random configuration: size uniform in range, interior bits fair."""
    length = int(rng.integers(min_size, max_size + 1))
    if length < 2:
        return GROUND
    bits = rng.integers(0, 2, size=length - 2)
    return from_string("0" + "".join("1" if b else "0" for b in bits) + "1")
