"""Coloured-particle coupling of the exclusion-voter chain.

Particles carry a colour. Exclusion moves carry colours along; a voter move
on an unlike pair changes colours only when exactly one of the two particles
is coloured: both end up coloured when the pair takes the label of the
coloured particle, uncoloured otherwise.

A state is a finite window of particles between two constant infinite fills.
Each particle is a code ``label + 2*coloured`` (0: plain 0, 1: plain 1,
2: coloured 0, 3: coloured 1). The usual chain has left fill 1 and right fill
0. The window is the shortest one outside which every particle equals its
fill, so it can be longer than the hybrid zone: a coloured particle pushed
into an infinite block keeps its colour.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from .config import GROUND, Configuration, from_string
from .kernel import Params
from .lyapunov import g_rect

PLAIN_0, PLAIN_1, COL_0, COL_1 = 0, 1, 2, 3
_GLYPH = {PLAIN_0: "0", PLAIN_1: "1", COL_0: "o", COL_1: "i"}


def _label(code):
    return code & 1


def _coloured(code):
    return code >> 1


@dataclass(frozen=True)
class ColouredConfiguration:
    """Window of coloured particles between a left and a right fill.

    Use :func:`make_coloured` or :func:`initial_colouring` rather than the
    constructor; they return the canonical (shortest) window.
    """

    cells: tuple[int, ...]
    left_fill: int = PLAIN_1
    right_fill: int = PLAIN_0

    @property
    def standard(self) -> bool:
        """True for the ordinary chain (uncoloured 1's left, uncoloured 0's right)."""
        return self.left_fill == PLAIN_1 and self.right_fill == PLAIN_0

    @property
    def word(self) -> str:
        return "".join(str(_label(c)) for c in self.cells)

    @property
    def mask(self) -> tuple[bool, ...]:
        return tuple(bool(_coloured(c)) for c in self.cells)

    @property
    def base(self) -> Configuration:
        """Underlying uncoloured configuration."""
        if not self.standard:
            raise ValueError("base configuration is defined for standard fills only")
        return from_string(self.word)

    def zone_mask(self) -> tuple[bool, ...]:
        """Colour of each hybrid-zone position ``1..|S|`` of :attr:`base`."""
        word = self.word
        start = len(word) - len(word.lstrip("1"))
        return self.mask[start:start + self.base.size]

    def padded(self) -> tuple[int, ...]:
        return (self.left_fill,) + self.cells + (self.right_fill,)

    def render(self) -> str:
        """Particles as text; ``o``/``i`` are coloured 0/1, fills shown at both ends."""
        lf, rf = _GLYPH[self.left_fill], _GLYPH[self.right_fill]
        return lf * 3 + "".join(_GLYPH[c] for c in self.cells) + rf * 3

    def __str__(self):
        return self.render()


def _canonical(cells, left_fill, right_fill) -> ColouredConfiguration:
    lo, hi = 0, len(cells)
    while lo < hi and cells[lo] == left_fill:
        lo += 1
    while hi > lo and cells[hi - 1] == right_fill:
        hi -= 1
    return ColouredConfiguration(tuple(cells[lo:hi]), left_fill, right_fill)


def make_coloured(word: str, mask, left_fill: int = PLAIN_1,
                  right_fill: int = PLAIN_0) -> ColouredConfiguration:
    """Build a coloured state from a 0/1 word and a same-length colour mask."""
    if len(word) != len(mask):
        raise ValueError(f"mask length {len(mask)} does not match word length {len(word)}")
    cells = []
    for i, (ch, col) in enumerate(zip(word, mask)):
        if ch not in "01":
            raise ValueError(f"invalid character {ch!r} at position {i}")
        cells.append(int(ch) + 2 * bool(col))
    return _canonical(cells, left_fill, right_fill)


def colour_split_point(S0: Configuration) -> int:
    """Position of the last 0 of block ``K``: ``R_K + m_1 + ... + m_{K-1}``."""
    if S0.is_ground:
        raise ValueError("the ground state has no colouring")
    K = g_rect(S0).K
    return sum(S0.n[:K]) + sum(S0.m[:K - 1])


def initial_colouring(S0: Configuration) -> ColouredConfiguration:
    """Colour the 0's at positions ``<= H`` and the 1's at positions ``> H``."""
    H = colour_split_point(S0)
    word = S0.word
    mask = [(ch == "0") == (i < H) for i, ch in enumerate(word)]
    return make_coloured(word, mask)


def all_coloured_ground() -> ColouredConfiguration:
    """``...000111...`` with every particle coloured."""
    return ColouredConfiguration((), COL_0, COL_1)


# --- dynamics ----------------------------------------------------------


def _voter_pair(a, b, target):
    if _coloured(a) == _coloured(b):
        c = _coloured(a)
    else:
        col = a if _coloured(a) else b
        c = 1 if _label(col) == target else 0
    code = target + 2 * c
    return code, code


def _moves(xi: ColouredConfiguration) -> Iterator[tuple[str, ColouredConfiguration]]:
    """Every move from ``xi``: ``("voter", S)`` twice per pair, then the swap.

    The swap is tagged ``"10"`` or ``"01"`` after the labels of the pair.
    """
    pad = xi.padded()
    lf, rf = xi.left_fill, xi.right_fill
    for i in range(len(pad) - 1):
        a, b = pad[i], pad[i + 1]
        if _label(a) == _label(b):
            continue
        for target in (0, 1):
            x, y = _voter_pair(a, b, target)
            yield "voter", _canonical(pad[:i] + (x, y) + pad[i + 2:], lf, rf)
        kind = "10" if _label(a) == 1 else "01"
        yield kind, _canonical(pad[:i] + (b, a) + pad[i + 2:], lf, rf)


def pair_count(xi: ColouredConfiguration) -> int:
    pad = xi.padded()
    return sum(_label(a) != _label(b) for a, b in zip(pad, pad[1:]))


def coloured_step_distribution(xi: ColouredConfiguration, params: Params):
    """Exact law of the next coloured state as a list of ``(state, prob)``."""
    M = pair_count(xi)
    if params.exact:
        beta, p = Fraction(params.beta), Fraction(params.p)
    else:
        beta, p = float(params.beta), float(params.p)
    w = {"voter": beta / (2 * M), "10": (1 - beta) * (1 - p) / M, "01": (1 - beta) * p / M}
    law: dict = {}
    stay = 0
    for kind, nxt in _moves(xi):
        law[nxt] = law.get(nxt, 0) + w[kind]
        if kind == "10":
            stay += (1 - beta) * p / M
        elif kind == "01":
            stay += (1 - beta) * (1 - p) / M
    law[xi] = law.get(xi, 0) + stay
    return [(s, q) for s, q in law.items() if q > 0]


def coloured_step(xi: ColouredConfiguration, params: Params,
                  rng: np.random.Generator) -> ColouredConfiguration:
    """One step: uniform pair, then voter or exclusion, as in the plain chain."""
    pad = xi.padded()
    pairs = [i for i in range(len(pad) - 1) if _label(pad[i]) != _label(pad[i + 1])]
    i = pairs[int(rng.random() * len(pairs))]
    u, v = rng.random(), rng.random()
    a, b = pad[i], pad[i + 1]
    if u < float(params.beta):
        x, y = _voter_pair(a, b, 0 if v < 0.5 else 1)
    else:
        accept = (1 - float(params.p)) if _label(a) == 1 else float(params.p)
        if v >= accept:
            return xi
        x, y = b, a
    return _canonical(pad[:i] + (x, y) + pad[i + 2:], xi.left_fill, xi.right_fill)


# --- observables -------------------------------------------------------


def chi(xi: ColouredConfiguration):
    """Number of coloured particles (``inf`` when a fill is coloured)."""
    if _coloured(xi.left_fill) or _coloured(xi.right_fill):
        return math.inf
    return sum(_coloured(c) for c in xi.cells)


class OverlapSegment(NamedTuple):
    """Segment from the leftmost coloured 1 to the rightmost coloured 0.

    ``word`` is None for the holding state (no such segment).
    """

    word: str | None

    @property
    def holding(self) -> bool:
        return self.word is None

    @property
    def size(self) -> int:
        """Segment length, ``-1`` in the holding state."""
        return -1 if self.word is None else len(self.word)


HOLDING = OverlapSegment(None)


def _extremes(pad):
    # fills never hold a coloured 1 on the left or a coloured 0 on the right,
    # so one fill site on each side locates both extremes
    left_one = next((i for i, c in enumerate(pad) if c == COL_1), None)
    right_zero = next((i for i in range(len(pad) - 1, -1, -1) if pad[i] == COL_0), None)
    return left_one, right_zero


def zeta(xi: ColouredConfiguration) -> OverlapSegment:
    pad = xi.padded()
    l, r = _extremes(pad)
    if l is None or r is None or l >= r:
        return HOLDING
    return OverlapSegment("".join(str(_label(c)) for c in pad[l:r + 1]))


def ground_state_obstruction(xi: ColouredConfiguration) -> bool:
    """True iff some coloured 0 sits left of some coloured 1.

    A ground state has every 1 left of every 0, so this pattern rules it out.
    """
    pad = xi.padded()
    seen_col0 = False
    for c in pad:
        if c == COL_0:
            seen_col0 = True
        elif c == COL_1 and seen_col0:
            return True
    return False


def ordering_holds(xi: ColouredConfiguration) -> bool:
    """Uncoloured 1's all left of coloured 1's, uncoloured 0's all right of coloured 0's."""
    pad = xi.padded()
    seen_col1 = False
    for c in pad:
        if c == COL_1:
            seen_col1 = True
        elif c == PLAIN_1 and seen_col1:
            return False
    seen_col0 = False
    for c in reversed(pad):
        if c == COL_0:
            seen_col0 = True
        elif c == PLAIN_0 and seen_col0:
            return False
    return True


# --- checks ------------------------------------------------------------


def chi_increment_sums(xi: ColouredConfiguration) -> tuple[int, int, int, set]:
    """Sums of ``chi`` increments over voter outcomes, 10-swaps and 01-swaps.

    Also returns the set of increments seen. The one-step drift of ``chi`` is
    ``beta*V/(2M) + (1-beta)((1-p)A + pB)/M``.
    """
    base = chi(xi)
    V = A = B = 0
    seen = set()
    for kind, nxt in _moves(xi):
        d = chi(nxt) - base
        seen.add(d)
        if kind == "voter":
            V += d
        elif kind == "10":
            A += d
        else:
            B += d
    return V, A, B, seen


def reachable_coloured(starts, steps: int) -> set:
    """Coloured states reachable in at most ``steps`` moves of any kind."""
    seen = set(starts)
    frontier = list(seen)
    for _ in range(steps):
        nxt_frontier = []
        for xi in frontier:
            for _, nxt in _moves(xi):
                if nxt not in seen:
                    seen.add(nxt)
                    nxt_frontier.append(nxt)
        frontier = nxt_frontier
    return seen


@dataclass
class MartingaleReport:
    states: int
    grid_points: int
    worst_drift: Fraction
    jumps: frozenset
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures and self.jumps <= {-1, 0, 1}


def chi_martingale_check(starts, steps: int, grid) -> MartingaleReport:
    """Exact one-step drift of ``chi`` on every state reachable from ``starts``.

    Moves of every kind are explored, which covers the support for every
    ``(beta, p)`` in ``grid``; each state's drift is then evaluated exactly
    at each grid point.
    """
    states = reachable_coloured(starts, steps)
    failures = []
    jumps: set = set()
    worst = Fraction(0)
    for xi in states:
        V, A, B, seen = chi_increment_sums(xi)
        jumps |= seen
        M = pair_count(xi)
        for prm in grid:
            beta, p = Fraction(prm.beta), Fraction(prm.p)
            d = beta * V / (2 * M) + (1 - beta) * ((1 - p) * A + p * B) / M
            if abs(d) > abs(worst):
                worst = d
            if d != 0:
                failures.append((xi, prm, d))
    return MartingaleReport(len(states), len(grid), worst, frozenset(jumps), failures)


def relabel(xi: ColouredConfiguration) -> ColouredConfiguration:
    """Swap labels 0 and 1, keep colours; maps exclusion parameter ``p`` to ``1-p``."""
    return _canonical(tuple(c ^ 1 for c in xi.cells), xi.left_fill ^ 1, xi.right_fill ^ 1)


def overlap_size_law(xi0: ColouredConfiguration, params: Params, t: int) -> dict:
    """Exact law of ``|zeta_t|`` (holding state counted as 0)."""
    law = {xi0: Fraction(1) if params.exact else 1.0}
    for _ in range(t):
        nxt: dict = {}
        for xi, q in law.items():
            for s, w in coloured_step_distribution(xi, params):
                nxt[s] = nxt.get(s, 0) + q * w
        law = nxt
    out: dict = {}
    for xi, q in law.items():
        k = max(zeta(xi).size, 0)
        out[k] = out.get(k, 0) + q
    return out


def size_law(S0: Configuration, params: Params, t: int) -> dict:
    """Exact law of ``|xi_t|`` for the plain chain."""
    from .kernel import step_distribution

    law = {S0: Fraction(1) if params.exact else 1.0}
    for _ in range(t):
        nxt: dict = {}
        for S, q in law.items():
            for s, w in step_distribution(S, params):
                nxt[s] = nxt.get(s, 0) + q * w
        law = nxt
    out: dict = {}
    for S, q in law.items():
        out[S.size] = out.get(S.size, 0) + q
    return out


@dataclass
class ReflectionReport:
    exact_steps: int
    exact_match: bool
    mc_mean_overlap: float
    mc_mean_size: float
    mc_stderr: float

    @property
    def z_score(self) -> float:
        if self.mc_stderr == 0:
            return 0.0
        return (self.mc_mean_overlap - self.mc_mean_size) / self.mc_stderr

    @property
    def passed(self) -> bool:
        return self.exact_match and abs(self.z_score) <= 4


def reflection_check(params: Params, exact_steps: int = 4, horizon: int = 200,
                     replicas: int = 400, seed: int = 0) -> ReflectionReport:
    """Compare ``|zeta|`` from the all-coloured start with ``|xi|`` from ground under ``1-p``.

    Exact laws are compared for ``t <= exact_steps``. Monte Carlo compares the
    mean of ``max_{s<=horizon} |zeta_s|`` with the mean of
    ``max_{s<=horizon} |xi_s|`` from independent streams.
    """
    from .experiments import replica_rng, _run_single

    from .kernel import exact_number

    mirrored = Params(params.beta, 1 - params.p)
    # exact laws always in rationals; float parameters are read digit for digit
    rat = Params(exact_number(params.beta), exact_number(params.p))
    rat_mirrored = Params(rat.beta, 1 - rat.p)
    ok = all(
        overlap_size_law(all_coloured_ground(), rat, t) == size_law(GROUND, rat_mirrored, t)
        for t in range(exact_steps + 1)
    )
    a = np.empty(replicas)
    b = np.empty(replicas)
    fl = params.as_float() if params.exact else params
    for r in range(replicas):
        rng = replica_rng(seed, 2 * r)
        xi = all_coloured_ground()
        best = 0
        for _ in range(horizon):
            xi = coloured_step(xi, fl, rng)
            best = max(best, zeta(xi).size)
        a[r] = best
        res = _run_single(GROUND, mirrored.as_float() if mirrored.exact else mirrored,
                          horizon, replica_rng(seed, 2 * r + 1), np.array([horizon]))
        b[r] = res.table[-1, 6]
    se = math.sqrt(a.var(ddof=1) / replicas + b.var(ddof=1) / replicas)
    return ReflectionReport(exact_steps, ok, float(a.mean()), float(b.mean()), se)


@dataclass
class PersistenceReport:
    """Frequencies behind the no-return argument for a coloured start.

    ``t`` is ``floor(delta^2 (x0^2 + y0^2))``. ``both`` is the fraction of
    replicas in which ``chi`` stays above ``(1 - 10 delta)(x0 + y0)`` and
    ``|zeta|`` stays below ``2 sqrt(10) delta (x0 + y0)`` up to ``t``;
    ``no_ground`` the fraction that never visits the ground state. ``level``
    is the reference probability the two events are expected to exceed. The
    report is informational only.
    """

    t: int
    delta: float
    level: float
    replicas: int
    both: float
    no_ground: float


def persistence_probe(S0: Configuration, params: Params, delta: float = 0.01,
                      level: float = 0.94, replicas: int = 200,
                      seed: int = 0) -> PersistenceReport:
    """Estimate how often the coloured mass and the overlap stay in their bands."""
    from .experiments import replica_rng

    wit = g_rect(S0)
    x0, y0 = wit.X, wit.Y
    t = int(delta * delta * (x0 * x0 + y0 * y0))
    chi_floor = (1 - 10 * delta) * (x0 + y0)
    zeta_cap = 2 * math.sqrt(10) * delta * (x0 + y0)
    fl = params.as_float() if params.exact else params
    both = away = 0
    for r in range(replicas):
        rng = replica_rng(seed, r)
        xi = initial_colouring(S0)
        ok = True
        hit = False
        for _ in range(t):
            xi = coloured_step(xi, fl, rng)
            ok = ok and chi(xi) >= chi_floor and zeta(xi).size <= zeta_cap
            hit = hit or (xi.standard and xi.base.is_ground)
        both += ok
        away += not hit
    return PersistenceReport(t, delta, level, replicas, both / replicas, away / replicas)


# --- trajectories ------------------------------------------------------

COLOURED_CSV_HEADER = ["t", "size", "chi", "overlap", "obstruction"]


def coloured_trajectory(xi0: ColouredConfiguration, params: Params, horizon: int,
                        rng: np.random.Generator, check: bool = True) -> list[tuple]:
    """Rows ``(t, |S|, chi, |zeta| or -1, obstruction)`` for ``t = 0..horizon``.

    With ``check`` the ordering property is asserted at every step, and so is
    the absence of an obstruction whenever the chain sits at the ground state.
    """
    fl = params.as_float() if params.exact else params
    rows = []
    xi = xi0
    for t in range(horizon + 1):
        if t:
            xi = coloured_step(xi, fl, rng)
        obstruction = ground_state_obstruction(xi)
        size = xi.base.size if xi.standard else -1
        if check:
            if not ordering_holds(xi):
                raise AssertionError(f"colour ordering broken at t={t}: {xi.render()}")
            if size == 0 and obstruction:
                raise AssertionError(f"obstruction at the ground state, t={t}")
        c = chi(xi)
        rows.append((t, size, -1 if c == math.inf else c, zeta(xi).size, int(obstruction)))
    return rows


def trajectory_csv(rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(COLOURED_CSV_HEADER)
    w.writerows(rows)
    return out.getvalue()


__all__ = [
    "ColouredConfiguration", "OverlapSegment", "HOLDING", "make_coloured",
    "initial_colouring", "colour_split_point", "all_coloured_ground",
    "coloured_step_distribution", "coloured_step", "chi", "zeta",
    "ground_state_obstruction", "ordering_holds", "chi_increment_sums",
    "reachable_coloured", "chi_martingale_check", "MartingaleReport", "relabel",
    "overlap_size_law", "size_law", "reflection_check", "ReflectionReport",
    "coloured_trajectory", "trajectory_csv", "persistence_probe", "PersistenceReport", "COLOURED_CSV_HEADER", "pair_count",
]
