"""Lyapunov-type functionals of configurations and the inequalities between them.

All integer-valued functionals use exact integer arithmetic. ``phi`` is
evaluated in double precision unless ``exact=True`` (integer exponents only),
in which case it returns a :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .config import Configuration, prefix_sums

# relative slack for clauses that involve logarithms
LOG_SLACK = 1e-12


def f1(S: Configuration) -> int:
    """Area of the staircase: ``sum m_i R_i`` (checked against ``sum n_i T_i``)."""
    if S.is_ground:
        return 0
    R, T = prefix_sums(S)
    a = sum(m * r for m, r in zip(S.m, R))
    b = sum(n * t for n, t in zip(S.n, T))
    if a != b:  # pragma: no cover - identity
        raise AssertionError(f"f1 forms disagree on {S.blocks}: {a} != {b}")
    return a


def f2(S: Configuration) -> int:
    """``(sum m_i R_i^2 + sum n_i T_i^2) / 2``.

    The bracket always has the parity of ``2 f1``, so the result is an integer.
    """
    if S.is_ground:
        return 0
    R, T = prefix_sums(S)
    twice = sum(m * r * r for m, r in zip(S.m, R)) + sum(
        n * t * t for n, t in zip(S.n, T)
    )
    return twice // 2


def rho2(S: Configuration) -> int:
    """Sum of squared block lengths."""
    return sum(b * b for b in S.blocks)


def size_cubed(S: Configuration) -> int:
    return S.size ** 3


def blocks_count(S: Configuration) -> int:
    return S.N


class RectWitness(NamedTuple):
    K: int
    X: int
    Y: int
    g: int


def g_rect(S: Configuration) -> RectWitness:
    """Largest rectangle inscribed in the staircase, smallest maximising index."""
    if S.is_ground:
        return RectWitness(0, 0, 0, 0)
    R, T = prefix_sums(S)
    best_k, best = 0, -1
    for k, (r, t) in enumerate(zip(R, T)):
        if r * t > best:
            best, best_k = r * t, k
    return RectWitness(best_k + 1, R[best_k], T[best_k], best)


def g(S: Configuration) -> int:
    return g_rect(S).g


# --- phi_alpha ---------------------------------------------------------


def _power_prefix(n_max: int, alpha, exact: bool):
    """``P[n] = sum_{m=1}^n m**-alpha`` for n in 0..n_max."""
    if exact:
        P = [Fraction(0)]
        for m in range(1, n_max + 1):
            P.append(P[-1] + Fraction(1, m ** alpha))
        return P
    terms = np.arange(1, n_max + 1, dtype=np.float64) ** (-float(alpha))
    return np.concatenate(([0.0], np.cumsum(terms)))


def _check_alpha(alpha, exact):
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if exact and int(alpha) != alpha:
        raise ValueError("exact phi requires an integer exponent")


def phi(S: Configuration, alpha, exact: bool = False):
    """Generalised staircase area, each unit cell ``(j, k)`` weighted ``(j+k)^-alpha``.

    Cells are summed column by column: column ``j`` (the j-th 0 of the zone)
    has height ``T_i`` for the block ``i`` containing it, so its weight is a
    difference of prefix sums of ``m^-alpha``. ``phi(S, 0) == f1(S)``.
    """
    _check_alpha(alpha, exact)
    if S.is_ground:
        return Fraction(0) if exact else 0.0
    return _phi_cached(S, int(alpha) if exact else float(alpha), exact)


@lru_cache(maxsize=1 << 16)
def _phi_cached(S: Configuration, alpha, exact: bool):
    R, T = prefix_sums(S)
    P = _power_prefix(S.size, alpha, exact)
    if exact:
        total = Fraction(0)
        prev = 0
        for r, t in zip(R, T):
            for j in range(prev + 1, r + 1):
                total += P[j + t] - P[j]
            prev = r
        return total
    heights = np.repeat(np.asarray(T, dtype=np.int64), S.n)
    cols = np.arange(1, R[-1] + 1)
    return float(np.sum(P[cols + heights] - P[cols]))


def phi_cells(S: Configuration, alpha, by: str = "columns") -> float:
    """Direct triple sum over staircase cells; ``by`` picks the summation order.

    ``"columns"`` walks the 0-blocks (outer index over ``R``), ``"rows"`` walks
    the 1-blocks (outer index over ``T``). Used to cross-check :func:`phi`.
    """
    _check_alpha(alpha, False)
    if S.is_ground:
        return 0.0
    R, T = prefix_sums(S)
    N = S.N
    a = float(alpha)
    terms = []
    if by == "columns":
        prev = 0
        for i in range(N):
            for j in range(prev + 1, R[i] + 1):
                for k in range(1, T[i] + 1):
                    terms.append((j + k) ** -a)
            prev = R[i]
    elif by == "rows":
        for i in range(N):
            t_next = T[i + 1] if i + 1 < N else 0
            for j in range(t_next + 1, T[i] + 1):
                for k in range(1, R[i] + 1):
                    terms.append((j + k) ** -a)
    else:
        raise ValueError(f"unknown summation order {by!r}")
    return math.fsum(terms)


def phi_functional(alpha, exact: bool = False):
    """``S -> phi(S, alpha)`` with a readable name, for drift sweeps."""

    def fn(S):
        return phi(S, alpha, exact=exact)

    fn.__name__ = f"phi{alpha:g}" if not isinstance(alpha, Fraction) else f"phi{alpha}"
    return fn


# --- inequality audit --------------------------------------------------


@dataclass
class AuditClause:
    clause: str
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _clause(name, lhs, rhs, ok=None) -> AuditClause:
    if ok is None:
        ok = lhs <= rhs
    return AuditClause(name, float(lhs), float(rhs), float(rhs - lhs), bool(ok))


def _weighted_block_bound(name, xs) -> AuditClause:
    # (sum x)^3 <= 6 * (sum x^2) * (sum i x_i), compared on cubes
    A = sum(x * x for x in xs)
    B = sum(i * x for i, x in enumerate(xs, start=1))
    s = sum(xs)
    return AuditClause(
        name, float(s), float((6 * A * B) ** (1 / 3)),
        float((6 * A * B) ** (1 / 3) - s), s ** 3 <= 6 * A * B,
    )


def inequality_audit(S: Configuration) -> list[AuditClause]:
    """Evaluate every inequality between the functionals on ``S``.

    Polynomial clauses are decided in exact integer arithmetic; clauses with a
    logarithm carry a relative slack of ``LOG_SLACK``. ``lhs``/``rhs`` are
    reported on the natural scale of each inequality.
    """
    size = S.size
    F1, F2 = f1(S), f2(S)
    out = [
        _clause("half_size_le_f1", Fraction(size, 2), F1),
        _clause("f1_le_quarter_size_sq", F1, Fraction(size * size, 4)),
        _clause("quarter_size_sq_le_f2", Fraction(size * size, 4), F2),
        _clause("f2_le_eighth_size_cube", F2, Fraction(size ** 3, 8)),
        _clause("f2_le_size_f1", F2, size * F1),
        _clause("size_f1_le_twice_f1_sq", size * F1, 2 * F1 * F1),
        _clause("half_N_sq_le_f1", Fraction(S.N ** 2, 2), F1),
        _clause("third_N_cube_le_f2", Fraction(S.N ** 3, 3), F2),
    ]
    if S.is_ground:
        return out
    G = g(S)
    N = S.N
    R2 = rho2(S)
    bound = F1 / (1 + math.log(F1))
    out.append(_clause("g_le_f1", G, F1))
    out.append(_clause("f1_over_log_le_g", bound, G, bound <= G * (1 + LOG_SLACK)))
    p1 = phi(S, 1)
    lg = math.log(size / 4)
    out.append(_clause("log_quarter_size_le_phi1", lg, p1, lg <= p1 + LOG_SLACK * abs(p1)))
    out.append(_clause("size_le_size_sq_over_2N", size, Fraction(size * size, 2 * N)))
    out.append(_clause("size_sq_over_2N_le_rho2", Fraction(size * size, 2 * N), R2))
    out.append(_clause("rho2_le_size_sq", R2, size * size))
    out.append(_weighted_block_bound("zero_blocks_cube_bound", S.n))
    out.append(_weighted_block_bound("one_blocks_cube_bound", S.m))
    rhs = 4 * (F1 * R2) ** (1 / 3)
    out.append(AuditClause(
        "size_le_4_cuberoot_f1_rho2", float(size), rhs, rhs - size,
        size ** 3 <= 64 * F1 * R2,
    ))
    return out


def audit_passes(S: Configuration) -> bool:
    return all(c.passed for c in inequality_audit(S))
