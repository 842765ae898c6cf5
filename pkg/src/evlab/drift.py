"""Expected one-step increments: closed forms versus exact enumeration.

The closed forms are stated for ``S != ground``. The oracle enumerates the
transition law and works for every state; with rational parameters it is
exact, so formula checks are equality checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from .config import GROUND, OH_ONE, TEN, Configuration, _resolve_pair, all_configurations, prefix_sums
from .kernel import Params, move_table, step_distribution
from .lyapunov import f1, f2, phi, rho2, size_cubed


class DomainError(ValueError):
    """Input outside the domain where a closed form is stated."""


def _require_nonground(S):
    if S.is_ground:
        raise DomainError("closed form is stated for non-ground configurations only")


def _coerce(params: Params):
    if params.exact:
        return Fraction(params.beta), Fraction(params.p)
    return float(params.beta), float(params.p)


# --- oracle ------------------------------------------------------------


def drift_oracle(S: Configuration, params: Params, functional: Callable[[Configuration], object]):
    """``E[F(next) - F(S)]`` by summing over the exact transition law."""
    law = step_distribution(S, params)
    base = functional(S)
    return sum(p * (functional(s) - base) for s, p in law.entries)


def oracle_parts(S: Configuration, functional) -> tuple:
    """Parameter-free sums of increments over voter outcomes, 10-swaps, 01-swaps.

    The drift at ``(beta, p)`` is
    ``beta*V/(2M) + (1-beta)(1-p)*A/M + (1-beta)*p*B/M`` with ``M = 2N+1``;
    this lets a parameter grid reuse one enumeration.
    """
    base = functional(S)
    V = A = B = 0
    for succ, (cv, c10, c01) in move_table(S).counts.items():
        d = functional(succ) - base
        V += cv * d
        A += c10 * d
        B += c01 * d
    return V, A, B


def drift_from_parts(S: Configuration, params: Params, parts):
    V, A, B = parts
    beta, p = _coerce(params)
    M = 2 * S.N + 1
    if params.exact:
        return beta * V / (2 * M) + (1 - beta) * (1 - p) * Fraction(A) / M + (1 - beta) * p * Fraction(B) / M
    return beta * V / (2 * M) + (1 - beta) * (1 - p) * A / M + (1 - beta) * p * B / M


# --- closed forms ------------------------------------------------------


def drift_f1_formula(S: Configuration, params: Params):
    _require_nonground(S)
    beta, p = _coerce(params)
    N = S.N
    return (1 - beta) * (N * (1 - 2 * p) + (1 - p)) / (2 * N + 1) - beta * N / (2 * N + 1)


def drift_f2_formula(S: Configuration, params: Params):
    _require_nonground(S)
    beta, p = _coerce(params)
    N = S.N
    R, T = prefix_sums(S)
    sigma = sum(R) + sum(T)
    half = Fraction(1, 2) if params.exact else 0.5
    return (1 - beta) * (half + (half - p) / (2 * N + 1) - (2 * p - 1) * sigma / (2 * N + 1))


def drift_phi_formula(S: Configuration, params: Params, alpha, exact: bool | None = None):
    """Closed-form drift of ``phi_alpha``.

    With ``a_i(j) = (T_j + R_j + i)^-alpha`` and ``b_i(j) = (T_{j+1} + R_j + i)^-alpha``
    (``R_0 = T_{N+1} = 0``) the drift is

        (1-beta)/(2N+1) * [ -p sum_{j=1..N} a_0(j) + (1-p) sum_{j=0..N} b_2(j) ]
      + beta/(2N+1) * N * [ sum_{j=1..N} (a_1(j) - b_1(j-1)) - b_1(N) ].

    In the voter bracket, a 01 pair turned into 00 or 11 shifts every column
    right of it by one in opposite directions. The two shifts telescope to the
    same boundary term ``b_1(N)`` whichever pair was chosen, so each of the
    ``2N+1`` pairs contributes the common sum up to a term that cancels in
    aggregate. ``exact`` defaults to True for rational parameters and integer
    ``alpha``.
    """
    _require_nonground(S)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if exact is None:
        exact = params.exact and int(alpha) == alpha
    N = S.N
    R, T = prefix_sums(S)
    R = (0,) + R                 # R[0..N]
    T = (None,) + T + (0,)       # T[1..N+1]
    if exact:
        beta, p = Fraction(params.beta), Fraction(params.p)
        e = int(alpha)

        def pw(x):
            return Fraction(1, x ** e)
    else:
        beta, p = float(params.beta), float(params.p)
        e = float(alpha)

        def pw(x):
            return float(x) ** -e

    def a(i, j):
        return pw(T[j] + R[j] + i)

    def b(i, j):
        return pw(T[j + 1] + R[j] + i)

    excl = -p * sum(a(0, j) for j in range(1, N + 1)) + (1 - p) * sum(
        b(2, j) for j in range(0, N + 1)
    )
    vote = N * (sum(a(1, j) - b(1, j - 1) for j in range(1, N + 1)) - b(1, N))
    return ((1 - beta) * excl + beta * vote) / (2 * N + 1)


# --- jump laws (pure exclusion) ---------------------------------------


def f1_jump_law(S: Configuration, p) -> dict[int, object]:
    """Law of ``f1(next) - f1(S)`` when ``beta = 0``."""
    N = S.N
    M = 2 * N + 1
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
    return {-1: p * N / M, 0: (N + p) / M, 1: (1 - p) * (N + 1) / M}


def size_jump_law(S: Configuration, p) -> dict[int, object]:
    """Law of ``|next| - |S|`` when ``beta = 0``."""
    if isinstance(p, (int, Fraction)):
        p = Fraction(p)
    if S.is_ground:
        return {2: 1 - p, 0: p}
    if S.blocks == (1, 1):
        return {-2: p / 3, 0: (1 + p) / 3, 1: 2 * (1 - p) / 3}
    N = S.N
    M = 2 * N + 1
    up = 2 * (1 - p) / M
    down = p * ((S.n[0] == 1) + (S.m[-1] == 1)) / M
    return {1: up, -1: down, 0: 1 - up - down}


def f2_jump_under_exclusion(S: Configuration, pair) -> int:
    """Change of ``f2`` when the given pair is swapped."""
    pr = _resolve_pair(S, pair)
    R, T = prefix_sums(S)
    N = S.N
    Rj = R[pr.j - 1] if pr.j >= 1 else 0
    if pr.kind == TEN:
        Tn = T[pr.j] if pr.j + 1 <= N else 0
        return 1 + Rj + Tn
    return 1 - Rj - T[pr.j - 1]


def moment_bound_predictor(gamma):
    """Largest moment order guaranteed by a drift bound ``-C X^gamma``."""
    if not 0 <= gamma < 1:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    if isinstance(gamma, (int, Fraction)):
        return 1 / (1 - Fraction(gamma))
    return 1.0 / (1.0 - gamma)


# --- reports -----------------------------------------------------------


@dataclass
class DriftReport:
    functional: str
    formula: object
    oracle: object
    params: Params
    config: Configuration

    @property
    def gap(self):
        return abs(self.formula - self.oracle)

    def ok(self, tol: float = 1e-12) -> bool:
        if isinstance(self.gap, Fraction):
            return self.gap == 0
        return self.gap <= tol

    def csv_row(self) -> list[str]:
        return [
            self.config.to_csv_field(),
            str(self.params.beta),
            str(self.params.p),
            self.functional,
            _fmt(self.formula),
            _fmt(self.oracle),
            _fmt(self.gap),
        ]


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


DRIFT_CSV_HEADER = ["config_blocks", "beta", "p", "functional", "formula", "oracle", "gap"]


def _phi_pair(alpha):
    exact_ok = int(alpha) == alpha

    def functional(S, exact):
        return phi(S, alpha, exact=exact and exact_ok)

    def formula(S, params, exact):
        return drift_phi_formula(S, params, alpha, exact=exact and exact_ok)
    return functional, formula


FORMULAS = {
    "f1": (lambda S, exact: f1(S), lambda S, prm, exact: drift_f1_formula(S, prm)),
    "f2": (lambda S, exact: f2(S), lambda S, prm, exact: drift_f2_formula(S, prm)),
    "phi0": _phi_pair(0),
    "phi0.5": _phi_pair(0.5),
    "phi1": _phi_pair(1),
    "phi2": _phi_pair(2),
}


def drift_reports(
    configs, params_list, functional: str, exact: bool = True
) -> Iterator[DriftReport]:
    """Formula/oracle pairs for every configuration and parameter point.

    Ground states are skipped (no closed form there). The oracle is enumerated
    once per configuration and reused across the parameter list.
    """
    try:
        fn, formula = FORMULAS[functional]
    except KeyError:
        raise ValueError(f"unknown functional {functional!r}; choose from {sorted(FORMULAS)}")
    for S in configs:
        if S.is_ground:
            continue
        cache: dict = {}

        def F(X, _cache=cache):
            if X not in _cache:
                _cache[X] = fn(X, exact)
            return _cache[X]

        parts = oracle_parts(S, F)
        for prm in params_list:
            use = prm if (exact and prm.exact) else prm.as_float()
            yield DriftReport(functional, formula(S, use, exact), drift_from_parts(S, use, parts), use, S)


def rational_grid(points: int = 8) -> list[Fraction]:
    return [Fraction(k, points - 1) for k in range(points)]


def exhaustive_configs(max_size: int = 12) -> list[Configuration]:
    return list(all_configurations(max_size))


def empirical_f2_constant(max_size: int = 12, min_size: int = 6, p=Fraction(3, 4)) -> float:
    """Smallest ``C`` with ``drift_f2 <= -C f2^(1/6)`` over ``min_size <= |S| <= max_size`` at ``beta = 0``.

    Reported, never asserted: a positive value means the negative-drift shape
    holds on the range.
    """
    prm = Params(Fraction(0), Fraction(p))
    best = math.inf
    for S in all_configurations(max_size):
        if S.size < min_size:
            continue
        d = float(drift_f2_formula(S, prm))
        best = min(best, -d / f2(S) ** (1 / 6))
    return best


__all__ = [
    "DomainError", "drift_oracle", "oracle_parts", "drift_from_parts",
    "drift_f1_formula", "drift_f2_formula", "drift_phi_formula", "f1_jump_law",
    "size_jump_law", "f2_jump_under_exclusion", "moment_bound_predictor",
    "DriftReport", "drift_reports", "rational_grid", "exhaustive_configs",
    "empirical_f2_constant", "FORMULAS", "DRIFT_CSV_HEADER", "rho2", "size_cubed",
    "GROUND", "OH_ONE",
]
