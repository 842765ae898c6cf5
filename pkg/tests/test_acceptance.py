"""Acceptance criteria 1-12 at their stated tolerances.

Each test records one ``PASS``/``FAIL`` line, printed together at the end of
the pytest run. Run this file directly to execute only the acceptance suite.
"""

import sys
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import drift as site_drift
from oracles import phi_sites

from evlab.coloured import chi_martingale_check, initial_colouring
from evlab.config import D1, GROUND, all_configurations, apply_exclusion, from_string
from evlab.drift import (
    drift_from_parts,
    drift_reports,
    f1_jump_law,
    f2_jump_under_exclusion,
    oracle_parts,
    rational_grid,
    size_jump_law,
)
from evlab.experiments import (
    ExperimentSpec,
    _run_single,
    growth_experiment,
    growth_exponent,
    map_replicas,
    replica_rng,
    run_replicas,
    size_bound_probe,
    tail_index_estimate,
)
from evlab.kernel import Params, communicating_class_check, is_absorbing, step_distribution
from evlab.lyapunov import audit_passes, f1, f2, phi, rho2, size_cubed

EXHAUSTIVE = list(all_configurations(12))
GRID8 = [Params(b, p) for b in rational_grid(8) for p in rational_grid(8)]


def record(n: int, ok: bool, detail: str):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def test_c01_drift_formulas():
    worst = {}
    bad = 0
    for name in ("f1", "f2", "phi0", "phi0.5", "phi1", "phi2"):
        gap = 0
        for rep in drift_reports(EXHAUSTIVE, GRID8, name):
            g = rep.gap
            if isinstance(g, Fraction):
                bad += g != 0
            else:
                bad += g > 1e-12
            gap = max(gap, float(g))
        worst[name] = gap
    detail = ", ".join(f"{k} max gap {v:.1e}" for k, v in worst.items())
    record(1, bad == 0, f"{len(EXHAUSTIVE)} configs x 64 grid points; {detail}")


def test_c02_phi1_supermartingale():
    betas = [Fraction(4, 7), Fraction(3, 5), Fraction(4, 5), Fraction(1)]
    ps = [Fraction(0), Fraction(1, 4), Fraction(1, 2)]
    grid = [Params(b, p) for b in betas for p in ps]
    worst = None
    for S in EXHAUSTIVE:
        if S.is_ground:
            continue
        parts = oracle_parts(S, lambda X: phi(X, 1, exact=True))
        for prm in grid:
            d = drift_from_parts(S, prm, parts)
            if worst is None or d > worst[0]:
                worst = (d, S.blocks, prm)
    spot = site_drift("01", Fraction(4, 7), 0, lambda w: phi_sites(w, 1))
    ok = worst[0] <= 1e-15 and spot == Fraction(-2, 63)
    record(2, ok, f"max drift {worst[0]} at {worst[1]} beta={worst[2].beta} p={worst[2].p}; "
                  f"unit spot value {spot}")


def test_c03_jump_laws():
    ps = [Fraction(0), Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(1)]
    mismatches = 0
    checked = 0
    for S in EXHAUSTIVE:
        for p in ps:
            law = step_distribution(S, Params(0, p))
            got_sz = {k: v for k, v in law.pushforward(lambda s: s.size - S.size).items() if v}
            mismatches += got_sz != {k: v for k, v in size_jump_law(S, p).items() if v}
            if not S.is_ground:
                got_f1 = {k: v for k, v in law.pushforward(lambda s: f1(s) - f1(S)).items() if v}
                mismatches += got_f1 != {k: v for k, v in f1_jump_law(S, p).items() if v}
            checked += 1
        for pr in S.pairs:
            mismatches += f2_jump_under_exclusion(S, pr) != f2(apply_exclusion(S, pr)) - f2(S)
    record(3, mismatches == 0, f"{checked} (S, p) laws and every pair's f2 jump; "
                               f"{mismatches} mismatches")


def test_c04_inequalities():
    bad = sum(not audit_passes(S) for S in EXHAUSTIVE)
    rng = np.random.default_rng(20240601)
    n_rand = 10_000
    bad_rand = 0
    for _ in range(n_rand):
        L = int(rng.integers(2, 201))
        mid = "".join("01"[b] for b in rng.integers(0, 2, L - 2))
        bad_rand += not audit_passes(from_string("0" + mid + "1"))
    record(4, bad + bad_rand == 0, f"{len(EXHAUSTIVE)} exhaustive + {n_rand} random "
                                   f"(|S| <= 200); {bad + bad_rand} violations")


def test_c05_rho2_and_cube_drifts():
    prm = Params(0, Fraction(1, 2))
    worst_rho = worst_cube = None
    for S in EXHAUSTIVE:
        law = step_distribution(S, prm)
        dr = law.expectation(rho2) - rho2(S)
        dc = law.expectation(size_cubed) - size_cubed(S)
        worst_rho = dr if worst_rho is None else max(worst_rho, dr)
        worst_cube = dc if worst_cube is None else min(worst_cube, dc)
    ground_ok = all(
        step_distribution(GROUND, Params(0, p)).expectation(rho2) == 2 * (1 - p)
        for p in rational_grid(8)
    )
    ok = worst_rho <= 2 and worst_cube >= 4 and ground_ok
    record(5, ok, f"max rho2 drift {worst_rho}, min cube drift {worst_cube}; "
                  f"ground rho2 drift = 2(1-p) on the grid: {ground_ok}")


def test_c06_chi_martingale():
    starts = [initial_colouring(S) for S in all_configurations(8) if not S.is_ground]
    rep = chi_martingale_check(starts, 3, GRID8)
    record(6, rep.passed, f"{rep.states} coloured states x {rep.grid_points} grid points; "
                          f"worst drift {rep.worst_drift}, jumps {sorted(rep.jumps)}")


def test_c07_voter_tail_exponent():
    spec = ExperimentSpec(1.0, 0.0, D1, cap=10**6, replicas=10**5, seed=7)
    taus = run_replicas(spec).tau_array()
    est = tail_index_estimate(taus)
    ok = 1.3 <= est.exponent <= 1.7
    record(7, ok, f"survival slope {est.exponent:.3f} +- {est.stderr:.3f} over "
                  f"t in [{est.t_range[0]:.0f}, {est.t_range[1]:.0f}], "
                  f"censored {est.censored_fraction:.4f}")


def test_c08_symmetric_growth():
    prm = Params(0.0, 0.5)

    def one(i):
        rec = growth_experiment(GROUND, prm, 10**6, replica_rng(8, i))
        return growth_exponent(rec, "max_size").slope

    slopes = np.array(map_replicas(one, 32))
    med = float(np.median(slopes))
    record(8, 0.30 <= med <= 0.55, f"median slope {med:.3f} "
                                   f"(range {slopes.min():.3f}-{slopes.max():.3f}) over 32 replicas")


def test_c09_transient_growth():
    prm = Params(0.0, 0.3)
    t = 10**6

    def one(i):
        res = _run_single(D1, prm, t, replica_rng(9, i), np.array([t]), track_f1=True)
        return res.violations, res.table[-1, 3] / t

    out = map_replicas(one, 32)
    violations = sum(v for v, _ in out)
    frac = float(np.mean([r >= 0.15 for _, r in out]))
    ok = violations == 0 and frac >= 0.9
    record(9, ok, f"{violations} steps with f1 > f1(S0)+t; f1/t >= 0.15 in "
                  f"{frac:.0%} of 32 replicas (min {min(r for _, r in out):.3f})")


def test_c10_positive_recurrence():
    spec = ExperimentSpec(0.0, 0.7, D1, cap=10**5, replicas=10**4, seed=10)
    res = run_replicas(spec)
    taus = res.tau_array()
    censored = int((taus < 0).sum())
    tail = float(np.mean((taus < 0) | (taus > 10**4)))
    record(10, censored == 0 and tail < 1e-3,
           f"{censored} censored of 10^4; P(tau > 10^4) = {tail:.1e}; max tau {taus.max()}")


def test_c11_communication_and_absorption():
    states = list(all_configurations(6))
    comm = communicating_class_check(states, Params(Fraction(1, 2), Fraction(1, 2)), size_cap=6)
    absorbing = all(is_absorbing(GROUND, Params(b, p)) for b in rational_grid(8)
                    for p in rational_grid(8) if b == 1 or p == 1)
    record(11, comm and absorbing,
           f"{len(states)} states with |S| <= 6 communicate: {comm}; "
           f"ground absorbing at beta=1 and at p=1: {absorbing}")


def test_c12_size_bound():
    res = size_bound_probe(Params(0.0, 0.5), GROUND, 10**4, replicas=1000, seed=12)
    record(12, res.probability >= 0.95 - 3 * res.stderr,
           f"P(max size <= {res.size_limit:.1f}) = {res.probability:.3f} "
           f"vs 0.95 - 3 sigma = {0.95 - 3 * res.stderr:.3f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
